//! JSON instance configuration.
//!
//! Set indices in operator specs are 1-based, as written by hand; they are
//! shifted to 0-based when the instance is built.

use crate::CliError;
use datacompat::{
    AffineRow, BoxSet, ConstraintFamily, ConvexSet, Objective, OperatorSpec, ProblemInstance,
    StepSchedule, StringLayout, Vector,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub dimension: usize,
    #[serde(rename = "box")]
    pub ambient: BoxConfig,
    pub sets: Vec<SetConfig>,
    /// Defaults to uniform weights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub objective: ObjectiveConfig,
    pub operator: OperatorConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    /// Proximity level of `Π(Γ,γ)`; absent means the operator's own target set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub tau: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Starting point; sampled uniformly in the box from `seed` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// Grid resolution of the oracle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_h: Option<f64>,
    /// Value tolerance of the oracle's representative set; defaults to `h·L̄`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_value_tol: Option<f64>,
    /// Explicit solution-set representatives; replaces the oracle (required
    /// above three dimensions).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<Vec<f64>>>,
}

fn default_max_iter() -> usize {
    datacompat::solvers::DEFAULT_MAX_ITER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetConfig {
    Halfspace { a: Vec<f64>, b: f64 },
    Hyperplane { a: Vec<f64>, b: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowConfig {
    pub a: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveConfig {
    /// `½xᵀQx + cᵀx + d`, `Q` given row by row.
    Quadratic {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        c: Vec<f64>,
        #[serde(default)]
        d: f64,
    },
    Linear {
        c: Vec<f64>,
        #[serde(default)]
        d: f64,
    },
    NormDistance { p: Vec<f64> },
    AffineMax { rows: Vec<RowConfig> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorConfig {
    Projection { set: usize },
    String { indices: Vec<usize> },
    StringAvg { strings: Vec<Vec<usize>>, weights: Vec<f64> },
    /// Uses the family weights unless given.
    Simultaneous {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ScheduleConfig {
    Power { a: f64, p: f64 },
    Explicit { explicit: Vec<f64> },
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self::Power { a: 1.0, p: 1.0 }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn vector(xs: &[f64], n: usize, what: &str) -> Result<Vector, CliError> {
    if xs.len() != n {
        return Err(invalid(format!("{what} has {} entries, dimension is {n}", xs.len())));
    }
    if let Some(j) = xs.iter().position(|v| !v.is_finite()) {
        return Err(invalid(format!("{what} entry {j} is not finite")));
    }
    Ok(Vector::from_column_slice(xs))
}

/// Shifts 1-based set indices, naming the offending one on failure.
fn zero_based(idx: &[usize], m: usize, what: &str) -> Result<Vec<usize>, CliError> {
    idx.iter()
        .map(|&i| {
            if (1..=m).contains(&i) {
                Ok(i - 1)
            } else {
                Err(invalid(format!("{what}: set index {i} is outside 1..={m}")))
            }
        })
        .collect()
}

fn core(what: &str) -> impl Fn(datacompat::Error) -> CliError + '_ {
    move |e| invalid(format!("{what}: {e}"))
}

impl InstanceConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the invariants not already enforced by instance construction.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.dimension == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(invalid(format!("tau must lie in (0,1), got {}", self.tau)));
        }
        if let Some(g) = self.gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(invalid(format!("gamma must be >= 0, got {g}")));
            }
        }
        if let Some(h) = self.oracle_h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(invalid(format!("oracle_h must be > 0, got {h}")));
            }
        }
        if let Some(t) = self.oracle_value_tol {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid(format!("oracle_value_tol must be >= 0, got {t}")));
            }
        }
        if self.reference.is_none() && self.dimension > datacompat::oracle::MAX_GRID_DIM {
            return Err(invalid(format!(
                "dimension {} exceeds the oracle limit of {}; supply `reference`",
                self.dimension,
                datacompat::oracle::MAX_GRID_DIM
            )));
        }
        if matches!(&self.reference, Some(r) if r.is_empty()) {
            return Err(invalid("reference must hold at least one point"));
        }
        self.instance().map(|_| ())
    }

    pub fn family(&self) -> Result<ConstraintFamily, CliError> {
        let n = self.dimension;
        let sets = self
            .sets
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let what = format!("set {}", i + 1);
                match s {
                    SetConfig::Halfspace { a, b } => ConvexSet::halfspace(vector(a, n, &what)?, *b),
                    SetConfig::Hyperplane { a, b } => ConvexSet::hyperplane(vector(a, n, &what)?, *b),
                    SetConfig::Box { lo, hi } => ConvexSet::boxed(vector(lo, n, &what)?, vector(hi, n, &what)?),
                    SetConfig::Ball { center, radius } => ConvexSet::ball(vector(center, n, &what)?, *radius),
                }
                .map_err(core(&what))
            })
            .collect::<Result<Vec<_>, _>>()?;
        match &self.weights {
            Some(w) => ConstraintFamily::new(sets, w.clone()),
            None => ConstraintFamily::uniform(sets),
        }
        .map_err(core("constraint family"))
    }

    pub fn ambient(&self) -> Result<BoxSet, CliError> {
        let n = self.dimension;
        BoxSet::new(vector(&self.ambient.lo, n, "box.lo")?, vector(&self.ambient.hi, n, "box.hi")?)
            .map_err(core("box"))
    }

    pub fn objective(&self) -> Result<Objective, CliError> {
        let n = self.dimension;
        match &self.objective {
            ObjectiveConfig::Quadratic { q, c, d } => {
                if q.len() != n || q.iter().any(|r| r.len() != n) {
                    return Err(invalid(format!("objective Q must be {n}×{n}")));
                }
                let flat: Vec<f64> = q.iter().flatten().copied().collect();
                Objective::quadratic(DMatrix::from_row_slice(n, n, &flat), vector(c, n, "objective c")?, *d)
            }
            ObjectiveConfig::Linear { c, d } => Objective::linear(vector(c, n, "objective c")?, *d),
            ObjectiveConfig::NormDistance { p } => Objective::norm_distance(vector(p, n, "objective p")?),
            ObjectiveConfig::AffineMax { rows } => Objective::affine_max(
                rows.iter()
                    .enumerate()
                    .map(|(j, r)| Ok(AffineRow { a: vector(&r.a, n, &format!("objective row {}", j + 1))?, b: r.b }))
                    .collect::<Result<Vec<_>, CliError>>()?,
            ),
        }
        .map_err(core("objective"))
    }

    pub fn operator_spec(&self, family: &ConstraintFamily) -> Result<OperatorSpec, CliError> {
        let m = self.sets.len();
        Ok(match &self.operator {
            OperatorConfig::Projection { set } => {
                OperatorSpec::Projection(zero_based(&[*set], m, "operator")?[0])
            }
            OperatorConfig::String { indices } => OperatorSpec::String(zero_based(indices, m, "operator")?),
            OperatorConfig::StringAvg { strings, weights } => {
                let strings = strings
                    .iter()
                    .enumerate()
                    .map(|(t, s)| zero_based(s, m, &format!("operator string {}", t + 1)))
                    .collect::<Result<Vec<_>, _>>()?;
                OperatorSpec::Averaged {
                    layout: StringLayout::new(strings).map_err(core("operator"))?,
                    weights: weights.clone(),
                }
            }
            OperatorConfig::Simultaneous { weights } => OperatorSpec::Simultaneous {
                weights: weights.clone().unwrap_or_else(|| family.weights().to_vec()),
            },
        })
    }

    pub fn schedule(&self) -> Result<StepSchedule, CliError> {
        match &self.schedule {
            ScheduleConfig::Power { a, p } => StepSchedule::power(*a, *p),
            ScheduleConfig::Explicit { explicit } => StepSchedule::explicit(explicit.clone()),
        }
        .map_err(core("schedule"))
    }

    pub fn instance(&self) -> Result<ProblemInstance, CliError> {
        let family = self.family()?;
        let spec = self.operator_spec(&family)?;
        ProblemInstance::new(self.ambient()?, family, self.objective()?, spec, self.schedule()?)
            .map_err(core("instance"))
    }

    /// The configured `x0`, or a uniform sample in the box drawn from `seed`.
    pub fn start(&self) -> Result<Vector, CliError> {
        match &self.x0 {
            Some(x) => vector(x, self.dimension, "x0"),
            None => {
                let b = self.ambient()?;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                Ok(Vector::from_fn(self.dimension, |j, _| {
                    b.lo()[j] + (b.hi()[j] - b.lo()[j]) * rng.random::<f64>()
                }))
            }
        }
    }

    pub fn reference_points(&self) -> Result<Option<Vec<Vector>>, CliError> {
        self.reference
            .as_ref()
            .map(|pts| {
                pts.iter()
                    .enumerate()
                    .map(|(i, p)| vector(p, self.dimension, &format!("reference point {}", i + 1)))
                    .collect()
            })
            .transpose()
    }

    /// Grid resolution used by the oracle.
    pub fn grid_h(&self) -> f64 {
        self.oracle_h.unwrap_or(match self.dimension {
            1 => 1e-3,
            2 => 1e-2,
            _ => 2.5e-2,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dimension": 2,
        "box": {"lo": [-1, -1], "hi": [1, 1]},
        "sets": [{"type": "ball", "center": [0, 0], "radius": 0.5},
                 {"type": "hyperplane", "a": [1, 1], "b": 0}],
        "objective": {"type": "affine_max", "rows": [{"a": [1, 0], "b": 0}, {"a": [-1, 0], "b": 0}]},
        "operator": {"type": "simultaneous"},
        "tau": 0.1
    }"#;

    #[test]
    fn defaults_fill_optional_fields() {
        let cfg = InstanceConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.schedule, ScheduleConfig::Power { a: 1.0, p: 1.0 });
        assert_eq!(cfg.max_iter, 1_000_000);
        assert_eq!(cfg.grid_h(), 1e-2);
        let inst = cfg.instance().unwrap();
        assert_eq!(inst.family().weights(), &[0.5, 0.5]);
        assert!(matches!(inst.operator().spec(), OperatorSpec::Simultaneous { weights } if weights == &[0.5, 0.5]));
        let x0 = cfg.start().unwrap();
        assert!(x0.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(x0, cfg.start().unwrap());
    }

    #[test]
    fn indices_are_one_based() {
        let mut cfg = InstanceConfig::parse(MINIMAL).unwrap();
        cfg.operator = OperatorConfig::StringAvg { strings: vec![vec![2, 1]], weights: vec![1.0] };
        let spec = cfg.operator_spec(&cfg.family().unwrap()).unwrap();
        assert!(matches!(spec, OperatorSpec::Averaged { layout, .. } if layout.strings() == [vec![1, 0]]));
        cfg.operator = OperatorConfig::Projection { set: 0 };
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("set index 0 is outside 1..=2"), "{err}");
    }

    #[test]
    fn high_dimension_needs_a_reference() {
        let text = r#"{"dimension": 4, "box": {"lo": [0,0,0,0], "hi": [1,1,1,1]},
            "sets": [{"type": "box", "lo": [0,0,0,0], "hi": [1,1,1,1]}],
            "objective": {"type": "linear", "c": [1,0,0,0]},
            "operator": {"type": "projection", "set": 1}, "tau": 0.5}"#;
        assert!(InstanceConfig::parse(text).unwrap_err().to_string().contains("supply `reference`"));
        let with_ref = text.replace(r#""tau": 0.5"#, r#""tau": 0.5, "reference": [[0,0,0,0]]"#);
        assert!(InstanceConfig::parse(&with_ref).is_ok());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = MINIMAL.replace(r#""tau": 0.1"#, r#""tau": 0.1, "tolerance": 3"#);
        assert!(matches!(InstanceConfig::parse(&text), Err(CliError::Parse(_))));
    }
}
