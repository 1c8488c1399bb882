//! Nonexpansive operators assembled from metric projections.
//!
//! All variants are built from projections onto the sets of a registry, so
//! each is nonexpansive: compositions (string products) and convex
//! combinations (string averages, simultaneous projection) of nonexpansive
//! maps stay nonexpansive. Set indices are 0-based here; the instance config
//! uses 1-based indices and converts on load.
//!
//! Orbit convergence (`lim T^j y` exists for every start) is not decidable for
//! arbitrary operators. Restricting construction to projection-built variants
//! keeps it true on the instance classes this crate is tested against.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::convex_sets::{validate_weights, BoxSet, ConvexSet};
use crate::error::{check_dim, Error, Result};
use crate::Vector;

/// Ordered strings `I_t` of set indices.
#[derive(Debug, Clone, PartialEq)]
pub struct StringLayout {
    strings: Vec<Vec<usize>>,
}

impl StringLayout {
    pub fn new(strings: Vec<Vec<usize>>) -> Result<Self> {
        if strings.is_empty() {
            return Err(Error::InvalidInput("string layout needs at least one string".into()));
        }
        if strings.iter().any(Vec::is_empty) {
            return Err(Error::InvalidInput("strings must be nonempty".into()));
        }
        Ok(Self { strings })
    }

    pub fn strings(&self) -> &[Vec<usize>] {
        &self.strings
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    /// True iff every index `0..m` occurs in some string.
    pub fn check_fit(&self, m: usize) -> bool {
        let mut seen = vec![false; m];
        for &i in self.strings.iter().flatten() {
            if i < m {
                seen[i] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn max_index(&self) -> Option<usize> {
        self.strings.iter().flatten().copied().max()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    /// `P_{C_i}`.
    Projection(usize),
    /// `P_{i_last} ⋯ P_{i_first}`; the first index listed is applied first.
    String(Vec<usize>),
    /// `Σ_t w_t F_t(x)` over the strings of the layout.
    Averaged { layout: StringLayout, weights: Vec<f64> },
    /// `P_w(x) = Σ_i w_i P_{C_i}(x)` over the whole registry.
    Simultaneous { weights: Vec<f64> },
}

fn apply_string(registry: &[ConvexSet], indices: &[usize], x: &Vector) -> Vector {
    let mut y = x.clone();
    for &i in indices {
        y = registry[i].project_unchecked(&y);
    }
    y
}

impl OperatorSpec {
    /// Checks indices, dimensions and weights against `registry`.
    pub fn validate(&self, registry: &[ConvexSet]) -> Result<()> {
        if registry.is_empty() {
            return Err(Error::InvalidInput("operator registry is empty".into()));
        }
        let n = registry[0].dim();
        for s in registry {
            check_dim(n, s.dim())?;
        }
        let m = registry.len();
        let in_range = |i: usize| {
            if i < m {
                Ok(())
            } else {
                Err(Error::IndexOutOfRange { index: i, len: m })
            }
        };
        match self {
            Self::Projection(i) => in_range(*i),
            Self::String(idx) => {
                if idx.is_empty() {
                    return Err(Error::InvalidInput("string must be nonempty".into()));
                }
                idx.iter().try_for_each(|&i| in_range(i))
            }
            Self::Averaged { layout, weights } => {
                if let Some(i) = layout.max_index() {
                    in_range(i)?;
                }
                if weights.len() != layout.len() {
                    return Err(Error::InvalidInput(format!(
                        "{} strings but {} string weights",
                        layout.len(),
                        weights.len()
                    )));
                }
                validate_weights(weights, "string")
            }
            Self::Simultaneous { weights } => {
                if weights.len() != m {
                    return Err(Error::InvalidInput(format!(
                        "{m} sets but {} simultaneous weights",
                        weights.len()
                    )));
                }
                validate_weights(weights, "simultaneous")
            }
        }
    }

    pub fn apply(&self, registry: &[ConvexSet], x: &Vector) -> Result<Vector> {
        self.validate(registry)?;
        check_dim(registry[0].dim(), x.len())?;
        Ok(self.apply_unchecked(registry, x))
    }

    pub(crate) fn apply_unchecked(&self, registry: &[ConvexSet], x: &Vector) -> Vector {
        match self {
            Self::Projection(i) => registry[*i].project_unchecked(x),
            Self::String(idx) => apply_string(registry, idx, x),
            Self::Averaged { layout, weights } => {
                let mut acc = Vector::zeros(x.len());
                for (s, &w) in layout.strings().iter().zip(weights) {
                    if w != 0.0 {
                        acc += apply_string(registry, s, x) * w;
                    }
                }
                acc
            }
            Self::Simultaneous { weights } => {
                let mut acc = Vector::zeros(x.len());
                for (c, &w) in registry.iter().zip(weights) {
                    if w != 0.0 {
                        acc += c.project_unchecked(x) * w;
                    }
                }
                acc
            }
        }
    }

    /// Registry indices the operator actually touches, sorted and deduplicated.
    pub fn referenced_sets(&self, m: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = match self {
            Self::Projection(i) => vec![*i],
            Self::String(s) => s.clone(),
            Self::Averaged { layout, weights } => layout
                .strings()
                .iter()
                .zip(weights)
                .filter(|(_, w)| **w > 0.0)
                .flat_map(|(s, _)| s.iter().copied())
                .collect(),
            Self::Simultaneous { weights } => (0..m).filter(|&i| weights[i] > 0.0).collect(),
        };
        idx.sort_unstable();
        idx.dedup();
        idx
    }
}

/// How `inexact_orbit` perturbs each exact step `T x^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    /// Adds a seeded random vector of norm exactly `μ_{k+1}`.
    Exact { seed: u64 },
    /// Adds a seeded random vector of norm uniform in `[0, μ_{k+1}]`.
    UpTo { seed: u64 },
}

/// A validated operator bound to its set registry, optionally followed by a
/// projection onto the ambient box so that it maps the box into itself.
#[derive(Debug, Clone)]
pub struct Operator {
    spec: OperatorSpec,
    registry: Vec<ConvexSet>,
    ambient: Option<ConvexSet>,
}

impl Operator {
    pub fn new(spec: OperatorSpec, registry: Vec<ConvexSet>, ambient: Option<BoxSet>) -> Result<Self> {
        spec.validate(&registry)?;
        if let Some(b) = &ambient {
            check_dim(registry[0].dim(), b.dim())?;
        }
        Ok(Self {
            spec,
            registry,
            ambient: ambient.map(ConvexSet::Box),
        })
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn registry(&self) -> &[ConvexSet] {
        &self.registry
    }

    pub fn ambient(&self) -> Option<&BoxSet> {
        match &self.ambient {
            Some(ConvexSet::Box(b)) => Some(b),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.registry[0].dim()
    }

    /// Whether the strings cover every registry index. Non-averaged operators
    /// report coverage of their referenced sets.
    pub fn is_fit(&self) -> bool {
        match &self.spec {
            OperatorSpec::Averaged { layout, .. } => layout.check_fit(self.registry.len()),
            other => other.referenced_sets(self.registry.len()).len() == self.registry.len(),
        }
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &Vector) -> Vector {
        let y = self.spec.apply_unchecked(&self.registry, x);
        match &self.ambient {
            Some(b) => b.project_unchecked(&y),
            None => y,
        }
    }

    /// `‖x − T x‖`.
    pub fn residual(&self, x: &Vector) -> Result<f64> {
        Ok((x - self.apply(x)?).norm())
    }

    /// `(x0, T x0, …, T^n x0)`.
    pub fn power_orbit(&self, x0: &Vector, n: usize) -> Result<Vec<Vector>> {
        check_dim(self.dim(), x0.len())?;
        let mut orbit = Vec::with_capacity(n + 1);
        orbit.push(x0.clone());
        for _ in 0..n {
            let next = self.apply_unchecked(orbit.last().unwrap());
            orbit.push(next);
        }
        Ok(orbit)
    }

    /// Orbit with computational errors: `errors[k]` bounds the step from
    /// `x^k` to `x^{k+1}`, i.e. `‖x^{k+1} − T x^k‖ ≤ errors[k]`.
    pub fn inexact_orbit(
        &self,
        x0: &Vector,
        errors: &[f64],
        rule: Perturbation,
    ) -> Result<Vec<Vector>> {
        check_dim(self.dim(), x0.len())?;
        if let Some(mu) = errors.iter().find(|mu| !(mu.is_finite() && **mu >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "error bounds must be finite and >= 0, got {mu}"
            )));
        }
        let (seed, exact) = match rule {
            Perturbation::Exact { seed } => (seed, true),
            Perturbation::UpTo { seed } => (seed, false),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim();
        let mut orbit = Vec::with_capacity(errors.len() + 1);
        orbit.push(x0.clone());
        for &mu in errors {
            let mut next = self.apply_unchecked(orbit.last().unwrap());
            let dir = random_unit(&mut rng, n);
            let scale = if exact { mu } else { mu * rng.random::<f64>() };
            if scale > 0.0 {
                next += dir * scale;
            }
            orbit.push(next);
        }
        Ok(orbit)
    }
}

pub(crate) fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}
