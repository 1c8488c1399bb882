//! Hybrid subgradient iterations.
//!
//! Each step moves along a unit-norm subgradient direction with step size
//! `α_k` and then applies the nonexpansive operator:
//!
//! ```text
//! x^{k+1} = T(x^k)                      if 0 ∈ ∂f(x^k)
//! x^{k+1} = T(x^k − α_k s^k / ‖s^k‖)    otherwise
//! ```
//!
//! The three methods differ only in the operator: any projection-built `T`
//! (HSM), a fit string average `O` (HSASM), or the simultaneous projection
//! `P_w` (HSPSM). Runs stop at the first (τ,L̄)-compatible iterate.

use crate::compatibility::{prox_value_unchecked, Certifier, CompatCriteria, CompatReport};
use crate::convex_sets::{BoxSet, ConstraintFamily};
use crate::error::{check_dim, Error, Result};
use crate::exec::Execution;
use crate::objectives::Objective;
use crate::operators::{Operator, OperatorSpec};
use crate::Vector;

pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// Absolute slack admitted by [`descent_check`] for rounding.
pub const DESCENT_SLACK: f64 = 1e-9;

/// Power schedules must sum past [`DIVERGENCE_FLOOR`] within this many steps.
pub const DIVERGENCE_HORIZON: usize = 1_000_000;
pub const DIVERGENCE_FLOOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    /// `α_k = a (k+1)^{-p}`.
    Power { a: f64, p: f64 },
    /// Finite nonincreasing list; runs stop when it is exhausted.
    Explicit(Vec<f64>),
}

impl Default for StepSchedule {
    fn default() -> Self {
        Self::Power { a: 1.0, p: 1.0 }
    }
}

impl StepSchedule {
    pub fn power(a: f64, p: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidInput(format!("step scale a must lie in (0,1], got {a}")));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidInput(format!("step exponent p must lie in (0,1], got {p}")));
        }
        let s = Self::Power { a, p };
        let sum = s.partial_sum(DIVERGENCE_HORIZON);
        if !(sum > DIVERGENCE_FLOOR) {
            return Err(Error::InvalidInput(format!(
                "step schedule a={a}, p={p} sums to {sum} over {DIVERGENCE_HORIZON} steps, \
                 at most {DIVERGENCE_FLOOR}; steps are too small to make progress"
            )));
        }
        Ok(s)
    }

    pub fn explicit(steps: Vec<f64>) -> Result<Self> {
        if let Some(a) = steps.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return Err(Error::InvalidInput(format!("step sizes must lie in (0,1], got {a}")));
        }
        if steps.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput("explicit step sizes must be nonincreasing".into()));
        }
        Ok(Self::Explicit(steps))
    }

    pub fn alpha(&self, k: usize) -> Option<f64> {
        match self {
            Self::Power { a, p } => Some(a * ((k + 1) as f64).powf(-p)),
            Self::Explicit(steps) => steps.get(k).copied(),
        }
    }

    pub fn partial_sum(&self, n: usize) -> f64 {
        (0..n).map_while(|k| self.alpha(k)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Hsm,
    Hsasm,
    Hspsm,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Hsm => "hsm",
            Self::Hsasm => "hsasm",
            Self::Hspsm => "hspsm",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hsm" => Ok(Self::Hsm),
            "hsasm" => Ok(Self::Hsasm),
            "hspsm" => Ok(Self::Hspsm),
            other => Err(Error::InvalidInput(format!("unknown solver '{other}'"))),
        }
    }
}

/// Ambient box, constraint data, objective, operator and step schedule.
///
/// The operator is built over the family's sets and always finishes with a
/// projection onto the ambient box, so it maps the box into itself.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    ambient: BoxSet,
    family: ConstraintFamily,
    objective: Objective,
    operator: Operator,
    schedule: StepSchedule,
}

impl ProblemInstance {
    pub fn new(
        ambient: BoxSet,
        family: ConstraintFamily,
        objective: Objective,
        spec: OperatorSpec,
        schedule: StepSchedule,
    ) -> Result<Self> {
        let n = ambient.dim();
        check_dim(n, family.dim())?;
        check_dim(n, objective.dim())?;
        let operator = Operator::new(spec, family.sets().to_vec(), Some(ambient.clone()))?;
        Ok(Self { ambient, family, objective, operator, schedule })
    }

    pub fn ambient(&self) -> &BoxSet {
        &self.ambient
    }

    pub fn family(&self) -> &ConstraintFamily {
        &self.family
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }

    pub fn schedule(&self) -> &StepSchedule {
        &self.schedule
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    /// `L̄` over the ambient box.
    pub fn lipschitz_bound(&self) -> f64 {
        self.objective.lipschitz_bound(&self.ambient)
    }

    /// Radius `M` of a ball around the origin containing the ambient box.
    pub fn enclosing_radius(&self) -> f64 {
        self.ambient.max_norm()
    }

    /// Checks that the operator variant matches the requested method.
    pub fn check_solver(&self, kind: SolverKind) -> Result<()> {
        match (kind, self.operator.spec()) {
            (SolverKind::Hsm, _) => Ok(()),
            (SolverKind::Hsasm, OperatorSpec::Averaged { layout, .. }) => {
                if layout.check_fit(self.family.len()) {
                    Ok(())
                } else {
                    Err(Error::Configuration(
                        "string-averaging operator is not fit: some set index is not covered by any string"
                            .into(),
                    ))
                }
            }
            (SolverKind::Hsasm, _) => Err(Error::Configuration(
                "hsasm requires a string-averaging operator".into(),
            )),
            (SolverKind::Hspsm, OperatorSpec::Simultaneous { .. }) => Ok(()),
            (SolverKind::Hspsm, _) => Err(Error::Configuration(
                "hspsm requires a simultaneous-projection operator".into(),
            )),
        }
    }
}

/// One hybrid step from `x` with step size `α_k`.
pub fn hsm_step(
    x: &Vector,
    k: usize,
    op: &Operator,
    f: &Objective,
    schedule: &StepSchedule,
) -> Result<Vector> {
    let alpha = schedule
        .alpha(k)
        .ok_or_else(|| Error::Configuration(format!("step schedule has no entry for k = {k}")))?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Precondition(format!("alpha_{k} = {alpha} is outside (0,1]")));
    }
    check_dim(op.dim(), x.len())?;
    check_dim(f.dim(), x.len())?;
    Ok(step_unchecked(x, alpha, op, f))
}

fn step_unchecked(x: &Vector, alpha: f64, op: &Operator, f: &Objective) -> Vector {
    let sg = f.subgradient_unchecked(x);
    let norm = sg.subgrad.norm();
    if sg.zero_flag || norm == 0.0 {
        op.apply_unchecked(x)
    } else {
        op.apply_unchecked(&(x - sg.subgrad * (alpha / norm)))
    }
}

/// One recorded iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub x: Vector,
    pub f: f64,
    pub prox: f64,
    /// `‖x^k − T x^{k−1}‖`; zero for `k = 0`.
    pub residual: f64,
    /// `α_k`, the step size leaving `x^k`; NaN once an explicit schedule is
    /// exhausted.
    pub alpha: f64,
}

/// Unbounded sequence of hybrid iterates starting at `x^0`; ends only when an
/// explicit schedule runs out.
#[derive(Debug, Clone)]
pub struct Iterates<'a> {
    instance: &'a ProblemInstance,
    x: Option<Vector>,
    k: usize,
    residual: f64,
}

impl<'a> Iterates<'a> {
    pub fn new(instance: &'a ProblemInstance, x0: Vector) -> Result<Self> {
        check_dim(instance.dim(), x0.len())?;
        if let Some(j) = x0.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("x0 has a non-finite entry at {j}")));
        }
        Ok(Self { instance, x: Some(x0), k: 0, residual: 0.0 })
    }
}

impl Iterator for Iterates<'_> {
    type Item = TraceRow;

    fn next(&mut self) -> Option<TraceRow> {
        let x = self.x.take()?;
        let inst = self.instance;
        let alpha = inst.schedule.alpha(self.k);
        let row = TraceRow {
            k: self.k,
            f: inst.objective.evaluate_unchecked(&x),
            prox: prox_value_unchecked(&inst.family, &x),
            residual: self.residual,
            alpha: alpha.unwrap_or(f64::NAN),
            x: x.clone(),
        };
        if let Some(alpha) = alpha {
            let next = step_unchecked(&x, alpha, &inst.operator, &inst.objective);
            self.residual = (&next - inst.operator.apply_unchecked(&x)).norm();
            self.x = Some(next);
            self.k += 1;
        }
        Some(row)
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub solver: SolverKind,
    pub trace: Vec<TraceRow>,
    pub report: CompatReport,
    /// Number of steps taken (trace length minus one).
    pub iterations_used: usize,
}

impl RunResult {
    pub fn out_point(&self) -> Option<&TraceRow> {
        self.report.out_index.map(|k| &self.trace[k])
    }
}

/// Iterates until the OUT index is reached or `max_iter` steps were taken.
/// An undefined OUT is reported through `report.out_index == None`.
pub fn run(
    kind: SolverKind,
    instance: &ProblemInstance,
    x0: Vector,
    max_iter: usize,
    criteria: &CompatCriteria,
) -> Result<RunResult> {
    instance.check_solver(kind)?;
    let certifier = Certifier::new(criteria, instance.objective())?;
    let mut trace = Vec::new();
    let mut out = None;
    let mut last = None;
    for row in Iterates::new(instance, x0)? {
        let check = certifier.check_unchecked(&row.x);
        let k = row.k;
        let prox = row.prox;
        let alpha = row.alpha;
        trace.push(row);
        last = Some((check, prox));
        if check.holds {
            out = Some(k);
            break;
        }
        if k >= max_iter || alpha.is_nan() {
            break;
        }
    }
    let (check, prox) = last.expect("trace always holds x0");
    Ok(RunResult {
        solver: kind,
        iterations_used: trace.len() - 1,
        trace,
        report: CompatReport {
            out_index: out,
            dist_to_s: check.dist_to_s,
            f_gap: check.f_gap,
            prox,
        },
    })
}

pub fn hsm_run(
    instance: &ProblemInstance,
    x0: Vector,
    max_iter: usize,
    criteria: &CompatCriteria,
) -> Result<RunResult> {
    run(SolverKind::Hsm, instance, x0, max_iter, criteria)
}

pub fn hsasm_run(
    instance: &ProblemInstance,
    x0: Vector,
    max_iter: usize,
    criteria: &CompatCriteria,
) -> Result<RunResult> {
    run(SolverKind::Hsasm, instance, x0, max_iter, criteria)
}

pub fn hspsm_run(
    instance: &ProblemInstance,
    x0: Vector,
    max_iter: usize,
    criteria: &CompatCriteria,
) -> Result<RunResult> {
    run(SolverKind::Hspsm, instance, x0, max_iter, criteria)
}

/// Independent runs from several starting points.
pub fn run_many(
    kind: SolverKind,
    instance: &ProblemInstance,
    starts: &[Vector],
    max_iter: usize,
    criteria: &CompatCriteria,
    exec: Execution,
) -> Vec<Result<RunResult>> {
    exec.map_slice(starts, |x0| run(kind, instance, x0.clone(), max_iter, criteria))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentCheck {
    pub holds: bool,
    /// `‖y − x̄‖²`.
    pub lhs: f64,
    /// `‖x − x̄‖² − 2α(4L̄)^{-1}Δ + α²`.
    pub rhs: f64,
    pub y: Vector,
}

/// Evaluates the one-step descent inequality
/// `‖y − x̄‖² ≤ ‖x − x̄‖² − 2α(4L̄)^{-1}Δ + α²` for `y = T(x − α v/‖v‖)`.
///
/// `x_bar` must be a constrained minimizer and `l_bar` a Lipschitz constant of
/// `f` on the ambient region; `m_radius` is a radius `M` with the ambient
/// region inside `B(0, M)`. Violated checkable preconditions are errors.
#[allow(clippy::too_many_arguments)]
pub fn descent_check(
    x: &Vector,
    x_bar: &Vector,
    delta: f64,
    alpha: f64,
    f: &Objective,
    op: &Operator,
    l_bar: f64,
    m_radius: f64,
) -> Result<DescentCheck> {
    check_dim(f.dim(), x.len())?;
    check_dim(f.dim(), x_bar.len())?;
    check_dim(op.dim(), x.len())?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Precondition(format!("Delta must lie in (0,1], got {delta}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Precondition(format!("alpha must be > 0, got {alpha}")));
    }
    if !(l_bar > 1.0) {
        return Err(Error::Precondition(format!("L_bar must be > 1, got {l_bar}")));
    }
    if x.norm() > 3.0 * m_radius + 2.0 {
        return Err(Error::Precondition(format!(
            "‖x‖ = {} exceeds 3M + 2 = {}",
            x.norm(),
            3.0 * m_radius + 2.0
        )));
    }
    let fx = f.evaluate_unchecked(x);
    let fbar = f.evaluate_unchecked(x_bar);
    if !(fx > fbar + delta) {
        return Err(Error::Precondition(format!(
            "need f(x) > f(x_bar) + Delta, got {fx} <= {fbar} + {delta}"
        )));
    }
    let sg = f.subgradient_unchecked(x);
    let norm = sg.subgrad.norm();
    if sg.zero_flag || norm == 0.0 {
        return Err(Error::Precondition(
            "zero subgradient at x, so x_bar is not a constrained minimizer".into(),
        ));
    }
    let y = op.apply_unchecked(&(x - &sg.subgrad * (alpha / norm)));
    let lhs = (&y - x_bar).norm_squared();
    let rhs = (x - x_bar).norm_squared() - 2.0 * alpha * delta / (4.0 * l_bar) + alpha * alpha;
    Ok(DescentCheck { holds: rhs - lhs >= -DESCENT_SLACK, lhs, rhs, y })
}
