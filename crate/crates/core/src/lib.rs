//! Data-compatible solutions of constrained convex minimization.
//!
//! Minimizes a convex function over the fixed-point set of a nonexpansive
//! operator built from metric projections, and certifies a finite output: the
//! first iterate within `τ` of the solution set whose value exceeds the
//! constrained minimum by at most `τ·L̄`.
//!
//! Modules:
//! * [`convex_sets`]: halfspaces, boxes, balls, hyperplanes and their projections.
//! * [`operators`]: projections, string products, string averages, simultaneous projection.
//! * [`objectives`]: convex objectives with subgradient oracles and Lipschitz bounds.
//! * [`compatibility`]: proximity, γ- and (τ,L̄)-compatibility, the OUT index.
//! * [`solvers`]: the hybrid subgradient iterations and the one-step descent diagnostic.
//! * [`oracle`]: brute-force grid ground truth for dimensions up to 3.

// Validators write `!(x > bound)` so that NaN is rejected along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compatibility;
pub mod convex_sets;
pub mod error;
pub mod exec;
pub mod objectives;
pub mod operators;
pub mod oracle;
pub mod solvers;

pub use compatibility::{
    gamma_compatible, out_index, prox_value, tau_l_compatible, Certifier, CompatCheck,
    CompatCriteria, CompatReport,
};
pub use convex_sets::{Ball, BoxSet, ConstraintFamily, ConvexSet, Halfspace, Hyperplane};
pub use error::{Error, Result};
pub use exec::Execution;
pub use objectives::{AffineRow, Objective, SubgradientResult};
pub use operators::{Operator, OperatorSpec, Perturbation, StringLayout};
pub use oracle::{GridMinimum, GridSpec, OracleResult, ProxMinimum, SweepOptions};
pub use solvers::{
    descent_check, hsasm_run, hsm_run, hsm_step, hspsm_run, run, run_many, DescentCheck,
    Iterates, ProblemInstance, RunResult, SolverKind, StepSchedule, TraceRow,
};

/// Points of the ambient Euclidean space.
pub type Vector = nalgebra::DVector<f64>;
