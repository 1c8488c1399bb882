//! Brute-force ground truth on desk-scale instances (dimension ≤ 3).
//!
//! Exhaustive grid sweeps give representatives of `SOL(f, C)`,
//! `S(f, Π(Γ,γ))`, `Fix(P_w)` and the minimum proximity `γ*`. Sweeps are
//! chunked and min-reduced, so results do not depend on the execution
//! strategy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::compatibility::prox_value_unchecked;
use crate::convex_sets::{BoxSet, ConstraintFamily};
use crate::error::{check_dim, Error, Result};
use crate::exec::Execution;
use crate::objectives::Objective;
use crate::operators::OperatorSpec;
use crate::solvers::ProblemInstance;
use crate::Vector;

pub const MAX_GRID_DIM: usize = 3;
pub const MAX_GRID_POINTS: usize = 100_000_000;
const CHUNK: usize = 1 << 14;

/// Regular grid over a box. Each axis is split into the fewest equal cells of
/// width at most `h`; both endpoints are grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    region: BoxSet,
    h: f64,
    cells: Vec<usize>,
}

impl GridSpec {
    pub fn new(region: BoxSet, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(format!("grid resolution must be > 0, got {h}")));
        }
        if region.dim() > MAX_GRID_DIM {
            return Err(Error::InvalidInput(format!(
                "grid oracle is limited to dimension <= {MAX_GRID_DIM}, got {}",
                region.dim()
            )));
        }
        let cells: Vec<usize> = (0..region.dim())
            .map(|j| {
                let width = region.hi()[j] - region.lo()[j];
                if width == 0.0 {
                    0
                } else {
                    ((width / h) - 1e-9).ceil().max(1.0) as usize
                }
            })
            .collect();
        let total = cells
            .iter()
            .try_fold(1usize, |acc, c| acc.checked_mul(c + 1))
            .filter(|t| *t <= MAX_GRID_POINTS);
        if total.is_none() {
            return Err(Error::InvalidInput(format!(
                "grid exceeds {MAX_GRID_POINTS} points; increase h"
            )));
        }
        Ok(Self { region, h, cells })
    }

    pub fn region(&self) -> &BoxSet {
        &self.region
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    pub fn len(&self) -> usize {
        self.cells.iter().map(|c| c + 1).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Actual cell width along each axis (≤ `h`).
    pub fn spacing(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|j| {
                if self.cells[j] == 0 {
                    0.0
                } else {
                    (self.region.hi()[j] - self.region.lo()[j]) / self.cells[j] as f64
                }
            })
            .collect()
    }

    /// Half the cell diagonal: every point of the box is this close to a grid point.
    pub fn cell_radius(&self) -> f64 {
        0.5 * self.spacing().iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    /// Grid point with flat index `idx`; the last axis varies fastest.
    pub fn point(&self, mut idx: usize) -> Vector {
        let n = self.dim();
        let mut x = Vector::zeros(n);
        for j in (0..n).rev() {
            let c = self.cells[j];
            let i = idx % (c + 1);
            idx /= c + 1;
            let (lo, hi) = (self.region.lo()[j], self.region.hi()[j]);
            x[j] = if c == 0 {
                lo
            } else if i == c {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / c as f64)
            };
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMinimum {
    pub min_value: f64,
    /// Feasible grid points with value within the tolerance of the minimum, in
    /// grid order.
    pub argmin: Vec<Vector>,
    pub value_tol: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Value tolerance for the representative set; `None` uses `h·L̄`.
    pub value_tol: Option<f64>,
    pub exec: Execution,
}

fn chunks(len: usize) -> usize {
    len.div_ceil(CHUNK)
}

/// Minimum of `value` over grid points passing `feasible`, and all feasible
/// points within `tol` of it.
fn sweep<V, F>(grid: &GridSpec, value: V, feasible: F, tol: f64, exec: Execution) -> Result<(f64, Vec<Vector>)>
where
    V: Fn(&Vector) -> f64 + Sync + Send,
    F: Fn(&Vector) -> bool + Sync + Send,
{
    let len = grid.len();
    let range = |c: usize| c * CHUNK..((c + 1) * CHUNK).min(len);
    let min = exec
        .map_range(chunks(len), |c| {
            range(c)
                .map(|i| grid.point(i))
                .filter(|x| feasible(x))
                .map(|x| value(&x))
                .fold(f64::INFINITY, f64::min)
        })
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::EmptyFeasible);
    }
    let level = min + tol;
    let argmin = exec
        .map_range(chunks(len), |c| {
            range(c)
                .map(|i| grid.point(i))
                .filter(|x| feasible(x) && value(x) <= level)
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect();
    Ok((min, argmin))
}

pub fn grid_minimize<F>(f: &Objective, feasible: F, grid: &GridSpec) -> Result<GridMinimum>
where
    F: Fn(&Vector) -> bool + Sync + Send,
{
    grid_minimize_with(f, feasible, grid, SweepOptions::default())
}

pub fn grid_minimize_with<F>(
    f: &Objective,
    feasible: F,
    grid: &GridSpec,
    opts: SweepOptions,
) -> Result<GridMinimum>
where
    F: Fn(&Vector) -> bool + Sync + Send,
{
    check_dim(grid.dim(), f.dim())?;
    let value_tol = opts
        .value_tol
        .unwrap_or_else(|| grid.h() * f.lipschitz_bound(grid.region()));
    let (min_value, argmin) =
        sweep(grid, |x| f.evaluate_unchecked(x), feasible, value_tol, opts.exec)?;
    Ok(GridMinimum { min_value, argmin, value_tol })
}

/// Value tolerance for the proximity argmin. `Prox` has a 1-Lipschitz
/// gradient, so the grid point nearest a true minimizer exceeds `γ*` by at
/// most `½ r²` with `r` the cell radius.
pub fn prox_tolerance(grid: &GridSpec) -> f64 {
    0.5 * grid.cell_radius().powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxMinimum {
    pub gamma_star: f64,
    pub argmin: Vec<Vector>,
}

pub fn grid_prox_min(family: &ConstraintFamily, grid: &GridSpec) -> Result<ProxMinimum> {
    grid_prox_min_with(family, grid, Execution::default())
}

pub fn grid_prox_min_with(
    family: &ConstraintFamily,
    grid: &GridSpec,
    exec: Execution,
) -> Result<ProxMinimum> {
    check_dim(grid.dim(), family.dim())?;
    let (gamma_star, argmin) = sweep(
        grid,
        |x| prox_value_unchecked(family, x),
        |_| true,
        prox_tolerance(grid),
        exec,
    )?;
    Ok(ProxMinimum { gamma_star, argmin })
}

/// Largest difference quotient over sampled pairs. Box corners are always
/// sampled and paired with every random point.
pub fn lipschitz_estimate(f: &Objective, region: &BoxSet, samples: usize, seed: u64) -> Result<f64> {
    lipschitz_estimate_with(f, region, samples, seed, Execution::default())
}

pub fn lipschitz_estimate_with(
    f: &Objective,
    region: &BoxSet,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64> {
    check_dim(region.dim(), f.dim())?;
    if samples < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 samples, got {samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = region.dim();
    let random: Vec<Vector> = (0..samples)
        .map(|_| {
            Vector::from_fn(n, |j, _| {
                let (lo, hi) = (region.lo()[j], region.hi()[j]);
                lo + (hi - lo) * rng.random::<f64>()
            })
        })
        .collect();
    let corners = region.corners();
    let quotient = |a: &Vector, b: &Vector| {
        let d = (a - b).norm();
        if d == 0.0 {
            0.0
        } else {
            (f.evaluate_unchecked(a) - f.evaluate_unchecked(b)).abs() / d
        }
    };
    let per_point = exec.map_range(samples, |i| {
        let z = &random[i];
        let chained = quotient(z, &random[(i + 1) % samples]);
        corners.iter().map(|c| quotient(z, c)).fold(chained, f64::max)
    });
    let corner_pairs = corners
        .iter()
        .enumerate()
        .flat_map(|(i, a)| corners[i + 1..].iter().map(move |b| (a, b)))
        .map(|(a, b)| quotient(a, b))
        .fold(0.0, f64::max);
    Ok(per_point.into_iter().fold(corner_pairs, f64::max))
}

/// Ground truth for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub gamma_star: f64,
    /// Proximity level used for feasibility; `None` means the tested set was
    /// the intersection of the operator's sets.
    pub feasibility_level: Option<f64>,
    pub min_value: f64,
    pub reference: Vec<Vector>,
    pub l_bar: f64,
}

/// Representatives of the solution set the instance's operator targets.
///
/// * `gamma = None` with a simultaneous operator: `S(f, Π(Γ, γ*))`, i.e.
///   `SOL(f, Fix(P_w))`, with `γ*` from the grid.
/// * `gamma = Some(g)` with `g > 0`: `S(f, Π(Γ, g))`.
/// * otherwise: `SOL(f, ∩ C_i)` over the sets the operator references,
///   with membership relaxed by one cell radius.
pub fn solution_reference(
    instance: &ProblemInstance,
    h: f64,
    gamma: Option<f64>,
    opts: SweepOptions,
) -> Result<OracleResult> {
    let grid = GridSpec::new(instance.ambient().clone(), h)?;
    let family = instance.family();
    let f = instance.objective();
    let prox = grid_prox_min_with(family, &grid, opts.exec)?;
    let prox_tol = prox_tolerance(&grid);
    let simultaneous = matches!(instance.operator().spec(), OperatorSpec::Simultaneous { .. });
    let level = match gamma {
        None if simultaneous => Some(prox.gamma_star + prox_tol),
        Some(g) if g > 0.0 => Some(g + prox_tol),
        Some(g) if g < 0.0 => {
            return Err(Error::Configuration(format!("gamma must be >= 0, got {g}")))
        }
        _ => None,
    };
    let min = match level {
        Some(level) => grid_minimize_with(
            f,
            |x| prox_value_unchecked(family, x) <= level,
            &grid,
            opts,
        )?,
        None => {
            let sets = instance.operator().spec().referenced_sets(family.len());
            let radius = grid.cell_radius();
            grid_minimize_with(
                f,
                |x| sets.iter().all(|&i| family.sets()[i].distance_unchecked(x) <= radius),
                &grid,
                opts,
            )?
        }
    };
    Ok(OracleResult {
        gamma_star: prox.gamma_star,
        feasibility_level: level,
        min_value: min.min_value,
        reference: min.argmin,
        l_bar: instance.lipschitz_bound(),
    })
}
