//! Convex target functions with value and subgradient oracles.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::convex_sets::BoxSet;
use crate::error::{check_dim, Error, Result};
use crate::Vector;

/// Rows within this distance of the maximum count as active.
pub const ACTIVE_TOL: f64 = 1e-12;

/// The returned Lipschitz constant is never below this value.
pub const LIPSCHITZ_FLOOR: f64 = 1.0 + 1e-6;

/// Above this dimension the quadratic bound switches from corner enumeration
/// to `‖Q‖₂·R + ‖c‖`.
const MAX_CORNER_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct AffineRow {
    pub a: Vector,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `½ xᵀQx + cᵀx + d` with `Q` symmetric positive semidefinite.
    Quadratic { q: DMatrix<f64>, c: Vector, d: f64 },
    Linear { c: Vector, d: f64 },
    /// `‖x − p‖`.
    NormDistance { p: Vector },
    /// `max_j (a_j·x + b_j)`.
    AffineMax { rows: Vec<AffineRow> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientResult {
    pub value: f64,
    pub subgrad: Vector,
    /// True iff `0 ∈ ∂f(x)` was certified.
    pub zero_flag: bool,
}

fn finite(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries")))
    }
}

impl Objective {
    pub fn quadratic(q: DMatrix<f64>, c: Vector, d: f64) -> Result<Self> {
        let n = c.len();
        if n == 0 || q.nrows() != n || q.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "quadratic needs an {n}x{n} matrix, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        if !q.iter().all(|x| x.is_finite()) || !d.is_finite() {
            return Err(Error::InvalidInput("quadratic has non-finite entries".into()));
        }
        finite(&c, "quadratic linear term")?;
        let scale = q.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (q[(i, j)] - q[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidInput(format!(
                        "Q must be symmetric: Q[{i}][{j}] != Q[{j}][{i}]"
                    )));
                }
            }
        }
        let min_eig = SymmetricEigen::new(q.clone()).eigenvalues.min();
        if min_eig < -1e-10 * scale {
            return Err(Error::InvalidInput(format!(
                "Q must be positive semidefinite, smallest eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self::Quadratic { q, c, d })
    }

    pub fn linear(c: Vector, d: f64) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::InvalidInput("linear objective has dimension 0".into()));
        }
        finite(&c, "linear objective")?;
        Ok(Self::Linear { c, d })
    }

    pub fn norm_distance(p: Vector) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidInput("norm-distance anchor has dimension 0".into()));
        }
        finite(&p, "norm-distance anchor")?;
        Ok(Self::NormDistance { p })
    }

    pub fn affine_max(rows: Vec<AffineRow>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidInput("affine max needs at least one row".into()));
        };
        let n = first.a.len();
        if n == 0 {
            return Err(Error::InvalidInput("affine max rows have dimension 0".into()));
        }
        for r in &rows {
            check_dim(n, r.a.len())?;
            finite(&r.a, "affine max row")?;
            if !r.b.is_finite() {
                return Err(Error::InvalidInput("affine max offset is not finite".into()));
            }
        }
        Ok(Self::AffineMax { rows })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Quadratic { c, .. } | Self::Linear { c, .. } => c.len(),
            Self::NormDistance { p } => p.len(),
            Self::AffineMax { rows } => rows[0].a.len(),
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self, Self::Quadratic { .. } | Self::Linear { .. })
    }

    pub fn evaluate(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &Vector) -> f64 {
        match self {
            Self::Quadratic { q, c, d } => 0.5 * x.dot(&(q * x)) + c.dot(x) + d,
            Self::Linear { c, d } => c.dot(x) + d,
            Self::NormDistance { p } => (x - p).norm(),
            Self::AffineMax { rows } => rows
                .iter()
                .map(|r| r.a.dot(x) + r.b)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn subgradient(&self, x: &Vector) -> Result<SubgradientResult> {
        check_dim(self.dim(), x.len())?;
        Ok(self.subgradient_unchecked(x))
    }

    pub(crate) fn subgradient_unchecked(&self, x: &Vector) -> SubgradientResult {
        match self {
            Self::Quadratic { q, c, d } => {
                let qx = q * x;
                let value = 0.5 * x.dot(&qx) + c.dot(x) + d;
                let g = qx + c;
                let zero_flag = g.iter().all(|v| *v == 0.0);
                SubgradientResult { value, subgrad: g, zero_flag }
            }
            Self::Linear { c, d } => SubgradientResult {
                value: c.dot(x) + d,
                subgrad: c.clone(),
                zero_flag: c.iter().all(|v| *v == 0.0),
            },
            Self::NormDistance { p } => {
                let diff = x - p;
                let dist = diff.norm();
                if dist == 0.0 {
                    SubgradientResult {
                        value: 0.0,
                        subgrad: Vector::zeros(x.len()),
                        zero_flag: true,
                    }
                } else {
                    SubgradientResult { value: dist, subgrad: diff / dist, zero_flag: false }
                }
            }
            Self::AffineMax { rows } => {
                let vals: Vec<f64> = rows.iter().map(|r| r.a.dot(x) + r.b).collect();
                let value = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let active: Vec<&Vector> = rows
                    .iter()
                    .zip(&vals)
                    .filter(|(_, v)| **v >= value - ACTIVE_TOL)
                    .map(|(r, _)| &r.a)
                    .collect();
                let subgrad = active[0].clone();
                let zero_flag = zero_in_hull(&active, x.len());
                let subgrad = if zero_flag { Vector::zeros(x.len()) } else { subgrad };
                SubgradientResult { value, subgrad, zero_flag }
            }
        }
    }

    /// A constant `L̄ > 1` with `|f(z¹) − f(z²)| ≤ L̄ ‖z¹ − z²‖` on the box.
    pub fn lipschitz_bound(&self, region: &BoxSet) -> f64 {
        let analytic = match self {
            Self::Quadratic { q, c, .. } => {
                if region.dim() <= MAX_CORNER_DIM {
                    // ‖Qx + c‖ is convex, so its maximum over the box is at a corner.
                    region
                        .corners()
                        .iter()
                        .map(|z| (q * z + c).norm())
                        .fold(0.0, f64::max)
                } else {
                    let spectral = SymmetricEigen::new(q.clone()).eigenvalues.amax();
                    spectral * region.max_norm() + c.norm()
                }
            }
            Self::Linear { c, .. } => c.norm(),
            Self::NormDistance { .. } => 1.0,
            Self::AffineMax { rows } => rows.iter().map(|r| r.a.norm()).fold(0.0, f64::max),
        };
        analytic.max(LIPSCHITZ_FLOOR)
    }
}

/// Decides `0 ∈ conv(points)`.
///
/// Exact up to rounding for `n ≤ 3`, via enumeration of affinely independent
/// subsets of size `≤ n+1`. For larger `n` only a zero active gradient is
/// detected, which can give false negatives but never false positives.
fn zero_in_hull(points: &[&Vector], n: usize) -> bool {
    if points.iter().any(|p| p.iter().all(|v| *v == 0.0)) {
        return true;
    }
    if n > 3 || points.len() < 2 {
        return false;
    }
    let scale = points.iter().map(|p| p.amax()).fold(1.0, f64::max);
    let tol = 1e-12 * scale;
    let k = points.len();
    let max_size = (n + 1).min(k);
    let mut subset = Vec::with_capacity(max_size);
    (2..=max_size).any(|size| any_subset(k, size, 0, &mut subset, &mut |idx| {
        simplex_contains_origin(points, idx, n, tol)
    }))
}

fn any_subset(
    k: usize,
    size: usize,
    start: usize,
    current: &mut Vec<usize>,
    test: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if current.len() == size {
        return test(current);
    }
    for i in start..k {
        current.push(i);
        let hit = any_subset(k, size, i + 1, current, test);
        current.pop();
        if hit {
            return true;
        }
    }
    false
}

/// Solves `Σ λ_i p_i = 0, Σ λ_i = 1` in least squares and accepts a
/// nonnegative exact solution.
fn simplex_contains_origin(points: &[&Vector], idx: &[usize], n: usize, tol: f64) -> bool {
    let s = idx.len();
    let mut m = DMatrix::<f64>::zeros(n + 1, s);
    for (col, &i) in idx.iter().enumerate() {
        for r in 0..n {
            m[(r, col)] = points[i][r];
        }
        m[(n, col)] = 1.0;
    }
    let mut rhs = Vector::zeros(n + 1);
    rhs[n] = 1.0;
    let svd = m.clone().svd(true, true);
    let Ok(lambda) = svd.solve(&rhs, 1e-14) else {
        return false;
    };
    let residual = (&m * &lambda - rhs).norm();
    residual <= tol && lambda.iter().all(|l| *l >= -1e-12)
}
