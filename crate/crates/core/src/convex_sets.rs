//! Closed convex sets with closed-form metric projections.
//!
//! Every variant is nonempty, closed and convex, so the projection onto it is
//! single-valued and firmly nonexpansive. Sets are immutable once built.

use crate::error::{check_dim, Error, Result};
use crate::Vector;

/// `{x : a·x ≤ b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    a: Vector,
    b: f64,
    a_norm_sq: f64,
}

/// `{x : a·x = b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    a: Vector,
    b: f64,
    a_norm_sq: f64,
}

/// Axis-aligned box `lo ≤ x ≤ hi`. Degenerate axes (`lo_j = hi_j`) are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lo: Vector,
    hi: Vector,
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vector,
    radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Halfspace(Halfspace),
    Box(BoxSet),
    Ball(Ball),
    Hyperplane(Hyperplane),
}

fn check_finite(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries")))
    }
}

fn normal(a: Vector, b: f64, what: &str) -> Result<(Vector, f64, f64)> {
    if a.is_empty() {
        return Err(Error::InvalidInput(format!("{what} normal has dimension 0")));
    }
    check_finite(&a, what)?;
    if !b.is_finite() {
        return Err(Error::InvalidInput(format!("{what} offset is not finite")));
    }
    let a_norm_sq = a.norm_squared();
    if a_norm_sq == 0.0 {
        return Err(Error::InvalidInput(format!("{what} normal must be nonzero")));
    }
    Ok((a, b, a_norm_sq))
}

impl Halfspace {
    pub fn new(a: Vector, b: f64) -> Result<Self> {
        let (a, b, a_norm_sq) = normal(a, b, "halfspace")?;
        Ok(Self { a, b, a_norm_sq })
    }

    pub fn normal(&self) -> &Vector {
        &self.a
    }

    pub fn offset(&self) -> f64 {
        self.b
    }
}

impl Hyperplane {
    pub fn new(a: Vector, b: f64) -> Result<Self> {
        let (a, b, a_norm_sq) = normal(a, b, "hyperplane")?;
        Ok(Self { a, b, a_norm_sq })
    }

    pub fn normal(&self) -> &Vector {
        &self.a
    }

    pub fn offset(&self) -> f64 {
        self.b
    }
}

impl BoxSet {
    pub fn new(lo: Vector, hi: Vector) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::InvalidInput("box has dimension 0".into()));
        }
        check_dim(lo.len(), hi.len())?;
        check_finite(&lo, "box lower bound")?;
        check_finite(&hi, "box upper bound")?;
        if let Some(j) = (0..lo.len()).find(|&j| lo[j] > hi[j]) {
            return Err(Error::InvalidInput(format!(
                "box requires lo <= hi, violated on axis {j}: {} > {}",
                lo[j], hi[j]
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> &Vector {
        &self.lo
    }

    pub fn hi(&self) -> &Vector {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Largest Euclidean norm over the box, attained at a corner.
    pub fn max_norm(&self) -> f64 {
        self.lo
            .iter()
            .zip(self.hi.iter())
            .map(|(l, h)| l.abs().max(h.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Corners of the box in lexicographic bit order; degenerate axes are not
    /// deduplicated.
    pub fn corners(&self) -> Vec<Vector> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                Vector::from_fn(n, |j, _| {
                    if mask >> j & 1 == 1 {
                        self.hi[j]
                    } else {
                        self.lo[j]
                    }
                })
            })
            .collect()
    }

    fn clamp(&self, x: &Vector) -> Vector {
        Vector::from_fn(x.len(), |j, _| x[j].clamp(self.lo[j], self.hi[j]))
    }
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidInput("ball has dimension 0".into()));
        }
        check_finite(&center, "ball center")?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl ConvexSet {
    pub fn halfspace(a: Vector, b: f64) -> Result<Self> {
        Halfspace::new(a, b).map(Self::Halfspace)
    }

    pub fn hyperplane(a: Vector, b: f64) -> Result<Self> {
        Hyperplane::new(a, b).map(Self::Hyperplane)
    }

    pub fn boxed(lo: Vector, hi: Vector) -> Result<Self> {
        BoxSet::new(lo, hi).map(Self::Box)
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        Ball::new(center, radius).map(Self::Ball)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Halfspace(h) => h.a.len(),
            Self::Hyperplane(h) => h.a.len(),
            Self::Box(b) => b.dim(),
            Self::Ball(b) => b.center.len(),
        }
    }

    /// Nearest point of the set to `x`.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: &Vector) -> Vector {
        match self {
            Self::Halfspace(h) => {
                let excess = h.a.dot(x) - h.b;
                if excess <= 0.0 {
                    x.clone()
                } else {
                    x - &h.a * (excess / h.a_norm_sq)
                }
            }
            Self::Hyperplane(h) => {
                let excess = h.a.dot(x) - h.b;
                x - &h.a * (excess / h.a_norm_sq)
            }
            Self::Box(b) => b.clamp(x),
            Self::Ball(b) => {
                let offset = x - &b.center;
                let dist = offset.norm();
                if dist <= b.radius {
                    x.clone()
                } else {
                    &b.center + offset * (b.radius / dist)
                }
            }
        }
    }

    /// Membership with an explicit slack on the defining relation.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        if !(tol >= 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be >= 0, got {tol}")));
        }
        Ok(self.contains_unchecked(x, tol))
    }

    pub(crate) fn contains_unchecked(&self, x: &Vector, tol: f64) -> bool {
        match self {
            Self::Halfspace(h) => h.a.dot(x) - h.b <= tol,
            Self::Hyperplane(h) => (h.a.dot(x) - h.b).abs() <= tol,
            Self::Box(b) => (0..x.len()).all(|j| x[j] >= b.lo[j] - tol && x[j] <= b.hi[j] + tol),
            Self::Ball(b) => (x - &b.center).norm() <= b.radius + tol,
        }
    }

    /// `‖x − P(x)‖`; exactly zero whenever `x` satisfies the defining relation.
    pub fn distance(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.distance_unchecked(x))
    }

    pub(crate) fn distance_unchecked(&self, x: &Vector) -> f64 {
        if self.contains_unchecked(x, 0.0) {
            return 0.0;
        }
        match self {
            Self::Halfspace(h) => (h.a.dot(x) - h.b) / h.a_norm_sq.sqrt(),
            Self::Hyperplane(h) => (h.a.dot(x) - h.b).abs() / h.a_norm_sq.sqrt(),
            Self::Ball(b) => (x - &b.center).norm() - b.radius,
            Self::Box(_) => (x - self.project_unchecked(x)).norm(),
        }
    }
}

/// Constraint data: sets `C_1..C_m` with proximity weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintFamily {
    sets: Vec<ConvexSet>,
    weights: Vec<f64>,
}

pub const WEIGHT_SUM_TOL: f64 = 1e-12;

pub(crate) fn validate_weights(weights: &[f64], what: &str) -> Result<()> {
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "{what} weights must be finite and >= 0, got {w}"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidInput(format!(
            "{what} weights must sum to 1 (within {WEIGHT_SUM_TOL:e}), got {sum}"
        )));
    }
    Ok(())
}

impl ConstraintFamily {
    pub fn new(sets: Vec<ConvexSet>, weights: Vec<f64>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::InvalidInput("constraint family needs at least one set".into()));
        }
        if sets.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} sets but {} weights",
                sets.len(),
                weights.len()
            )));
        }
        let n = sets[0].dim();
        for s in &sets[1..] {
            check_dim(n, s.dim())?;
        }
        validate_weights(&weights, "constraint")?;
        Ok(Self { sets, weights })
    }

    /// Equal weights `1/m`.
    pub fn uniform(sets: Vec<ConvexSet>) -> Result<Self> {
        let m = sets.len().max(1);
        let weights = vec![1.0 / m as f64; sets.len()];
        Self::new(sets, weights)
    }

    pub fn sets(&self) -> &[ConvexSet] {
        &self.sets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.sets[0].dim()
    }

    pub fn contains_all(&self, x: &Vector, tol: f64) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        Ok(self.sets.iter().all(|s| s.contains_unchecked(x, tol)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn halfspace_projection() {
        let h = ConvexSet::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        assert_eq!(h.project(&v(&[2.0, 3.0])).unwrap(), v(&[0.0, 3.0]));
    }

    #[test]
    fn box_interior_is_fixed() {
        let b = ConvexSet::boxed(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        assert_eq!(b.project(&v(&[0.4, 0.6])).unwrap(), v(&[0.4, 0.6]));
    }

    #[test]
    fn ball_radial_rescaling() {
        let b = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        let p = b.project(&v(&[3.0, 4.0])).unwrap();
        assert!((p - v(&[0.6, 0.8])).norm() < 1e-15);
    }

    #[test]
    fn membership_examples() {
        let b = ConvexSet::boxed(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        assert!(b.contains(&v(&[1.0000000001, 0.5]), 1e-9).unwrap());
        let h = ConvexSet::halfspace(v(&[1.0, 1.0]), 2.0).unwrap();
        assert!(!h.contains(&v(&[2.0, 2.0]), 0.0).unwrap());
        let ball = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        assert!(ball.contains(&v(&[0.0, 0.0]), 0.0).unwrap());
    }

    #[test]
    fn distance_examples() {
        let b = ConvexSet::boxed(v(&[0.0]), v(&[1.0])).unwrap();
        assert_eq!(b.distance(&v(&[3.0])).unwrap(), 2.0);
        assert_eq!(b.distance(&v(&[0.3])).unwrap(), 0.0);
        let hp = ConvexSet::hyperplane(v(&[1.0, 1.0]), 0.0).unwrap();
        assert!((hp.distance(&v(&[1.0, 1.0])).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_box_clamps_to_slab() {
        let b = ConvexSet::boxed(v(&[1.0, 0.0]), v(&[1.0, 2.0])).unwrap();
        assert_eq!(b.project(&v(&[-4.0, 3.0])).unwrap(), v(&[1.0, 2.0]));
    }

    #[test]
    fn invalid_constructions() {
        assert!(ConvexSet::halfspace(v(&[0.0, 0.0]), 1.0).is_err());
        assert!(ConvexSet::hyperplane(v(&[0.0]), 1.0).is_err());
        assert!(ConvexSet::boxed(v(&[1.0]), v(&[0.0])).is_err());
        assert!(ConvexSet::ball(v(&[0.0]), 0.0).is_err());
        assert!(ConvexSet::ball(v(&[f64::NAN]), 1.0).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let b = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(
            b.project(&v(&[1.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        );
        assert!(b.contains(&v(&[1.0, 2.0, 3.0]), 0.0).is_err());
        assert!(b.distance(&v(&[1.0])).is_err());
    }

    #[test]
    fn negative_tolerance_rejected() {
        let b = ConvexSet::ball(v(&[0.0]), 1.0).unwrap();
        assert!(b.contains(&v(&[0.0]), -1.0).is_err());
    }

    #[test]
    fn family_weights_validated() {
        let s = || ConvexSet::boxed(v(&[0.0]), v(&[1.0])).unwrap();
        assert!(ConstraintFamily::new(vec![s(), s()], vec![0.5, 0.4]).is_err());
        assert!(ConstraintFamily::new(vec![s(), s()], vec![1.5, -0.5]).is_err());
        assert!(ConstraintFamily::new(vec![s()], vec![0.5, 0.5]).is_err());
        assert!(ConstraintFamily::new(vec![], vec![]).is_err());
        let fam = ConstraintFamily::uniform(vec![s(), s(), s()]).unwrap();
        assert_eq!(fam.len(), 3);
    }

    #[test]
    fn corners_cover_box() {
        let b = BoxSet::new(v(&[-1.0, 0.0]), v(&[2.0, 3.0])).unwrap();
        let c = b.corners();
        assert_eq!(c.len(), 4);
        assert!(c.contains(&v(&[2.0, 3.0])));
        assert!((b.max_norm() - 13f64.sqrt()).abs() < 1e-15);
    }
}
