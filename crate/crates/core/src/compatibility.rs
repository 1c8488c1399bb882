//! Proximity, γ-compatibility, (τ,L̄)-compatibility and the OUT rule.
//!
//! The solution set `S(f, Π(Γ,γ))` is represented by a finite set of points
//! supplied by the oracle; distances and the value gap are measured against
//! that set.

use crate::convex_sets::ConstraintFamily;
use crate::error::{check_dim, Error, Result};
use crate::exec::Execution;
use crate::objectives::Objective;
use crate::Vector;

/// `½ Σ w_i ‖P_{C_i}(x) − x‖²`.
pub fn prox_value(family: &ConstraintFamily, x: &Vector) -> Result<f64> {
    check_dim(family.dim(), x.len())?;
    Ok(prox_value_unchecked(family, x))
}

pub(crate) fn prox_value_unchecked(family: &ConstraintFamily, x: &Vector) -> f64 {
    0.5 * family
        .sets()
        .iter()
        .zip(family.weights())
        .filter(|(_, w)| **w != 0.0)
        .map(|(c, w)| w * c.distance_unchecked(x).powi(2))
        .sum::<f64>()
}

/// Membership in `Π(Γ,γ)`.
pub fn gamma_compatible(family: &ConstraintFamily, x: &Vector, gamma: f64) -> Result<bool> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidInput(format!("gamma must be >= 0, got {gamma}")));
    }
    Ok(prox_value(family, x)? <= gamma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatCriteria {
    pub gamma: f64,
    pub tau: f64,
    pub l_bar: f64,
    /// Representatives of the constrained solution set.
    pub reference: Vec<Vector>,
}

impl CompatCriteria {
    pub fn new(gamma: f64, tau: f64, l_bar: f64, reference: Vec<Vector>) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Configuration(format!("gamma must be >= 0, got {gamma}")));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::Configuration(format!("tau must be >= 0, got {tau}")));
        }
        if !(l_bar > 1.0 && l_bar.is_finite()) {
            return Err(Error::Configuration(format!("L_bar must be > 1, got {l_bar}")));
        }
        Ok(Self { gamma, tau, l_bar, reference })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatCheck {
    pub holds: bool,
    pub dist_to_s: f64,
    pub f_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatReport {
    /// First compatible index of the sequence, if any.
    pub out_index: Option<usize>,
    pub dist_to_s: f64,
    pub f_gap: f64,
    pub prox: f64,
}

/// Criteria bound to an objective, with the reference minimum cached.
#[derive(Debug, Clone)]
pub struct Certifier<'a> {
    criteria: &'a CompatCriteria,
    objective: &'a Objective,
    f_min: f64,
}

impl<'a> Certifier<'a> {
    pub fn new(criteria: &'a CompatCriteria, objective: &'a Objective) -> Result<Self> {
        if criteria.reference.is_empty() {
            return Err(Error::Configuration("reference solution set is empty".into()));
        }
        for z in &criteria.reference {
            check_dim(objective.dim(), z.len())?;
        }
        let f_min = criteria
            .reference
            .iter()
            .map(|z| objective.evaluate_unchecked(z))
            .fold(f64::INFINITY, f64::min);
        Ok(Self { criteria, objective, f_min })
    }

    pub fn criteria(&self) -> &CompatCriteria {
        self.criteria
    }

    pub fn reference_min(&self) -> f64 {
        self.f_min
    }

    pub fn check(&self, x: &Vector) -> Result<CompatCheck> {
        check_dim(self.objective.dim(), x.len())?;
        Ok(self.check_unchecked(x))
    }

    pub(crate) fn check_unchecked(&self, x: &Vector) -> CompatCheck {
        let dist_to_s = self
            .criteria
            .reference
            .iter()
            .map(|z| (x - z).norm_squared())
            .fold(f64::INFINITY, f64::min)
            .sqrt();
        let f_gap = self.objective.evaluate_unchecked(x) - self.f_min;
        let tau = self.criteria.tau;
        let holds = dist_to_s <= tau && f_gap <= tau * self.criteria.l_bar;
        CompatCheck { holds, dist_to_s, f_gap }
    }

    /// Smallest `K` whose iterate is compatible.
    pub fn out_index(&self, trace: &[Vector], exec: Execution) -> Result<Option<usize>> {
        if let Some(x) = trace.iter().find(|x| x.len() != self.objective.dim()) {
            return Err(Error::DimensionMismatch { expected: self.objective.dim(), found: x.len() });
        }
        Ok(exec.position_first(trace.len(), |k| self.check_unchecked(&trace[k]).holds))
    }
}

/// Both compatibility conditions at `x`, with the measured quantities.
pub fn tau_l_compatible(x: &Vector, criteria: &CompatCriteria, f: &Objective) -> Result<CompatCheck> {
    Certifier::new(criteria, f)?.check(x)
}

pub fn out_index(trace: &[Vector], criteria: &CompatCriteria, f: &Objective) -> Result<Option<usize>> {
    Certifier::new(criteria, f)?.out_index(trace, Execution::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_sets::ConvexSet;
    use nalgebra::DMatrix;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn two_intervals() -> ConstraintFamily {
        ConstraintFamily::uniform(vec![
            ConvexSet::boxed(v(&[0.0]), v(&[1.0])).unwrap(),
            ConvexSet::boxed(v(&[2.0]), v(&[3.0])).unwrap(),
        ])
        .unwrap()
    }

    /// (x − 3)² expressed as ½·2x² − 6x + 9.
    fn shifted_square() -> Objective {
        Objective::quadratic(DMatrix::from_element(1, 1, 2.0), v(&[-6.0]), 9.0).unwrap()
    }

    #[test]
    fn prox_examples() {
        assert_eq!(prox_value(&two_intervals(), &v(&[1.5])).unwrap(), 0.125);
        let hs = ConstraintFamily::new(
            vec![ConvexSet::halfspace(v(&[1.0, 0.0]), 0.0).unwrap()],
            vec![1.0],
        )
        .unwrap();
        assert_eq!(prox_value(&hs, &v(&[2.0, 2.0])).unwrap(), 2.0);
        let consistent = ConstraintFamily::uniform(vec![
            ConvexSet::boxed(v(&[0.0]), v(&[2.0])).unwrap(),
            ConvexSet::boxed(v(&[1.0]), v(&[3.0])).unwrap(),
        ])
        .unwrap();
        assert_eq!(prox_value(&consistent, &v(&[1.5])).unwrap(), 0.0);
    }

    #[test]
    fn gamma_examples() {
        let fam = two_intervals();
        assert!(gamma_compatible(&fam, &v(&[1.5]), 0.125).unwrap());
        assert!(!gamma_compatible(&fam, &v(&[1.5]), 0.1).unwrap());
        assert!(gamma_compatible(&fam, &v(&[1.5]), -1.0).is_err());
    }

    #[test]
    fn tau_l_examples() {
        let f = shifted_square();
        // L̄ = max |2(x − 3)| over [−2, 2].
        let crit = CompatCriteria::new(0.0, 0.05, 10.0, vec![v(&[1.0])]).unwrap();
        let at = tau_l_compatible(&v(&[1.0]), &crit, &f).unwrap();
        assert!(at.holds && at.dist_to_s == 0.0 && at.f_gap == 0.0);
        let near = tau_l_compatible(&v(&[0.99]), &crit, &f).unwrap();
        assert!(near.holds);
        assert!((near.dist_to_s - 0.01).abs() < 1e-12);
        assert!((near.f_gap - 0.0401).abs() < 1e-12);
        let far = tau_l_compatible(&v(&[0.8]), &crit, &f).unwrap();
        assert!(!far.holds);
        assert!((far.dist_to_s - 0.2).abs() < 1e-12);
    }

    #[test]
    fn empty_reference_is_configuration_error() {
        let crit = CompatCriteria::new(0.0, 0.05, 2.0, vec![]).unwrap();
        assert!(matches!(
            tau_l_compatible(&v(&[0.0]), &crit, &shifted_square()),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn out_index_examples() {
        let f = shifted_square();
        let crit = CompatCriteria::new(0.0, 0.05, 10.0, vec![v(&[1.0])]).unwrap();
        let mut trace: Vec<Vector> = (0..7).map(|k| v(&[-2.0 + 0.1 * k as f64])).collect();
        trace.extend([v(&[1.0]), v(&[0.0]), v(&[1.0])]);
        assert_eq!(out_index(&trace, &crit, &f).unwrap(), Some(7));
        assert_eq!(out_index(&trace[..7], &crit, &f).unwrap(), None);
        assert_eq!(out_index(&trace[7..], &crit, &f).unwrap(), Some(0));
    }

    #[test]
    fn criteria_validation() {
        assert!(CompatCriteria::new(-1.0, 0.1, 2.0, vec![]).is_err());
        assert!(CompatCriteria::new(0.0, 0.1, 1.0, vec![]).is_err());
        assert!(CompatCriteria::new(0.0, f64::NAN, 2.0, vec![]).is_err());
    }
}
