//! Randomized instances with closed-form constrained minimizers.
//!
//! Every case uses a box constraint `C ⊆ Y = [−2, 2]ⁿ` and an objective whose
//! minimizer over `C` is known exactly, so `x̄` needs no oracle.

#![allow(dead_code)]

use datacompat::{AffineRow, BoxSet, ConvexSet, Objective, Operator, OperatorSpec, Vector};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const VARIANTS: [&str; 4] = ["quadratic", "linear", "norm_distance", "affine_max"];

pub struct DescentCase {
    pub variant: &'static str,
    pub x: Vector,
    pub x_bar: Vector,
    pub delta: f64,
    pub alpha: f64,
    pub f: Objective,
    pub op: Operator,
    pub l_bar: f64,
    pub m_radius: f64,
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn point_in(rng: &mut ChaCha8Rng, b: &BoxSet) -> Vector {
    Vector::from_fn(b.dim(), |j, _| uniform(rng, b.lo()[j], b.hi()[j]))
}

fn clamp(x: &Vector, b: &BoxSet) -> Vector {
    Vector::from_fn(x.len(), |j, _| x[j].clamp(b.lo()[j], b.hi()[j]))
}

/// Objective of the given variant and its exact minimizer over `c`.
fn objective_with_minimizer(
    variant: &str,
    rng: &mut ChaCha8Rng,
    c: &BoxSet,
) -> (Objective, Vector) {
    let n = c.dim();
    match variant {
        "quadratic" => {
            // Separable, so the constrained minimizer is the clamped stationary point.
            let q: Vec<f64> = (0..n).map(|_| uniform(rng, 0.2, 3.0)).collect();
            let lin = Vector::from_fn(n, |_, _| uniform(rng, -4.0, 4.0));
            let stationary = Vector::from_fn(n, |j, _| -lin[j] / q[j]);
            let f = Objective::quadratic(
                DMatrix::from_diagonal(&Vector::from_vec(q)),
                lin,
                uniform(rng, -1.0, 1.0),
            )
            .unwrap();
            (f, clamp(&stationary, c))
        }
        "linear" => {
            let lin = Vector::from_fn(n, |_, _| uniform(rng, -3.0, 3.0));
            let corner = Vector::from_fn(n, |j, _| if lin[j] > 0.0 { c.lo()[j] } else { c.hi()[j] });
            (Objective::linear(lin, uniform(rng, -1.0, 1.0)).unwrap(), corner)
        }
        "norm_distance" => {
            let p = Vector::from_fn(n, |_, _| uniform(rng, -3.0, 3.0));
            let x_bar = clamp(&p, c);
            (Objective::norm_distance(p).unwrap(), x_bar)
        }
        "affine_max" => {
            // max_j |x_j − p_j|: the clamp minimizes every coordinate at once.
            let p = Vector::from_fn(n, |_, _| uniform(rng, -3.0, 3.0));
            let mut rows = Vec::with_capacity(2 * n);
            for j in 0..n {
                let e = Vector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 });
                rows.push(AffineRow { a: e.clone(), b: -p[j] });
                rows.push(AffineRow { a: -e, b: p[j] });
            }
            let x_bar = clamp(&p, c);
            (Objective::affine_max(rows).unwrap(), x_bar)
        }
        other => unreachable!("unknown variant {other}"),
    }
}

/// `count` valid configurations of `variant` in dimensions 1–3.
pub fn descent_cases(variant: &'static str, count: usize, seed: u64) -> Vec<DescentCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.random_range(1..=3);
        let ambient = BoxSet::new(Vector::from_element(n, -2.0), Vector::from_element(n, 2.0)).unwrap();
        let a = point_in(&mut rng, &ambient);
        let b = point_in(&mut rng, &ambient);
        let c = BoxSet::new(a.inf(&b), a.sup(&b)).unwrap();
        let (f, x_bar) = objective_with_minimizer(variant, &mut rng, &c);
        let x = point_in(&mut rng, &ambient);
        let gap = f.evaluate(&x).unwrap() - f.evaluate(&x_bar).unwrap();
        if gap <= 1e-6 {
            continue;
        }
        let delta = uniform(&mut rng, 0.0, gap.min(1.0) * 0.999).max(1e-9);
        let alpha = uniform(&mut rng, 0.0, 1.0).max(1e-9);
        let op = Operator::new(OperatorSpec::Projection(0), vec![ConvexSet::Box(c)], Some(ambient.clone()))
            .unwrap();
        out.push(DescentCase {
            variant,
            l_bar: f.lipschitz_bound(&ambient),
            m_radius: ambient.max_norm(),
            x,
            x_bar,
            delta,
            alpha,
            f,
            op,
        });
    }
    out
}
