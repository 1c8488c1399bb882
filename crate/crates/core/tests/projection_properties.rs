//! Metric projection properties for every set variant.

use datacompat::{ConvexSet, Vector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn sets() -> Vec<(&'static str, ConvexSet)> {
    vec![
        ("halfspace", ConvexSet::halfspace(v(&[1.0, -2.0, 0.5]), 0.7).unwrap()),
        ("box", ConvexSet::boxed(v(&[-1.0, 0.0, 2.0]), v(&[1.0, 0.0, 3.5])).unwrap()),
        ("ball", ConvexSet::ball(v(&[0.5, -1.0, 2.0]), 1.3).unwrap()),
        ("hyperplane", ConvexSet::hyperplane(v(&[3.0, 1.0, -1.0]), 2.0).unwrap()),
    ]
}

fn random_point(rng: &mut ChaCha8Rng, scale: f64) -> Vector {
    Vector::from_fn(3, |_, _| scale * (2.0 * rng.random::<f64>() - 1.0))
}

/// Points with `contains(z, 0)`; hyperplane samples are projections kept only
/// when they satisfy the equation exactly in floating point, otherwise at 1e-12.
fn member(set: &ConvexSet, rng: &mut ChaCha8Rng) -> Vector {
    loop {
        let x = random_point(rng, 6.0);
        let z = match set {
            ConvexSet::Halfspace(h) => {
                set.project(&x).unwrap() - h.normal() * rng.random::<f64>()
            }
            ConvexSet::Ball(b) => {
                let d = random_point(rng, 1.0);
                if d.norm() > 1.0 || d.norm() == 0.0 {
                    continue;
                }
                b.center() + d * b.radius()
            }
            _ => set.project(&x).unwrap(),
        };
        let tol = if matches!(set, ConvexSet::Hyperplane(_)) { 1e-12 } else { 0.0 };
        if set.contains(&z, tol).unwrap() {
            return z;
        }
    }
}

#[test]
fn idempotence_nonexpansiveness_variational_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (name, set) in sets() {
        let members: Vec<Vector> = (0..100).map(|_| member(&set, &mut rng)).collect();
        for _ in 0..1000 {
            let x = random_point(&mut rng, 10.0);
            let y = random_point(&mut rng, 10.0);
            let px = set.project(&x).unwrap();
            let py = set.project(&y).unwrap();

            let ppx = set.project(&px).unwrap();
            assert!((&ppx - &px).norm() <= 1e-12, "{name}: idempotence {}", (&ppx - &px).norm());

            let lhs = (&px - &py).norm();
            let rhs = (&x - &y).norm();
            assert!(lhs <= rhs + 1e-12, "{name}: nonexpansive {lhs} > {rhs}");

            for z in &members {
                let vi = (&x - &px).dot(&(z - &px));
                assert!(vi <= 1e-9, "{name}: variational inequality {vi}");
            }
        }
    }
}

#[test]
fn distance_zero_iff_member() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, set) in sets() {
        for _ in 0..1000 {
            let x = random_point(&mut rng, 5.0);
            let d = set.distance(&x).unwrap();
            assert_eq!(d == 0.0, set.contains(&x, 0.0).unwrap(), "{name}");
            assert_eq!(d <= 1e-12, set.contains(&x, 1e-12).unwrap(), "{name} at tolerance");
            let p = set.project(&x).unwrap();
            assert!((d - (&x - &p).norm()).abs() <= 1e-12, "{name}: distance vs projection");
        }
        let inside = member(&set, &mut rng);
        assert!(set.distance(&inside).unwrap() <= 1e-12, "{name}");
    }
}

proptest! {
    #[test]
    fn box_projection_is_componentwise_clamp(
        x in prop::collection::vec(-50.0f64..50.0, 3),
        lo in prop::collection::vec(-5.0f64..0.0, 3),
        width in prop::collection::vec(0.0f64..5.0, 3),
    ) {
        let hi: Vec<f64> = lo.iter().zip(&width).map(|(l, w)| l + w).collect();
        let b = ConvexSet::boxed(v(&lo), v(&hi)).unwrap();
        let p = b.project(&v(&x)).unwrap();
        for j in 0..3 {
            prop_assert_eq!(p[j], x[j].clamp(lo[j], hi[j]));
        }
    }

    #[test]
    fn halfspace_projection_lands_on_boundary(
        a in prop::collection::vec(-3.0f64..3.0, 2),
        b in -2.0f64..2.0,
        x in prop::collection::vec(-10.0f64..10.0, 2),
    ) {
        prop_assume!(a[0].abs() + a[1].abs() > 1e-3);
        let h = ConvexSet::halfspace(v(&a), b).unwrap();
        let x = v(&x);
        let p = h.project(&x).unwrap();
        let av = v(&a);
        if av.dot(&x) > b {
            prop_assert!((av.dot(&p) - b).abs() <= 1e-12 * (1.0 + x.norm() * av.norm()));
        } else {
            prop_assert_eq!(p, x);
        }
    }
}
