use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use datacompat::oracle::{grid_minimize_with, grid_prox_min_with, GridSpec, SweepOptions};
use datacompat::{
    prox_value, run_many, BoxSet, CompatCriteria, ConstraintFamily, ConvexSet, Execution,
    Objective, OperatorSpec, ProblemInstance, SolverKind, StepSchedule, Vector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

const MODES: [(&str, Execution); 2] =
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn family() -> ConstraintFamily {
    ConstraintFamily::uniform(vec![
        ConvexSet::ball(v(&[-1.0, 0.0]), 0.6).unwrap(),
        ConvexSet::ball(v(&[1.0, 0.3]), 0.6).unwrap(),
        ConvexSet::halfspace(v(&[0.0, 1.0]), 0.2).unwrap(),
    ])
    .unwrap()
}

fn ambient() -> BoxSet {
    BoxSet::new(v(&[-2.0, -2.0]), v(&[2.0, 2.0])).unwrap()
}

fn grid_sweeps(c: &mut Criterion) {
    let fam = family();
    let f = Objective::norm_distance(v(&[0.5, 1.0])).unwrap();
    let mut group = c.benchmark_group("grid");
    group.sample_size(10);
    for h in [1e-2, 4e-3] {
        let grid = GridSpec::new(ambient(), h).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(format!("prox_min/{name}"), grid.len()), &grid, |b, g| {
                b.iter(|| black_box(grid_prox_min_with(&fam, g, exec).unwrap()))
            });
            group.bench_with_input(BenchmarkId::new(format!("minimize/{name}"), grid.len()), &grid, |b, g| {
                b.iter(|| {
                    black_box(
                        grid_minimize_with(
                            &f,
                            |x| prox_value(&fam, x).unwrap() <= 0.2,
                            g,
                            SweepOptions { value_tol: None, exec },
                        )
                        .unwrap(),
                    )
                })
            });
        }
    }
    group.finish();
}

fn multistart(c: &mut Criterion) {
    let inst = ProblemInstance::new(
        ambient(),
        family(),
        Objective::norm_distance(v(&[0.5, 1.0])).unwrap(),
        OperatorSpec::Simultaneous { weights: vec![1.0 / 3.0; 3] },
        StepSchedule::default(),
    )
    .unwrap();
    // A reference no iterate reaches, so every run spends its full budget.
    let crit = CompatCriteria::new(0.0, 1e-9, inst.lipschitz_bound(), vec![v(&[9.0, 9.0])]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let starts: Vec<Vector> =
        (0..64).map(|_| Vector::from_fn(2, |_, _| 4.0 * rng.random::<f64>() - 2.0)).collect();
    let mut group = c.benchmark_group("run_many");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, starts.len()), |b| {
            b.iter(|| black_box(run_many(SolverKind::Hspsm, &inst, &starts, 2000, &crit, exec)))
        });
    }
    group.finish();
}

criterion_group!(benches, grid_sweeps, multistart);
criterion_main!(benches);
