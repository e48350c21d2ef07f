//! Hot-path benchmarks: stencils, implicit heat solves, reaction
//! evaluation, and a short end-to-end integration horizon.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use rdslab_core::harness::scenario::constant_fields;
use rdslab_core::{
    parse_network, simulate, DiffusionVector, FieldState, NonlinearitySpec, SimConfig,
    SpatialGrid,
};

/// Deterministic rough data without pulling in an RNG dependency.
fn wavy(grid: &SpatialGrid) -> Vec<f64> {
    (0..grid.node_count())
        .map(|j| {
            let x = grid.node_position(j)[0];
            1.0 + 0.5 * (7.3 * x).sin() + 0.25 * (23.1 * x + 0.4).cos()
        })
        .collect()
}

fn bench_laplacian(c: &mut Criterion) {
    let line = SpatialGrid::line(1.0, 256).unwrap();
    let u1 = wavy(&line);
    let mut out1 = vec![0.0; line.node_count()];
    c.bench_function("laplacian_line_256", |b| {
        b.iter(|| line.laplacian(black_box(&u1), &mut out1))
    });

    let plane = SpatialGrid::new(vec![1.0, 1.0], vec![64, 64]).unwrap();
    let u2 = wavy(&plane);
    let mut out2 = vec![0.0; plane.node_count()];
    c.bench_function("laplacian_plane_64x64", |b| {
        b.iter(|| plane.laplacian(black_box(&u2), &mut out2))
    });
}

fn bench_heat_solve(c: &mut Criterion) {
    let line = SpatialGrid::line(1.0, 256).unwrap();
    let u1 = wavy(&line);
    c.bench_function("heat_solve_line_256", |b| {
        b.iter(|| line.heat_solve_implicit(black_box(&u1), 1.5, 1e-3).unwrap())
    });

    let plane = SpatialGrid::new(vec![1.0, 1.0], vec![64, 64]).unwrap();
    let u2 = wavy(&plane);
    c.bench_function("heat_solve_plane_64x64", |b| {
        b.iter(|| plane.heat_solve_implicit(black_box(&u2), 1.5, 1e-3).unwrap())
    });
}

fn bench_reaction_eval(c: &mut Criterion) {
    let net = parse_network("A + B <-> 2 B @ 1.0, 2.0\nB -> C @ 0.7\nC -> A @ 0.3").unwrap();
    let spec = NonlinearitySpec::MassAction(net);
    let states: Vec<[f64; 3]> = (0..4096)
        .map(|k| {
            let t = k as f64 / 4096.0;
            [1.0 + t, 2.0 - t, 0.5 + 0.25 * t]
        })
        .collect();
    let mut out = [0.0; 3];
    c.bench_function("mass_action_eval_4096", |b| {
        b.iter(|| {
            for u in &states {
                spec.evaluate_into(black_box(u), &mut out);
            }
        })
    });
}

fn bench_short_horizon(c: &mut Criterion) {
    let grid = SpatialGrid::line(1.0, 64).unwrap();
    let net = parse_network("A <-> B @ 1.0, 1.0").unwrap();
    let fields = vec![wavy(&grid), wavy(&grid).iter().map(|v| 2.5 - v).collect()];
    let config = SimConfig::new(
        grid.clone(),
        NonlinearitySpec::MassAction(net),
        DiffusionVector::new(vec![1.0, 2.0]).unwrap(),
        FieldState::new(fields),
        1e-3,
        0.05,
    );
    c.bench_function("imex_50_steps_line_64", |b| {
        b.iter(|| simulate(black_box(&config)).unwrap())
    });
}

fn bench_regularity_probe(c: &mut Criterion) {
    let grid = SpatialGrid::line(1.0, 32).unwrap();
    c.bench_function("regularity_probe_line_32", |b| {
        b.iter(|| {
            grid.estimate_regularity_constant(black_box(1.0), 2.0, 0.25, 0.05, 2, 7)
                .unwrap()
        })
    });
}

fn bench_constant_fields(c: &mut Criterion) {
    let plane = SpatialGrid::new(vec![1.0, 1.0], vec![64, 64]).unwrap();
    c.bench_function("constant_fields_plane_64x64", |b| {
        b.iter(|| constant_fields(black_box(&plane), &[1.0, 2.0, 3.0]))
    });
}

criterion_group!(
    benches,
    bench_laplacian,
    bench_heat_solve,
    bench_reaction_eval,
    bench_short_horizon,
    bench_regularity_probe,
    bench_constant_fields,
);
criterion_main!(benches);
