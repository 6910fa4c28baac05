//! Compares batched solver restarts through the rayon-backed `run_batch`
//! against the always-sequential `run_batch_seq` on a realistic design
//! workload (build with the default `parallel` feature for a meaningful
//! comparison).

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use beamsynth::{
    grad_descent, random_phase_init, run_batch, run_batch_seq, AngleGrid, ArrayGeometry,
    BeamformerSolution, PsfSpec, SolverConfig, SolverError, Tolerance,
};

fn restart_workload() -> impl Fn(u64) -> Result<BeamformerSolution, SolverError> + Send + Sync {
    let ula = ArrayGeometry::ula(11).unwrap();
    let grid = AngleGrid::uniform(99).unwrap();
    let spec = PsfSpec::chebyshev(&ula, &ula, &grid, 40.0).unwrap();
    let cfg = SolverConfig {
        max_iters: 250,
        tolerance: Tolerance::Absolute(0.0),
        ..SolverConfig::default()
    };
    move |seed: u64| {
        let f_t0 = random_phase_init(11, 1, seed);
        let f_r0 = random_phase_init(11, 1, seed.wrapping_add(1000));
        grad_descent(&spec.measurement, &spec.target, &f_t0, &f_r0, &cfg)
    }
}

fn bench_restart_batch(c: &mut Criterion) {
    let job = restart_workload();
    let seeds: Vec<u64> = (0..8).collect();

    let mut group = c.benchmark_group("design_restarts_x8");
    group.sample_size(10);
    group.bench_function("run_batch", |b| {
        b.iter(|| run_batch(black_box(seeds.clone()), &job))
    });
    group.bench_function("run_batch_seq", |b| {
        b.iter(|| run_batch_seq(black_box(seeds.clone()), &job))
    });
    group.finish();
}

criterion_group!(benches, bench_restart_batch);
criterion_main!(benches);
