//! Parallel against single-threaded execution of the two hot paths: the full
//! linear solve and the nonlinear residual.
//!
//! `single_thread` runs on a one-worker pool; `pool` uses the global pool.
//! Without the `parallel` feature both variants are sequential.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use slipwave::bvp::{BoundaryMode, PhysicalParams};
use slipwave::geometry::{eval_xi, ForcingSpec};
use slipwave::parallel::with_threads;
use slipwave::sampling::{seeded_rng, DEFAULT_BANDWIDTH};
use slipwave::spectral::Grid;
use slipwave::surface::{DataMode, DataTuple, LinearSolver};
use std::hint::black_box;

fn grids() -> Vec<Grid> {
    vec![Grid::new(20.0, 1, 64, 24, 1.0).unwrap(), Grid::new(20.0, 1, 256, 48, 1.0).unwrap()]
}

fn label(g: &Grid) -> String {
    format!("{}x{}", g.nx(), g.nz())
}

fn linear_solve(c: &mut Criterion) {
    let params = PhysicalParams::new(1, 0.1, 1.0, 0.1);
    let mut group = c.benchmark_group("solve_linear_full");
    group.sample_size(10);
    for g in grids() {
        let solver = LinearSolver::new(&g, &params, BoundaryMode::Slip).unwrap();
        let data = DataTuple::random(&mut seeded_rng(1), &g, true, DEFAULT_BANDWIDTH);
        let run = || solver.solve_linear_full(black_box(&data), DataMode::GenericL).unwrap();
        group.bench_function(BenchmarkId::new("single_thread", label(&g)), |b| b.iter(|| with_threads(1, run)));
        group.bench_function(BenchmarkId::new("pool", label(&g)), |b| b.iter(run));
    }
    group.finish();
}

fn residual(c: &mut Criterion) {
    let params = PhysicalParams::new(1, 0.1, 1.0, 0.1);
    let mut group = c.benchmark_group("eval_xi");
    group.sample_size(10);
    for g in grids() {
        let solver = LinearSolver::new(&g, &params, BoundaryMode::Slip).unwrap();
        let forcing = ForcingSpec::gaussian_bump(&g, 1e-3);
        let data = DataTuple::random(&mut seeded_rng(2), &g, true, DEFAULT_BANDWIDTH);
        let state = solver.solve_linear_full(&data, DataMode::GenericL).unwrap();
        let state = state.scaled(1e-3 / state.max_abs());
        let run = || eval_xi(black_box(&state), &forcing, &params, BoundaryMode::Slip, DataMode::GenericL).unwrap();
        group.bench_function(BenchmarkId::new("single_thread", label(&g)), |b| b.iter(|| with_threads(1, run)));
        group.bench_function(BenchmarkId::new("pool", label(&g)), |b| b.iter(run));
    }
    group.finish();
}

criterion_group!(benches, linear_solve, residual);
criterion_main!(benches);
