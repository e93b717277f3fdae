//! Benchmarks for the data-parallel hot loops.
//!
//! Every benchmark id is prefixed with the active lane so the two builds can
//! be compared directly:
//!
//! ```text
//! cargo bench -p vexpdo-core                          # parallel lane
//! cargo bench -p vexpdo-core --no-default-features    # sequential lane
//! ```
//!
//! Criterion keeps per-id history, so running both commands back to back
//! yields a side-by-side of rayon versus the sequential fallback.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vexpdo_core::exponent::Exponent;
use vexpdo_core::grid::{bump, Grid};
use vexpdo_core::maximal::{hl_maximal, sharp_maximal};
use vexpdo_core::modular::{luxemburg_norm, DEFAULT_NORM_TOL};
use vexpdo_core::pdo::{apply, PdoPlan};
use vexpdo_core::{oracle, symbols};

fn lane() -> &'static str {
    if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    }
}

fn bench_luxemburg_norm(c: &mut Criterion) {
    let grid = Grid::new(1, 10.0, 128).unwrap();
    let p = Exponent::log_log_sine(grid, 0.1, 0.05).unwrap();
    let f = oracle::random_function(grid, 42);
    let mut group = c.benchmark_group("luxemburg_norm");
    group.bench_function(BenchmarkId::new(lane(), "1d-128"), |b| {
        b.iter(|| {
            luxemburg_norm(black_box(&f), &p, DEFAULT_NORM_TOL)
                .unwrap()
                .value
        })
    });
    group.finish();
}

fn bench_hl_maximal(c: &mut Criterion) {
    let mut group = c.benchmark_group("hl_maximal");
    let g1 = Grid::new(1, 10.0, 128).unwrap();
    let f1 = oracle::random_function(g1, 42);
    group.bench_function(BenchmarkId::new(lane(), "1d-128"), |b| {
        b.iter(|| hl_maximal(black_box(&f1)))
    });
    let g2 = Grid::new(2, 10.0, 64).unwrap();
    let f2 = oracle::random_function(g2, 42);
    group.bench_function(BenchmarkId::new(lane(), "2d-64x64"), |b| {
        b.iter(|| hl_maximal(black_box(&f2)))
    });
    group.finish();
}

fn bench_sharp_maximal(c: &mut Criterion) {
    let mut group = c.benchmark_group("sharp_maximal");
    let g1 = Grid::new(1, 10.0, 128).unwrap();
    let f1 = oracle::random_function(g1, 42);
    group.bench_function(BenchmarkId::new(lane(), "1d-128"), |b| {
        b.iter(|| sharp_maximal(black_box(&f1)))
    });
    let g2 = Grid::new(2, 10.0, 64).unwrap();
    let f2 = oracle::random_function(g2, 42);
    group.bench_function(BenchmarkId::new(lane(), "2d-64x64"), |b| {
        b.iter(|| sharp_maximal(black_box(&f2)))
    });
    group.finish();
}

fn bench_pdo_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("pdo_apply");
    group.sample_size(20);
    let grid = Grid::new(1, 10.0, 128).unwrap();
    let plan = PdoPlan::new(&grid);
    let symbol = symbols::bracket_elliptic(1).unwrap();
    let u = bump(&grid, &[0.0], 2.0).unwrap();
    group.bench_function(BenchmarkId::new(lane(), "dense-1d-128"), |b| {
        b.iter(|| apply(&plan, &symbol, black_box(&u)).unwrap())
    });
    let g2 = Grid::new(2, 10.0, 32).unwrap();
    let plan2 = PdoPlan::new(&g2);
    let symbol2 = symbols::bracket_elliptic(2).unwrap();
    let u2 = bump(&g2, &[0.0, 0.0], 2.0).unwrap();
    group.bench_function(BenchmarkId::new(lane(), "dense-2d-32x32"), |b| {
        b.iter(|| apply(&plan2, &symbol2, black_box(&u2)).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_luxemburg_norm,
    bench_hl_maximal,
    bench_sharp_maximal,
    bench_pdo_apply
);
criterion_main!(benches);
