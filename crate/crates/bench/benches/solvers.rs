use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use diagnet::data::presets;
use diagnet::margins::{l1_max_margin, l2_max_margin, log_grid, lp_quasi_stationary, q_mu_max_margin, q_path};
use diagnet::PenaltySpec;

fn reference_solvers(c: &mut Criterion) {
    let data = presets::kinked_path();
    c.bench_function("l2_max_margin", |b| b.iter(|| l2_max_margin(black_box(&data)).unwrap()));
    c.bench_function("l1_max_margin", |b| b.iter(|| l1_max_margin(black_box(&data)).unwrap()));
    let sparse = presets::sparse10(0);
    let start = l1_max_margin(&sparse).unwrap().w;
    c.bench_function("lq_stationary_d10", |b| b.iter(|| lp_quasi_stationary(black_box(&sparse), 3, &start).unwrap()));
}

fn q_mu(c: &mut Criterion) {
    let data = presets::kinked_path();
    let mut group = c.benchmark_group("q_mu_max_margin");
    for mu in [10.0, 0.1, 1e-3] {
        for depth in [2u32, 3] {
            let spec = PenaltySpec::new(depth, mu).unwrap();
            group.bench_with_input(BenchmarkId::new(format!("D{depth}"), mu), &spec, |b, s| {
                b.iter(|| q_mu_max_margin(black_box(&data), s).unwrap())
            });
        }
    }
    group.finish();
    let grid = log_grid(1e4, 1e-4, 32);
    c.bench_function("q_path_32", |b| b.iter(|| q_path(black_box(&data), 2, &grid).unwrap()));
}

criterion_group!(benches, reference_solvers, q_mu);
criterion_main!(benches);
