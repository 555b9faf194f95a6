use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mhtc_bench::scenario;
use mhtc_core::analytics::{
    expected_relay_sets, expected_relay_sets_total_budget, max_density_for_outage, tc_upper_bound,
};
use mhtc_core::oracle::{quadrature_expected_relay_sets, QuadratureSpec};

fn counts(c: &mut Criterion) {
    let cfg = scenario(0.2, 0.1, 3, Some(100.0));
    c.bench_function("expected_relay_sets m=3", |b| b.iter(|| expected_relay_sets(black_box(&cfg))));
    let cfg = scenario(0.2, 0.1, 3, None);
    c.bench_function("total_budget M=8 m=3", |b| b.iter(|| expected_relay_sets_total_budget(black_box(&cfg), 8)));
}

fn inversions(c: &mut Criterion) {
    let cfg = scenario(1.0, 0.05, 2, None);
    c.bench_function("tc_upper_bound", |b| b.iter(|| tc_upper_bound(black_box(&cfg), 0.05)));
    let cfg = scenario(1.0, 0.05, 2, Some(50.0));
    c.bench_function("max_density_for_outage D=50", |b| b.iter(|| max_density_for_outage(black_box(&cfg), 0.05)));
}

fn oracles(c: &mut Criterion) {
    let cfg = scenario(0.1, 0.1, 1, Some(100.0));
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("grid m=1 n=200", |b| {
        b.iter(|| quadrature_expected_relay_sets(black_box(&cfg), &QuadratureSpec::grid(200)))
    });
    let cfg = scenario(0.1, 0.1, 2, Some(100.0));
    g.bench_function("monte carlo m=2 1e5", |b| {
        b.iter(|| quadrature_expected_relay_sets(black_box(&cfg), &QuadratureSpec::monte_carlo(100_000, 1)))
    });
    g.finish();
}

criterion_group!(benches, counts, inversions, oracles);
criterion_main!(benches);
