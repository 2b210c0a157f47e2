use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tickvar_core::counting::{distribution, enumerate_paths};
use tickvar_core::heavy_tails::sample_heavy;
use tickvar_core::pipeline::{analyze, RunConfig};
use tickvar_core::shifted::simulate_differences;
use tickvar_core::{PriceSeries, ZetaZero};

fn counting(c: &mut Criterion) {
    let mut group = c.benchmark_group("distribution");
    for n in [50, 512, 2000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| distribution(black_box(n)).unwrap())
        });
    }
    group.finish();
    c.bench_function("enumerate_paths/8", |b| {
        b.iter(|| enumerate_paths(black_box(8)).unwrap())
    });
}

fn sampling(c: &mut Criterion) {
    c.bench_function("sample_heavy/10k", |b| {
        b.iter(|| sample_heavy(10_000, ZetaZero::Uniform, black_box(1)).unwrap())
    });
    c.bench_function("simulate/10k", |b| {
        b.iter(|| simulate_differences(50, 0.3, 1.0, 10_000, black_box(1)).unwrap())
    });
}

fn pipeline(c: &mut Criterion) {
    // deterministic sawtooth with drift
    let prices: Vec<f64> = (0..100_000)
        .map(|i| 100.0 + 0.001 * i as f64 + ((i * 7919) % 13) as f64 * 0.05)
        .collect();
    let series = PriceSeries::from_prices(prices).unwrap();
    let config = RunConfig::default();
    c.bench_function("analyze/100k", |b| {
        b.iter(|| analyze(black_box(&series), &config, None).unwrap())
    });
}

criterion_group!(benches, counting, sampling, pipeline);
criterion_main!(benches);
