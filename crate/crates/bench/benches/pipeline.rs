use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use subharm_bench::{plane_measure, square_measure};
use subharm_core::metrics::{circle_mean, l1_disk_error};
use subharm_core::partition::partition_mass_two;
use subharm_core::pipeline::{approximate, ApproxConfig};
use subharm_core::{LogRectangle, QuadratureParams, SlowlyVarying};

fn partition(c: &mut Criterion) {
    let rect = LogRectangle::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let mut g = c.benchmark_group("partition");
    for n in [50, 200, 800] {
        let nu = square_measure(n, 20.0, 7);
        g.bench_with_input(BenchmarkId::from_parameter(n), &nu, |b, nu| {
            b.iter(|| partition_mass_two(&rect, black_box(nu)).unwrap())
        });
    }
    g.finish();
}

fn pipeline(c: &mut Criterion) {
    let cfg = ApproxConfig::new(SlowlyVarying::LogE);
    let mut g = c.benchmark_group("approximate");
    g.sample_size(10);
    for n in [100, 1000] {
        let m = plane_measure(n, 1e4, 11);
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| approximate(black_box(m), &cfg).unwrap()));
    }
    g.finish();
}

fn metrics(c: &mut Criterion) {
    let m = plane_measure(500, 1e3, 5);
    let a = approximate(&m, &ApproxConfig::new(SlowlyVarying::LogE)).unwrap();
    c.bench_function("circle_mean/4096", |b| b.iter(|| circle_mean(&m, black_box(200.0), 4096).unwrap()));
    let mut g = c.benchmark_group("l1_disk_error");
    g.sample_size(10);
    g.bench_function("r=100", |b| {
        b.iter(|| l1_disk_error(&m, &a.zeros, black_box(100.0), &QuadratureParams::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, partition, pipeline, metrics);
criterion_main!(benches);
