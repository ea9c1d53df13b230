use std::hint::black_box;

use barista::estimate::{ga_fit, loglik, GaConfig};
use barista::simulate::sample_fixed_n;
use barista::{BaristaParams, FamilyKind, Seed};
use criterion::{criterion_group, criterion_main, Criterion};

fn pstar() -> BaristaParams {
    BaristaParams::new(3.0, 0.4, 1.0, 2.5, 5.0 / 1440.0, 1.0, 7.0).unwrap()
}

fn sampling(c: &mut Criterion) {
    let p = pstar();
    c.bench_function("sample_fixed_n 5000", |b| {
        b.iter(|| sample_fixed_n(black_box(&p), 5000, Seed(1)))
    });
}

fn likelihood(c: &mut Criterion) {
    let p = pstar();
    let s = sample_fixed_n(&p, 5000, Seed(1));
    c.bench_function("loglik n=5000", |b| b.iter(|| loglik(black_box(&s), black_box(&p))));
}

fn genetic(c: &mut Criterion) {
    let p = pstar();
    let s = sample_fixed_n(&p, 5000, Seed(1));
    let mut cfg = GaConfig::for_family(FamilyKind::ThreeStage, 7.0, Seed(2));
    cfg.generations = 50;
    let mut group = c.benchmark_group("ga");
    group.sample_size(10);
    group.bench_function("three-stage 50 generations", |b| {
        b.iter(|| ga_fit(black_box(&s), FamilyKind::ThreeStage, &cfg))
    });
    group.finish();
}

criterion_group!(benches, sampling, likelihood, genetic);
criterion_main!(benches);
