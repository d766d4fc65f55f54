//! Benchmarks for the hot paths: kneading matrix + determinant assembly,
//! cylinder census walks, pressure extraction and the semi-conjugacy series.
//!
//! Run with `cargo bench -p kneading-bench`; `-- --test` does a single
//! smoke pass of every benchmark body.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use kneading_core::cylinders::census;
use kneading_core::fixtures::{golden_mean, tent, tent_with_inflow, weighted_doubling};
use kneading_core::kneading::kneading_matrix;
use kneading_core::pressure::{pressure, PressureOptions};
use kneading_core::semiconj::PhiMap;
use kneading_core::{Germ, Rational, Scalar};

fn bench_kneading(c: &mut Criterion) {
    let mut g = c.benchmark_group("kneading");
    let sys = weighted_doubling::<f64>();
    g.bench_function("determinant_f64_deg64", |b| {
        b.iter(|| kneading_matrix(black_box(&sys), 64).unwrap().det())
    });
    let inflow = tent_with_inflow::<f64>(5.0);
    g.bench_function("determinant_3branch_f64_deg64", |b| {
        b.iter(|| kneading_matrix(black_box(&inflow), 64).unwrap().det())
    });
    let sysq = weighted_doubling::<Rational>();
    g.bench_function("determinant_rational_deg32", |b| {
        b.iter(|| kneading_matrix(black_box(&sysq), 32).unwrap().det())
    });
    g.finish();
}

fn bench_census(c: &mut Criterion) {
    let mut g = c.benchmark_group("census");
    let tent_map = tent::<f64>();
    g.bench_function("tent_depth16", |b| {
        b.iter(|| census(black_box(&tent_map), 16, 1 << 22).unwrap())
    });
    let gold = golden_mean::<f64>();
    g.bench_function("golden_mean_depth20", |b| {
        b.iter(|| census(black_box(&gold), 20, 1 << 22).unwrap())
    });
    g.finish();
}

fn bench_pressure(c: &mut Criterion) {
    let sys = weighted_doubling::<f64>();
    let opts = PressureOptions::default();
    c.bench_function("pressure_trunc64", |b| {
        b.iter(|| pressure(black_box(&sys), 64, &opts).unwrap())
    });
}

fn bench_semiconj(c: &mut Criterion) {
    let mut g = c.benchmark_group("semiconj");
    let sys = tent::<f64>();
    g.bench_function("phi_map_deg48", |b| {
        b.iter(|| PhiMap::new(black_box(&sys), 48).unwrap())
    });
    let phi = PhiMap::new(&sys, 48).unwrap();
    let t = 0.3_f64;
    let germs: Vec<Germ<f64>> = (1..64)
        .map(|k| Germ::plus(f64::from_ratio(k, 64)))
        .collect();
    g.bench_function("phi_eval_63pts", |b| {
        b.iter(|| {
            for germ in &germs {
                black_box(phi.phi_at(germ, &t, 1e-9).unwrap());
            }
        })
    });
    g.finish();
}

criterion_group!(benches, bench_kneading, bench_census, bench_pressure, bench_semiconj);
criterion_main!(benches);
