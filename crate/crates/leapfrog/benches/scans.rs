//! Parallel vs sequential timings of the data-parallel scans.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use leapfrog::contour::{g_field, psi_sum, PatchGeometry, PsiQuadrature};
use leapfrog::monodromy::{cantor_measure, singular_scan, CantorConfig};
use leapfrog::par;
use leapfrog::pointvortex::{frequency_profile, solve_q_theta};
use leapfrog::VortexParams;
use std::hint::black_box;

const MODES: [(&str, bool); 2] = [("par", false), ("seq", true)];

fn frequency(c: &mut Criterion) {
    let xs: Vec<f64> = (0..256).map(|k| 0.05 + 0.6 * k as f64 / 255.0).collect();
    let mut g = c.benchmark_group("frequency_profile");
    for (name, seq) in MODES {
        par::set_sequential(seq);
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| frequency_profile(1.0, black_box(&xs)).unwrap()));
    }
    par::set_sequential(false);
    g.finish();
}

fn singular(c: &mut Criterion) {
    let mut g = c.benchmark_group("singular_scan");
    g.sample_size(10);
    for (name, seq) in MODES {
        par::set_sequential(seq);
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| singular_scan(1.0, 0.1, 0.6, 24, 1e-10).unwrap()));
    }
    par::set_sequential(false);
    g.finish();
}

fn cantor(c: &mut Criterion) {
    let cfg = CantorConfig { j_max: 64, table_size: 1025, chunks: 64, ..CantorConfig::new(1.0, 0.05, 0.1, 0.3) };
    let mut g = c.benchmark_group("cantor_measure");
    g.sample_size(10);
    for (name, seq) in MODES {
        par::set_sequential(seq);
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| cantor_measure(black_box(&cfg)).unwrap()));
    }
    par::set_sequential(false);
    g.finish();
}

fn psi(c: &mut Criterion) {
    let geom = PatchGeometry::new(solve_q_theta(&VortexParams::new(1.0, 0.5, 0.1).unwrap(), 64).unwrap(), 20).unwrap();
    let r = g_field(&geom, 64).scale(0.1);
    let quad = PsiQuadrature::new(32);
    let mut g = c.benchmark_group("psi_sum_64x64");
    g.sample_size(10);
    for (name, seq) in MODES {
        par::set_sequential(seq);
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| psi_sum(0.1, black_box(&r), &geom, &quad).unwrap()));
    }
    par::set_sequential(false);
    g.finish();
}

criterion_group!(benches, frequency, singular, cantor, psi);
criterion_main!(benches);
