//! Throughput of the field kernels, flow steps and the eigen-solver.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use higgslab_bench::{connection, orbit_state, torus};
use higgslab_core::bundle::curvature;
use higgslab_core::flow::{etd_step, flow_step, ymh_gradient};
use higgslab_core::functionals::{chern_numbers, he_residual, ymh_energy};
use higgslab_core::spectral::{cutoff_norms, least_eigenvalue, weitzenbock_check, EigenOptions};
use higgslab_core::FlowConfig;
use std::hint::black_box;

fn spectral_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral");
    for m in [16, 32, 64] {
        let g = torus(1, m);
        let f = orbit_state(&g, 1).theta.comps()[0].clone();
        group.bench_with_input(BenchmarkId::new("derivative", m), &m, |b, _| b.iter(|| g.derivative(black_box(&f), 0)));
    }
    group.finish();
}

fn energy_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("energy");
    for m in [16, 32] {
        let g = torus(1, m);
        let s = orbit_state(&g, 1);
        group.bench_with_input(BenchmarkId::new("curvature", m), &m, |b, _| b.iter(|| curvature(&g, black_box(&s.a))));
        group.bench_with_input(BenchmarkId::new("he_residual", m), &m, |b, _| b.iter(|| he_residual(&g, &s.a, black_box(&s.theta))));
        group.bench_with_input(BenchmarkId::new("ymh_energy", m), &m, |b, _| b.iter(|| ymh_energy(&g, &s.a, black_box(&s.theta))));
        group.bench_with_input(BenchmarkId::new("weitzenbock_check", m), &m, |b, _| b.iter(|| weitzenbock_check(&g, &s.a, black_box(&s.theta), 1e-6)));
    }
    let g4 = torus(2, 8);
    let a4 = connection(&g4, 2);
    group.bench_function("chern_numbers/8^4", |b| b.iter(|| chern_numbers(&g4, black_box(&a4))));
    group.finish();
}

fn flow_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("flow");
    group.sample_size(20);
    for m in [16, 32] {
        let g = torus(1, m);
        let s = orbit_state(&g, 1);
        group.bench_with_input(BenchmarkId::new("ymh_gradient", m), &m, |b, _| b.iter(|| ymh_gradient(&g, &s.a, black_box(&s.theta))));
        group.bench_with_input(BenchmarkId::new("etd_step", m), &m, |b, _| b.iter(|| etd_step(&g, black_box(&s), 1e-3)));
        let cfg = FlowConfig::default();
        group.bench_with_input(BenchmarkId::new("flow_step", m), &m, |b, _| b.iter(|| flow_step(&g, black_box(&s), 1e-3, &cfg).expect("step")));
    }
    group.finish();
}

fn eigen_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigen");
    group.sample_size(10);
    let g = torus(1, 8);
    let a = connection(&g, 3);
    let opts = EigenOptions::default();
    group.bench_function("least_eigenvalue/8^2", |b| b.iter(|| least_eigenvalue(&g, black_box(&a), &opts)));
    group.bench_function("cutoff_norms/N=16", |b| b.iter(|| cutoff_norms(black_box(16.0), 0.4).expect("norms")));
    group.finish();
}

criterion_group!(benches, spectral_kernels, energy_kernels, flow_kernels, eigen_kernels);
criterion_main!(benches);
