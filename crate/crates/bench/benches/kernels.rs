use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vqsd_core::linalg::eigh;
use vqsd_core::state::random_density_matrix;
use vqsd_core::{AnsatzDescriptor, AnsatzParams, CostFunction, GradientMethod, ObjectiveKind};

fn theta(len: usize) -> Vec<f64> {
    (0..len).map(|k| ((k as f64) * 0.37).sin()).collect()
}

fn bench_eigh(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigh");
    for n in [2usize, 3, 4, 5] {
        let rho = random_density_matrix(n, 1 << n, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(1 << n), rho.matrix(), |b, m| {
            b.iter(|| eigh(black_box(m)).unwrap())
        });
    }
    group.finish();
}

fn bench_circuits(c: &mut Criterion) {
    let mut group = c.benchmark_group("circuit");
    for n in [3usize, 5] {
        let desc = AnsatzDescriptor::universal(n).unwrap();
        let params = AnsatzParams::new(desc, theta(desc.param_count())).unwrap();
        group.bench_with_input(BenchmarkId::new("universal", n), &params, |b, p| b.iter(|| p.unitary().unwrap()));
        let desc = AnsatzDescriptor::brick_wall(n, 10).unwrap();
        let params = AnsatzParams::new(desc, theta(desc.param_count())).unwrap();
        group.bench_with_input(BenchmarkId::new("brick-wall-m10", n), &params, |b, p| {
            b.iter(|| p.unitary().unwrap())
        });
    }
    group.finish();
}

fn bench_gradients(c: &mut Criterion) {
    let mut group = c.benchmark_group("gradient");
    group.sample_size(10);
    for n in [3usize, 5] {
        let rho = random_density_matrix(n, 1 << n, 2).unwrap();
        let desc = AnsatzDescriptor::universal(n).unwrap();
        let cost = CostFunction::new(rho.clone(), desc, ObjectiveKind::GlobalD).unwrap();
        let t = theta(desc.param_count());
        group.bench_function(BenchmarkId::new("universal-analytic", n), |b| {
            b.iter(|| cost.gradient(&t, GradientMethod::Analytic, 0.0).unwrap())
        });
        if n == 3 {
            group.bench_function(BenchmarkId::new("universal-fd", n), |b| {
                b.iter(|| cost.gradient(&t, GradientMethod::FiniteDifference, 1e-4).unwrap())
            });
        }
        let desc = AnsatzDescriptor::brick_wall(n, 10).unwrap();
        let cost = CostFunction::new(rho, desc, ObjectiveKind::LocalL).unwrap();
        let t = theta(desc.param_count());
        group.bench_function(BenchmarkId::new("brick-wall-m10-fd", n), |b| {
            b.iter(|| cost.gradient(&t, GradientMethod::FiniteDifference, 1e-4).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_eigh, bench_circuits, bench_gradients);
criterion_main!(benches);
