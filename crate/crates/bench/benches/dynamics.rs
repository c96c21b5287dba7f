use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use degroot_bench::{random_network, spread_opinions};
use degroot_core::{
    iterate_to_convergence, leading_influence_vector, validate, ConvergenceOptions,
    PowerIterationOptions,
};

fn bench_network(c: &mut Criterion) {
    let mut group = c.benchmark_group("network");
    for n in [10usize, 100, 500] {
        let m = random_network(n, 1);
        group.bench_with_input(BenchmarkId::new("validate", n), &m, |b, m| {
            b.iter(|| validate(black_box(m)))
        });
        group.bench_with_input(
            BenchmarkId::new("leading_influence_vector", n),
            &m,
            |b, m| {
                b.iter(|| {
                    leading_influence_vector(black_box(m), PowerIterationOptions::default())
                        .unwrap()
                })
            },
        );
    }
    group.finish();
}

fn bench_dynamics(c: &mut Criterion) {
    let mut group = c.benchmark_group("dynamics");
    for n in [10usize, 100, 500] {
        let m = random_network(n, 2);
        let x0 = spread_opinions(n);
        group.bench_with_input(BenchmarkId::new("iterate_to_convergence", n), &n, |b, _| {
            b.iter(|| {
                iterate_to_convergence(&m, black_box(&x0), ConvergenceOptions::default()).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_network, bench_dynamics);
criterion_main!(benches);
