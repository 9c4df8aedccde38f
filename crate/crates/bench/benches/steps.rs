use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use scbgd_bench::{benchmark_problems, DIMS};
use scbgd_core::solvers::{gd_step, scbgd_step};
use scbgd_core::BlockSampler;

fn single_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for n in DIMS {
        for problem in benchmark_problems(n) {
            let x = problem.default_start();
            let mut sampler = BlockSampler::new(n, 10, 1).unwrap();
            group.bench_with_input(
                BenchmarkId::new(format!("scbgd-q10/{}", problem.name()), n),
                &x,
                |b, x| b.iter(|| scbgd_step(problem.as_ref(), black_box(x), &sampler.sample(), 1.0).unwrap()),
            );
            group.bench_with_input(BenchmarkId::new(format!("gd/{}", problem.name()), n), &x, |b, x| {
                b.iter(|| gd_step(problem.as_ref(), black_box(x), 1.0).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, single_steps);
criterion_main!(benches);
