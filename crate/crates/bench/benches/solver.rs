use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use stefan_core::kernel::{self, Coord};
use stefan_bench::phases;
use stefan_core::{enumerate, solve_dirichlet, DirichletProblem, NeumannProblem};

fn kernel_eval(c: &mut Criterion) {
    c.bench_function("eval_f", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for j in 0..100 {
                acc += kernel::eval_f(Coord::Finite(black_box(0.12 * j as f64))).unwrap();
            }
            acc
        })
    });
}

fn dirichlet(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_dirichlet");
    for m in [1, 2, 4, 8] {
        let p = DirichletProblem::new(phases(m), m as f64 + 1.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &p, |b, p| b.iter(|| solve_dirichlet(black_box(p)).unwrap()));
    }
    group.finish();
}

fn neumann(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate");
    for m in [1, 2, 4] {
        let p = NeumannProblem::new(phases(m), -0.5).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &p, |b, p| b.iter(|| enumerate(black_box(p)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, kernel_eval, dirichlet, neumann);
criterion_main!(benches);
