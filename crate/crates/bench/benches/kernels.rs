//! Benchmarks for the four kernels that dominate solver and verifier
//! wall-time: the symmetric eigendecomposition, the factored gradient,
//! the rank-truncating projection, and the isometry-defect estimator.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use lrno_bench::{random_factor, random_sym, trace_scale_objective};
use lrno_core::instances::{
    estimate_rip, gen_certified_operator, DEFAULT_RIP_REFINE, DEFAULT_RIP_SAMPLES,
};
use lrno_core::linalg::{eigh, project_psd_rank_r};
use lrno_core::solvers::{gradient_descent, GdConfig};

fn bench_eigh(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigh");
    for n in [12usize, 40] {
        let m = random_sym(n, n as u64);
        group.bench_function(format!("n{n}"), |b| {
            b.iter(|| eigh(black_box(&m)).unwrap())
        });
    }
    group.finish();
}

fn bench_factored_gradient(c: &mut Criterion) {
    let obj = trace_scale_objective();
    let x = random_factor(40, 5, 11);
    c.bench_function("factored_grad/n40_m190_r5", |b| {
        b.iter(|| obj.factored_grad(black_box(&x)).unwrap())
    });
}

fn bench_rank_projection(c: &mut Criterion) {
    let m = random_sym(40, 3);
    c.bench_function("project_psd_rank_r/n40_r5", |b| {
        b.iter(|| project_psd_rank_r(black_box(&m), 5).unwrap())
    });
}

fn bench_defect_estimate(c: &mut Criterion) {
    let op = gen_certified_operator(12, 0.2, 5).unwrap();
    let mut group = c.benchmark_group("estimate_rip");
    group.sample_size(20);
    group.bench_function("n12_rank4", |b| {
        b.iter(|| {
            estimate_rip(
                black_box(&op),
                4,
                DEFAULT_RIP_SAMPLES,
                DEFAULT_RIP_REFINE,
                5,
            )
            .unwrap()
        })
    });
    group.finish();
}

fn bench_descent(c: &mut Criterion) {
    let obj = trace_scale_objective();
    let x0 = random_factor(40, 5, 13);
    let reference = x0.outer();
    let cfg = GdConfig {
        eta: 2e-4,
        max_iters: 100,
        grad_tol: 0.0,
        record_every: 100,
    };
    let mut group = c.benchmark_group("gradient_descent");
    group.sample_size(20);
    group.bench_function("100_iters_n40_m190_r5", |b| {
        b.iter_batched(
            || x0.clone(),
            |x| gradient_descent(&obj, &x, &cfg, &reference).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(
    kernels,
    bench_eigh,
    bench_factored_gradient,
    bench_rank_projection,
    bench_defect_estimate,
    bench_descent
);
criterion_main!(kernels);
