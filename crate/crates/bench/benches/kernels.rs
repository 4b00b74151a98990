use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lqo_bench::synthetic_samples;
use lqo_core::aaa_lqo::{error_surfaces, run, AaaLqoConfig};
use lqo_core::loewner::{solve_weights, LoewnerBlocks, Partition, RhoMode};
use lqo_core::sim::{simulate_lqo, Signal};
use lqo_core::synthetic::{random_stable_lqo, SyntheticOptions};

fn grid_errors(c: &mut Criterion) {
    let s = synthetic_samples(12, 60);
    let cfg = AaaLqoConfig { nmax: 12, eps: 1e-12, pair_mode: true, ..Default::default() };
    let (bary, _) = run(&s, &cfg).unwrap();
    c.bench_function("error_surfaces ns=120 n=12", |b| b.iter(|| error_surfaces(&s, &bary)));
}

fn weight_solve(c: &mut Criterion) {
    let s = synthetic_samples(20, 60);
    let mut group = c.benchmark_group("two-stage solve ns=120");
    for n in [4usize, 10, 20] {
        let p = Partition::new(s.len(), (0..n).collect()).unwrap();
        let blocks = LoewnerBlocks::build(&s, &p).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &blocks, |b, blk| {
            b.iter(|| solve_weights(blk, RhoMode::SqrtBoth, 0).unwrap())
        });
    }
    group.finish();
}

fn full_run(c: &mut Criterion) {
    let s = synthetic_samples(6, 20);
    let cfg = AaaLqoConfig { nmax: 20, eps: 1e-6, pair_mode: true, ..Default::default() };
    c.bench_function("aaa-lqo order 6 ns=40", |b| b.iter(|| run(&s, &cfg).unwrap()));
}

fn rk4(c: &mut Criterion) {
    let model = random_stable_lqo(30, 2, SyntheticOptions::default()).unwrap();
    let u = Signal::Cos { amp: 0.5, omega: 4.0 * std::f64::consts::PI };
    c.bench_function("rk4 order 30, 1000 steps", |b| b.iter(|| simulate_lqo(&model, &u, 1.0, 1e-3, None).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = grid_errors, weight_solve, full_run, rk4
}
criterion_main!(benches);
