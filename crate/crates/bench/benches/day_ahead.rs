use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use bess_bench::standard_day;
use bess_core::lp;
use bess_core::scheduler::{self, ObjectiveMode};

fn bench_day_ahead(c: &mut Criterion) {
    let (inputs, _) = standard_day(17);
    let mut group = c.benchmark_group("day_ahead");
    group.sample_size(20);
    group.bench_function("build_lp_n288", |b| {
        b.iter(|| scheduler::build_lp(black_box(&inputs), ObjectiveMode::MaxAlpha).unwrap())
    });
    group.bench_function("solve_raw_lp_n288", |b| {
        let lp = scheduler::build_lp(&inputs, ObjectiveMode::MaxAlpha).unwrap();
        b.iter(|| lp::solve(black_box(&lp)).unwrap())
    });
    group.bench_function("solve_day_ahead_n288", |b| {
        b.iter(|| scheduler::solve_day_ahead(black_box(&inputs), ObjectiveMode::MaxAlpha).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_day_ahead);
criterion_main!(benches);
