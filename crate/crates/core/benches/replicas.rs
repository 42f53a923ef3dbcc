use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use updown::exec::Execution;
use updown::harness::{evaluate, lookup};

fn replicas(c: &mut Criterion) {
    let mut group = c.benchmark_group("scenario_B_8_replicas");
    group.sample_size(10);
    let mut cfg = lookup("B").expect("built-in");
    cfg.scenario.horizon = 5_000.0;
    cfg.replicas = 8;
    for (label, exec) in [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &exec, |b, &exec| {
            b.iter(|| black_box(evaluate(&cfg, exec).expect("evaluates")))
        });
    }
    group.finish();
}

criterion_group!(benches, replicas);
criterion_main!(benches);
