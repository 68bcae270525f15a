//! Compares the data-parallel and sequential run-generation paths.
//!
//! Run with `cargo bench -p belltest`. The parallel path is only compiled
//! with the default `parallel` feature; under `--no-default-features` the
//! suite degenerates to the sequential baseline.

use belltest::{
    run_experiment_sequential, synthesize_regions, ClockMode, OutcomeFns, Schedule, SettingMap,
    SynthesisOptions,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn bench_generation(c: &mut Criterion) {
    let patterns = belltest::PatternTable::standard();
    let rc = synthesize_regions(SynthesisOptions::default(), &patterns)
        .feasible()
        .expect("default synthesis is feasible");
    let fns = OutcomeFns::for_settings(&SettingMap::canonical());
    let sched = Schedule::all_pairs_cycle(ClockMode::UniformRandom);

    let mut group = c.benchmark_group("run_generation");
    group.sample_size(20);
    for n in [10_000u64, 100_000] {
        group.throughput(Throughput::Elements(n));
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| run_experiment_sequential(n, &sched, 0xBE11, &fns, &rc))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
            b.iter(|| belltest::run_experiment(n, &sched, 0xBE11, &fns, &rc))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_generation);
criterion_main!(benches);
