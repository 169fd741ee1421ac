//! Benchmarks for the summary pipeline: stream ingestion under low and
//! ample counter budgets, summary merging, distance evaluation, and the
//! end-to-end multi-source flow.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};

use slds::{build_summary, split_sources, total_variation, wasserstein_distance};
use slds_bench::{bench_spec, gaussian_samples, summarize};

const STREAM_LEN: usize = 100_000;

fn ingestion(c: &mut Criterion) {
    let samples = gaussian_samples(0.0, 11, STREAM_LEN);
    let mut group = c.benchmark_group("ingest");
    group.throughput(Throughput::Elements(STREAM_LEN as u64));
    // 64 counters force constant eviction pressure; 4096 hold every
    // populated bucket, so ingestion is pure map updates.
    for capacity in [64, 4096] {
        group.bench_function(format!("capacity_{capacity}"), |b| {
            b.iter(|| summarize(&samples, capacity).expect("summary"));
        });
    }
    group.finish();
}

fn merging(c: &mut Criterion) {
    let left = summarize(&gaussian_samples(0.0, 21, STREAM_LEN), 1024).expect("summary");
    let right = summarize(&gaussian_samples(0.5, 22, STREAM_LEN), 1024).expect("summary");
    c.bench_function("merge_1024", |b| {
        b.iter_batched(
            || left.clone(),
            |mut acc| acc.merge_from(&right).expect("merge"),
            BatchSize::SmallInput,
        );
    });
}

fn distances(c: &mut Criterion) {
    let a = summarize(&gaussian_samples(0.0, 31, STREAM_LEN), 1024).expect("summary");
    let b = summarize(&gaussian_samples(1.0, 32, STREAM_LEN), 1024).expect("summary");
    let mut group = c.benchmark_group("distance");
    group.bench_function("wasserstein_1", |bench| {
        bench.iter(|| wasserstein_distance(&a, &b, 1.0).expect("distance"));
    });
    group.bench_function("total_variation", |bench| {
        bench.iter(|| total_variation(&a, &b).expect("distance"));
    });
    group.finish();
}

fn end_to_end(c: &mut Criterion) {
    let side_a = gaussian_samples(0.0, 41, STREAM_LEN);
    let side_b = gaussian_samples(1.0, 42, STREAM_LEN);
    c.bench_function("pipeline_10_sources", |b| {
        b.iter(|| {
            let sources_a = split_sources(&side_a, 10).expect("split");
            let sources_b = split_sources(&side_b, 10).expect("split");
            let a = build_summary(bench_spec(), 512, None, &sources_a).expect("summary");
            let b = build_summary(bench_spec(), 512, None, &sources_b).expect("summary");
            wasserstein_distance(&a, &b, 1.0).expect("distance")
        });
    });
}

criterion_group!(benches, ingestion, merging, distances, end_to_end);
criterion_main!(benches);
