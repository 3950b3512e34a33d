use std::hint::black_box;

use bayestree_bench::{complete_tree, dataset};
use bayestree_core::model::{self, Partition};
use bayestree_core::runtime::WorkerPool;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn bench_likelihood(c: &mut Criterion) {
    let data = dataset(50_000, 8);
    let tree = complete_tree(&data, 4);

    c.bench_function("log_likelihood/50k", |b| {
        b.iter(|| model::log_likelihood(black_box(&tree), black_box(&data)))
    });
    c.bench_function("fit_leaves/50k", |b| {
        b.iter(|| model::fit_leaves(black_box(&tree), black_box(&data), 1.0))
    });

    let mut group = c.benchmark_group("partitioned_log_likelihood/50k");
    for shards in [1usize, 2, 4, 8] {
        let part = Partition::even(data.n_rows(), shards).unwrap();
        let pool = WorkerPool::for_tasks(shards).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(shards), &shards, |b, _| {
            b.iter(|| model::partitioned_log_likelihood(&tree, &data, &part, &pool).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_likelihood);
criterion_main!(benches);
