use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use relhyp_bench::{long_loop, pair};
use relhyp_core::{
    bci_report, build_ball, decomposition_partition, four_point_delta, is_almost_malnormal, CoreGraph,
    GroupSpec, Limits,
};
use std::hint::black_box;

fn fold(c: &mut Criterion) {
    let mut g = c.benchmark_group("fold");
    for k in [4usize, 16, 64] {
        let gens = long_loop(k);
        g.bench_with_input(BenchmarkId::from_parameter(k), &gens, |b, gens| {
            b.iter(|| CoreGraph::fold(2, black_box(gens)).unwrap())
        });
    }
    g.finish();
    c.bench_function("malnormal/pair", |b| {
        b.iter(|| is_almost_malnormal(black_box(&pair())).unwrap())
    });
}

fn partition(c: &mut Criterion) {
    let coll = pair();
    let lim = Limits::default();
    let mut g = c.benchmark_group("partition");
    for n in [3usize, 5, 7] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| decomposition_partition(&coll, n, &lim).unwrap())
        });
    }
    g.finish();
}

fn four_point(c: &mut Criterion) {
    let lim = Limits::default();
    let spec = GroupSpec::free(2).unwrap();
    let mut g = c.benchmark_group("four_point");
    g.sample_size(10);
    for r in [2usize, 3] {
        let ball = build_ball(&spec, r, &lim).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(r), &ball, |b, ball| {
            b.iter(|| four_point_delta(ball, &lim, 0).unwrap())
        });
    }
    g.finish();
}

fn bci(c: &mut Criterion) {
    let coll = pair();
    let lim = Limits::default();
    let mut g = c.benchmark_group("bci");
    for n in [6usize, 8, 10] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| bci_report(&coll, 1, n, &lim).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, fold, partition, four_point, bci);
criterion_main!(benches);
