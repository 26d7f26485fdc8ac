use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mallows::limits::census;
use mallows::permutations::{finite_from_stream, OneSidedStream};
use mallows::rng::trial_rng;
use mallows::trees::{build_bst, sample_redwood_direct, sample_redwood_two_sided};

fn stream(c: &mut Criterion) {
    let mut g = c.benchmark_group("stream");
    for n in [1_000usize, 100_000] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let mut t = 0;
            b.iter(|| {
                t += 1;
                let mut s = OneSidedStream::new(0.5, trial_rng(1, t)).unwrap();
                finite_from_stream(&mut s, n)
            });
        });
    }
    g.finish();
}

fn trees(c: &mut Criterion) {
    let mut s = OneSidedStream::new(0.5, trial_rng(2, 0)).unwrap();
    let w = finite_from_stream(&mut s, 100_000);
    c.bench_function("build_bst/100000", |b| b.iter(|| build_bst(&w)));
    let t = build_bst(&w);
    c.bench_function("census/r2/100000", |b| b.iter(|| census(&t, 2)));
    let mut k = 0;
    c.bench_function("redwood/direct/r2", |b| {
        b.iter(|| {
            k += 1;
            sample_redwood_direct(0.5, 2, &mut trial_rng(3, k)).unwrap()
        })
    });
    c.bench_function("redwood/two_sided/r2", |b| {
        b.iter(|| {
            k += 1;
            sample_redwood_two_sided(0.5, 2, &mut trial_rng(4, k)).unwrap()
        })
    });
}

criterion_group!(benches, stream, trees);
criterion_main!(benches);
