use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maxbrane::exec::Exec;
use maxbrane::hilbert::census_sweep;
use maxbrane::k3n::obstruction_sweep;

fn strategies() -> Vec<(&'static str, Exec)> {
    let mut s = vec![("sequential", Exec::Sequential)];
    if Exec::default() != Exec::Sequential {
        s.push(("parallel", Exec::default()));
    }
    s
}

fn obstruction(c: &mut Criterion) {
    let mut g = c.benchmark_group("obstruction_sweep");
    g.sample_size(10);
    for (name, exec) in strategies() {
        g.bench_with_input(BenchmarkId::new(name, "n=4 x 24"), &exec, |b, &e| {
            b.iter(|| black_box(obstruction_sweep(e, 4, 24, 11)))
        });
    }
    g.finish();
}

fn census(c: &mut Criterion) {
    let mut g = c.benchmark_group("census_sweep");
    g.sample_size(10);
    for (name, exec) in strategies() {
        g.bench_with_input(BenchmarkId::new(name, "b2<=30 n<=5"), &exec, |b, &e| {
            b.iter(|| black_box(census_sweep(e, 30, 5)))
        });
    }
    g.finish();
}

criterion_group!(benches, obstruction, census);
criterion_main!(benches);
