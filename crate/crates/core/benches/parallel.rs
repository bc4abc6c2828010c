use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ssdd::catalog::Catalog;
use ssdd::trades::{defining_bound_with, trade_graph_with, BoundMode, VcLimits};
use ssdd::verify::verify_super_simple_with;
use ssdd::Exec;

fn modes() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn bench(c: &mut Criterion) {
    let d = Catalog::builtin().unwrap().design("DD(135)").unwrap();

    let mut g = c.benchmark_group("trade_graph/DD(135)");
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| trade_graph_with(&d, exec))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("super_simple/DD(135)");
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| verify_super_simple_with(&d, exec))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("defining_bound/DD(135)");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| defining_bound_with(&d, BoundMode::Matching, VcLimits::default(), exec))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
