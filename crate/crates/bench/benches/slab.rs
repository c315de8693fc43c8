use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stdg_bench::SlabCase;
use stdg_core::{solve_slab, SolverKind, SolverOptions};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble_slab");
    g.sample_size(10);
    for (n, p) in [(8, 1), (8, 2), (16, 2)] {
        let case = SlabCase::new(n, p).unwrap();
        let space = case.space().unwrap();
        g.bench_with_input(BenchmarkId::new(format!("p{p}"), n * n), &space, |b, space| {
            b.iter(|| case.system(space).unwrap())
        });
    }
    g.finish();
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_slab");
    g.sample_size(10);
    let case = SlabCase::new(16, 2).unwrap();
    let sys = case.system(&case.space().unwrap()).unwrap();
    for kind in [SolverKind::Direct, SolverKind::Gmres] {
        let opts = SolverOptions {
            kind,
            ..Default::default()
        };
        g.bench_function(format!("{kind:?}").to_lowercase(), |b| {
            b.iter(|| solve_slab(&sys, &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, assembly, solve);
criterion_main!(benches);
