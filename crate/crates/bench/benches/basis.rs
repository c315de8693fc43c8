use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stdg_core::quadrature::prism_rule;
use stdg_core::*;

// Orthonormalization cost grows quickly with p; Example 2 goes up to p = 9.
fn element_basis(c: &mut Criterion) {
    let mesh = build_rectangular_mesh(1, 1, Rect::UNIT).unwrap();
    let mut g = c.benchmark_group("element_basis");
    g.sample_size(10);
    for p in [2, 5, 9] {
        let set = IndexSet::new(IndexKind::TotalDegree, p).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(p), &set, |b, set| {
            b.iter(|| ElementBasis::new(&mesh, 0, 0, 0.0, 0.1, *set).unwrap())
        });
    }
    g.finish();
}

fn prism_quadrature(c: &mut Criterion) {
    let mesh =
        parse_mesh(r#"{"vertices": [[0,0],[1,0],[1.3,0.6],[0.5,1.1],[-0.2,0.7]], "elements": [[0,1,2,3,4]]}"#).unwrap();
    c.bench_function("prism_rule_order_12", |b| b.iter(|| prism_rule(&mesh, 0, 0.0, 1.0, 12)));
}

criterion_group!(benches, element_basis, prism_quadrature);
criterion_main!(benches);
