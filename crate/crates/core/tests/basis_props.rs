mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use stdg_core::quadrature::{horizontal_face_rule, line_rule, prism_rule, triangle_rule};
use stdg_core::*;

fn basis_on(poly: &[stdg_core::mesh::Point], p: usize, t0: f64, t1: f64) -> (SpatialMesh, ElementBasis) {
    let mesh = single_element_mesh(poly);
    let set = IndexSet::new(IndexKind::TotalDegree, p).unwrap();
    let b = ElementBasis::new(&mesh, 0, 0, t0, t1, set).unwrap();
    (mesh, b)
}

fn gram(mesh: &SpatialMesh, b: &ElementBasis, t0: f64, t1: f64, order: usize) -> DMatrix<f64> {
    let rule = prism_rule(mesh, 0, t0, t1, order);
    let v = b.tabulate(&rule.points, false).values;
    let mut w = v.clone();
    for (q, wq) in rule.weights.iter().enumerate() {
        w.row_mut(q).scale_mut(*wq);
    }
    w.tr_mul(&v)
}

#[test]
fn orthonormal_under_an_independent_higher_order_rule() {
    let mut r = rng(11);
    for p in 1..=5 {
        for _ in 0..5 {
            let poly = random_convex_polygon(&mut r);
            let (mesh, b) = basis_on(&poly, p, 0.3, 0.35);
            let g = gram(&mesh, &b, 0.3, 0.35, 2 * p + 6);
            let err = (g - DMatrix::identity(b.len(), b.len())).abs().max();
            assert!(err < 1e-10, "p = {p}: {err}");
        }
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let mut r = rng(3);
    let poly = random_convex_polygon(&mut r);
    let (_, b) = basis_on(&poly, 3, 0.0, 0.5);
    let x = [0.6, 0.6, 0.2];
    let h = 1e-6;
    let d = b.evaluate(x);
    for k in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[k] += h;
        xm[k] -= h;
        let (vp, vm) = (b.evaluate(xp).value, b.evaluate(xm).value);
        for j in 0..b.len() {
            let fd = (vp[j] - vm[j]) / (2.0 * h);
            let an = match k {
                0 => d.grad[j][0],
                1 => d.grad[j][1],
                _ => d.dt[j],
            };
            assert!(
                (fd - an).abs() < 1e-5 * (1.0 + an.abs()),
                "component {k} function {j}: {fd} vs {an}"
            );
        }
    }
}

#[test]
fn spans_every_monomial_of_total_degree_p() {
    let mut r = rng(5);
    let poly = random_convex_polygon(&mut r);
    let p = 3;
    let (mesh, b) = basis_on(&poly, p, 1.0, 1.2);
    let rule = prism_rule(&mesh, 0, 1.0, 1.2, 2 * p + 2);
    let v = b.tabulate(&rule.points, false).values;
    let probe: Vec<[f64; 3]> = (0..10)
        .map(|_| [r.gen_range(0.4..0.8), r.gen_range(0.4..0.8), r.gen_range(1.0..1.2)])
        .collect();
    let pv = b.tabulate(&probe, false).values;
    for a in 0..=p as i32 {
        for bb in 0..=p as i32 - a {
            for c in 0..=p as i32 - a - bb {
                let m = |q: &[f64; 3]| q[0].powi(a) * q[1].powi(bb) * q[2].powi(c);
                // L2 projection with the orthonormal basis
                let coeffs: Vec<f64> = (0..b.len())
                    .map(|j| {
                        (0..rule.len())
                            .map(|q| rule.weights[q] * v[(q, j)] * m(&rule.points[q]))
                            .sum()
                    })
                    .collect();
                for (k, q) in probe.iter().enumerate() {
                    let approx: f64 = (0..b.len()).map(|j| coeffs[j] * pv[(k, j)]).sum();
                    assert!((approx - m(q)).abs() < 1e-9 * (1.0 + m(q).abs()));
                }
            }
        }
    }
}

#[test]
fn cardinality_of_total_degree_space() {
    for p in 1..=8 {
        let set = IndexSet::new(IndexKind::TotalDegree, p).unwrap();
        assert_eq!(set.cardinality(), (p + 1) * (p + 2) * (p + 3) / 6);
        assert_eq!(set.exponents().len(), set.cardinality());
    }
    assert_eq!(cardinality(IndexKind::TotalDegree, 2).unwrap(), 10);
    assert_eq!(cardinality(IndexKind::TimeTensorTotalSpace, 2).unwrap(), 18);
    assert_eq!(cardinality(IndexKind::FullTensor, 2).unwrap(), 27);
}

/// Largest `|v|^2_{F x I} / |v|^2_{s_F x I}` over the basis span, as the top
/// eigenvalue of the face Gram matrix relative to the sub-triangle Gram matrix.
fn trace_ratio(mesh: &SpatialMesh, b: &ElementBasis, edge: usize, t0: f64, t1: f64) -> f64 {
    let p = b.degree();
    let tri_idx = mesh.sub_triangulation.elements[0].edge_triangle[edge];
    let tri = &mesh.sub_triangulation.elements[0].triangles[tri_idx];
    let (tp, tw) = line_rule(t0, t1, 2 * p + 2);
    let (sp, sw) = triangle_rule(&tri.vertices, 2 * p + 2);
    let mut pts = Vec::new();
    let mut w = Vec::new();
    for (s, ws) in sp.iter().zip(&sw) {
        for (t, wt) in tp.iter().zip(&tw) {
            pts.push([s[0], s[1], *t]);
            w.push(ws * wt);
        }
    }
    let face = mesh.elements[0].faces[edge];
    let frule = stdg_core::quadrature::vertical_face_rule(mesh, face, t0, t1, 2 * p + 2);
    let g = |pts: &[[f64; 3]], w: &[f64]| {
        let v = b.tabulate(pts, false).values;
        let mut wv = v.clone();
        for (q, wq) in w.iter().enumerate() {
            wv.row_mut(q).scale_mut(*wq);
        }
        wv.tr_mul(&v)
    };
    let gs = g(&pts, &w);
    let gf = g(&frule.points, &frule.weights);
    // generalized eigenvalue via Cholesky of gs
    let l = gs.cholesky().unwrap().l();
    let li = l.try_inverse().unwrap();
    let m = &li * gf * li.transpose();
    let m = (&m + m.transpose()) * 0.5;
    m.symmetric_eigenvalues().max()
}

#[test]
fn trace_inverse_estimate_on_sub_triangles() {
    let mut r = rng(21);
    for _ in 0..40 {
        let poly = random_convex_polygon(&mut r);
        let p = r.gen_range(1..=4);
        let (mesh, b) = basis_on(&poly, p, 0.0, 0.1);
        for edge in 0..poly.len() {
            let tri_idx = mesh.sub_triangulation.elements[0].edge_triangle[edge];
            let s_area = mesh.sub_triangulation.elements[0].triangles[tri_idx].area;
            let f_len = mesh.faces[mesh.elements[0].faces[edge]].length;
            let bound = ((p + 1) * (p + 2)) as f64 / 2.0 * f_len / s_area;
            let ratio = trace_ratio(&mesh, &b, edge, 0.0, 0.1);
            assert!(ratio <= bound * (1.0 + 1e-10), "p {p}: {ratio} > {bound}");
        }
    }
}

#[test]
fn horizontal_trace_constant_is_stable_under_refinement() {
    let mesh = build_rectangular_mesh(1, 1, Rect::UNIT).unwrap();
    for p in 1..=4 {
        let mut fitted = Vec::new();
        for tau in [0.1, 0.05, 0.025] {
            let set = IndexSet::new(IndexKind::TotalDegree, p).unwrap();
            let b = ElementBasis::new(&mesh, 0, 0, 0.0, tau, set).unwrap();
            let rule = horizontal_face_rule(&mesh, 0, tau, 2 * p + 2);
            let v = b.tabulate(&rule.points, false).values;
            let mut wv = v.clone();
            for (q, wq) in rule.weights.iter().enumerate() {
                wv.row_mut(q).scale_mut(*wq);
            }
            // orthonormal basis: the top eigenvalue of the trace Gram is the
            // best constant in |v(t1)|^2 <= C |v|^2
            let top = wv.tr_mul(&v).symmetric_eigenvalues().max();
            fitted.push(top * tau / (p * p) as f64);
        }
        // in one variable the sharp constant is (p+1)^2 / tau
        let expected = ((p + 1) * (p + 1)) as f64 / (p * p) as f64;
        for c in fitted {
            assert!((c - expected).abs() < 1e-8 * expected, "p {p}: {c} vs {expected}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn first_function_is_the_normalized_constant(seed in 0u64..1000, p in 1usize..5) {
        let mut r = rng(seed);
        let poly = random_convex_polygon(&mut r);
        let (mesh, b) = basis_on(&poly, p, 0.0, 0.2);
        let vol = mesh.elements[0].area * 0.2;
        let v = b.evaluate([0.6, 0.6, 0.1]);
        prop_assert!((v.value[0].abs() - 1.0 / vol.sqrt()).abs() < 1e-10 / vol.sqrt());
        prop_assert!(v.grad[0][0].abs() < 1e-8 && v.dt[0].abs() < 1e-8);
    }
}
