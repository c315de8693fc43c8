mod common;

use common::*;
use stdg_core::mesh::Point;
use stdg_core::quadrature::{horizontal_face_rule, prism_rule, segment_time_rule, vertical_face_rule};
use stdg_core::*;

fn monomial(a: u32, b: u32, c: u32) -> impl Fn(f64, f64, f64) -> f64 {
    move |x: f64, y: f64, t: f64| x.powi(a as i32) * y.powi(b as i32) * t.powi(c as i32)
}

#[test]
fn green_oracle_matches_known_areas() {
    let square: Vec<Point> = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
    assert!((green_monomial_integral(&square, 0, 0) - 4.0).abs() < 1e-14);
    // int x^2 y over [0,2]^2 = 8/3 * 2
    assert!((green_monomial_integral(&square, 2, 1) - 16.0 / 3.0).abs() < 1e-13);
}

#[test]
fn prism_rule_integrates_monomials_on_random_convex_polygons() {
    let mut r = rng(7);
    for _ in 0..20 {
        let poly = random_convex_polygon(&mut r);
        let mesh = single_element_mesh(&poly);
        let rule = prism_rule(&mesh, 0, 0.0, 1.0, 7);
        for a in 0..=7 {
            for b in 0..=7 - a {
                for c in 0..=7 - a - b {
                    let exact = green_monomial_integral(&poly, a, b) / (c + 1) as f64;
                    let got = rule.integrate(monomial(a, b, c));
                    assert!(
                        (got - exact).abs() <= 1e-12 * exact.abs(),
                        "{a} {b} {c}: {got} vs {exact}"
                    );
                }
            }
        }
    }
}

#[test]
fn nonconvex_polygon_rule() {
    let poly: Vec<Point> = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 0.5], [0.7, 0.6], [0.5, 2.0], [0.0, 2.0]];
    let mesh = single_element_mesh(&poly);
    let rule = prism_rule(&mesh, 0, 0.5, 1.5, 6);
    for a in 0..=6u32 {
        for b in 0..=6 - a {
            let exact = green_monomial_integral(&poly, a, b);
            let got = rule.integrate(monomial(a, b, 0));
            assert!((got - exact).abs() <= 1e-12 * exact.abs());
        }
    }
}

#[test]
fn face_rules_are_exact_for_their_order() {
    let mesh = build_rectangular_mesh(2, 2, Rect::UNIT).unwrap();
    for f in 0..mesh.faces.len() {
        let rule = vertical_face_rule(&mesh, f, 0.25, 0.75, 6);
        let (a, b) = mesh.face_points(f);
        let same = segment_time_rule(a, b, 0.25, 0.75, 6);
        assert_eq!(rule.points, same.points);
        // int over the segment of x^2 t^3, segment parametrized exactly
        let len = mesh.faces[f].length;
        let seg = |s: f64| a[0] + s * (b[0] - a[0]);
        let x2 = len * (seg(0.0).powi(2) + seg(0.0) * seg(1.0) + seg(1.0).powi(2)) / 3.0;
        let t3 = (0.75f64.powi(4) - 0.25f64.powi(4)) / 4.0;
        assert!((rule.integrate(monomial(2, 0, 3)) - x2 * t3).abs() < 1e-14);
    }
    let h = horizontal_face_rule(&mesh, 3, 0.4, 4);
    assert!(h.points.iter().all(|p| p[2] == 0.4));
    assert!((h.measure() - 0.25).abs() < 1e-15);
}
