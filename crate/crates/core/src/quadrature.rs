//! Quadrature on prismatic space-time elements and their faces.
//!
//! Volume rules tensor a collapsed Gauss rule on every sub-triangle of the
//! element with a Gauss–Legendre rule in time. Vertical faces use Gauss rules
//! along the segment and in time; horizontal faces reuse the spatial part of
//! the volume rule at a fixed time.

use crate::mesh::{Point, SpatialMesh, SubTriangle};

/// Quadrature points `(x, y, t)` and positive weights.
#[derive(Clone, Debug, Default)]
pub struct QuadRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[0], p[1], p[2]))
            .sum()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss rule needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss points needed for exactness to polynomial degree `order`.
fn points_for(order: usize) -> usize {
    order / 2 + 1
}

/// Gauss–Legendre rule on `[a, b]` exact to degree `order`.
pub fn line_rule(a: f64, b: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(points_for(order));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|s| mid + half * s).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Collapsed (Duffy) Gauss rule on a triangle, exact to degree `order`.
pub fn triangle_rule(tri: &[Point; 3], order: usize) -> (Vec<Point>, Vec<f64>) {
    // x = (1 - u) A + u ((1 - v) B + v C), Jacobian 2|T| u
    let (gu, wu) = gauss_legendre(points_for(order + 1));
    let (gv, wv) = gauss_legendre(points_for(order));
    let [a, b, c] = *tri;
    let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let mut pts = Vec::with_capacity(gu.len() * gv.len());
    let mut wts = Vec::with_capacity(gu.len() * gv.len());
    for (su, wu) in gu.iter().zip(&wu) {
        let u = 0.5 * (su + 1.0);
        for (sv, wv) in gv.iter().zip(&wv) {
            let v = 0.5 * (sv + 1.0);
            let bx = (1.0 - v) * b[0] + v * c[0];
            let by = (1.0 - v) * b[1] + v * c[1];
            pts.push([(1.0 - u) * a[0] + u * bx, (1.0 - u) * a[1] + u * by]);
            wts.push(0.25 * wu * wv * area2 * u);
        }
    }
    (pts, wts)
}

/// Spatial rule over a set of sub-triangles.
pub fn triangles_rule(triangles: &[SubTriangle], order: usize) -> (Vec<Point>, Vec<f64>) {
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for t in triangles {
        let (p, w) = triangle_rule(&t.vertices, order);
        pts.extend(p);
        wts.extend(w);
    }
    (pts, wts)
}

/// Rule on the prism `element x (t0, t1)`, exact for space-time polynomials of
/// total degree `order`.
pub fn prism_rule(mesh: &SpatialMesh, element: usize, t0: f64, t1: f64, order: usize) -> QuadRule {
    let (sp, sw) = triangles_rule(&mesh.sub_triangulation.elements[element].triangles, order);
    let (tp, tw) = line_rule(t0, t1, order);
    let mut rule = QuadRule {
        points: Vec::with_capacity(sp.len() * tp.len()),
        weights: Vec::with_capacity(sp.len() * tp.len()),
    };
    for (t, wt) in tp.iter().zip(&tw) {
        for (p, wp) in sp.iter().zip(&sw) {
            rule.points.push([p[0], p[1], *t]);
            rule.weights.push(wp * wt);
        }
    }
    rule
}

/// Rule on the vertical face `[a, b] x (t0, t1)`.
pub fn segment_time_rule(a: Point, b: Point, t0: f64, t1: f64, order: usize) -> QuadRule {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    let (sp, sw) = line_rule(0.0, 1.0, order);
    let (tp, tw) = line_rule(t0, t1, order);
    let mut rule = QuadRule::default();
    for (t, wt) in tp.iter().zip(&tw) {
        for (s, ws) in sp.iter().zip(&sw) {
            rule.points
                .push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]), *t]);
            rule.weights.push(ws * len * wt);
        }
    }
    rule
}

/// Rule on the vertical space-time face `face x (t0, t1)`.
pub fn vertical_face_rule(mesh: &SpatialMesh, face: usize, t0: f64, t1: f64, order: usize) -> QuadRule {
    let (a, b) = mesh.face_points(face);
    segment_time_rule(a, b, t0, t1, order)
}

/// Rule on the horizontal face `element x {t}`.
pub fn horizontal_face_rule(mesh: &SpatialMesh, element: usize, t: f64, order: usize) -> QuadRule {
    let (sp, sw) = triangles_rule(&mesh.sub_triangulation.elements[element].triangles, order);
    QuadRule {
        points: sp.iter().map(|p| [p[0], p[1], t]).collect(),
        weights: sw,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rectangular_mesh, Rect, SpatialMesh};

    #[test]
    fn gauss_rules_integrate_monomials() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            for k in 0..2 * n {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((q - exact).abs() < 1e-14, "n={n} k={k} q={q}");
            }
        }
    }

    #[test]
    fn separable_prism_integral() {
        let m = build_rectangular_mesh(1, 1, Rect::UNIT).unwrap();
        let r = prism_rule(&m, 0, 0.0, 1.0, 3);
        assert!((r.integrate(|x, y, t| x * y * t) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn prism_measure() {
        let m = build_rectangular_mesh(
            3,
            2,
            Rect {
                x0: 0.0,
                x1: 2.0,
                y0: -1.0,
                y1: 1.0,
            },
        )
        .unwrap();
        let r = prism_rule(&m, 4, 0.3, 0.55, 4);
        assert!((r.measure() - m.elements[4].area * 0.25).abs() < 1e-15);
        assert!(r.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn l_shape_matches_two_rectangles() {
        let coords = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];
        let m = SpatialMesh::from_parts(coords, vec![vec![0, 1, 2, 3, 4, 5]], &[]).unwrap();
        let r = prism_rule(&m, 0, 0.0, 1.0, 4);
        // (0,2)x(0,1) and (0,1)x(1,2)
        let oracle = 8.0 / 3.0 * 1.0 + 1.0 / 3.0 * 1.0;
        assert!((r.integrate(|x, _, _| x * x) - oracle).abs() < 1e-13);
    }

    #[test]
    fn vertical_face_integrals() {
        let m = build_rectangular_mesh(1, 1, Rect::UNIT).unwrap();
        let f = 0;
        let len = m.faces[f].length;
        let r = vertical_face_rule(&m, f, 0.0, 0.4, 2);
        assert!((r.measure() - len * 0.4).abs() < 1e-15);
        assert!((r.integrate(|_, _, t| t) - len * 0.16 / 2.0).abs() < 1e-15);
        let r = segment_time_rule([0.0, 0.0], [1.0, 0.0], 0.0, 1.0, 2);
        assert!((r.integrate(|s, _, t| s * t) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn horizontal_face_integrals() {
        let m = build_rectangular_mesh(1, 1, Rect::UNIT).unwrap();
        let r = horizontal_face_rule(&m, 0, 0.7, 2);
        assert!((r.measure() - 1.0).abs() < 1e-15);
        assert!((r.integrate(|x, _, _| x) - 0.5).abs() < 1e-15);
        assert!(r.points.iter().all(|p| p[2] == 0.7));
    }

    #[test]
    fn face_splitting_is_additive() {
        let a = [0.2, 0.1];
        let b = [0.9, 0.6];
        let f = |x: f64, y: f64, t: f64| x.powi(3) * y - 2.0 * x * t * t + y.powi(4);
        let whole = segment_time_rule(a, b, 0.0, 0.5, 6).integrate(f);
        let mut parts = 0.0;
        for i in 0..3 {
            let s0 = i as f64 / 3.0;
            let s1 = (i + 1) as f64 / 3.0;
            let p = |s: f64| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            parts += segment_time_rule(p(s0), p(s1), 0.0, 0.5, 6).integrate(f);
        }
        assert!((whole - parts).abs() < 1e-13);
    }
}
