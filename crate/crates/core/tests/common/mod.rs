#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stdg_core::mesh::Point;
use stdg_core::SpatialMesh;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Convex polygon with 3..=8 vertices on a jittered circle inside
/// `[0.1, 1.1]^2`, counter-clockwise.
pub fn random_convex_polygon(rng: &mut impl Rng) -> Vec<Point> {
    let n = rng.gen_range(3..=8);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // keep vertices apart so the polygon is not degenerate
    for k in 1..n {
        if angles[k] - angles[k - 1] < 0.2 {
            angles[k] = angles[k - 1] + 0.2;
        }
    }
    if angles[n - 1] - angles[0] > std::f64::consts::TAU - 0.2 || angles[n - 1] >= 10.0 {
        return random_convex_polygon(rng);
    }
    let (cx, cy, r) = (0.6, 0.6, rng.gen_range(0.2..0.5));
    let pts: Vec<Point> = angles.iter().map(|a| [cx + r * a.cos(), cy + r * a.sin()]).collect();
    if stdg_core::mesh::signed_area(&pts) < 0.05 * r * r {
        return random_convex_polygon(rng);
    }
    pts
}

pub fn single_element_mesh(poly: &[Point]) -> SpatialMesh {
    let loops = vec![(0..poly.len()).collect()];
    SpatialMesh::from_parts(poly.to_vec(), loops, &[]).unwrap()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact `int_P x^a y^b dA` by Green's theorem, `int_P x^a y^b = oint x^(a+1)
/// y^b / (a+1) dy`, with each edge integral expanded binomially.
pub fn green_monomial_integral(poly: &[Point], a: u32, b: u32) -> f64 {
    let n = poly.len();
    let mut total = 0.0;
    for k in 0..n {
        let [x0, y0] = poly[k];
        let [x1, y1] = poly[(k + 1) % n];
        let (dx, dy) = (x1 - x0, y1 - y0);
        // int_0^1 (x0 + s dx)^(a+1) (y0 + s dy)^b ds
        let mut edge = 0.0;
        for i in 0..=a + 1 {
            for j in 0..=b {
                let coef = binomial(a + 1, i)
                    * binomial(b, j)
                    * x0.powi((a + 1 - i) as i32)
                    * dx.powi(i as i32)
                    * y0.powi((b - j) as i32)
                    * dy.powi(j as i32);
                edge += coef / (i + j + 1) as f64;
            }
        }
        total += edge * dy / (a + 1) as f64;
    }
    total
}
