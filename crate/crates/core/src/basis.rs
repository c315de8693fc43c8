//! Modal orthonormal bases on prismatic space-time elements.
//!
//! Every space-time element gets its own basis, defined in physical
//! coordinates: products of Legendre polynomials in the coordinates scaled to
//! the element's bounding box, restricted to one of three index sets and then
//! orthonormalized in the element `L2` inner product.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::SpatialMesh;
use crate::quadrature::{prism_rule, QuadRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexKind {
    /// Total degree `p` in `(x, y, t)`.
    #[serde(rename = "P")]
    TotalDegree,
    /// Total degree `p` in space times degree `p` in time.
    #[serde(rename = "PQ")]
    TimeTensorTotalSpace,
    /// Degree `p` in each of `x`, `y`, `t`.
    #[serde(rename = "Q")]
    FullTensor,
}

impl IndexKind {
    pub fn label(self) -> &'static str {
        match self {
            IndexKind::TotalDegree => "P",
            IndexKind::TimeTensorTotalSpace => "PQ",
            IndexKind::FullTensor => "Q",
        }
    }
}

impl std::str::FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" | "p" => Ok(IndexKind::TotalDegree),
            "PQ" | "pq" => Ok(IndexKind::TimeTensorTotalSpace),
            "Q" | "q" => Ok(IndexKind::FullTensor),
            other => Err(Error::InvalidArgument(format!(
                "unknown basis kind {other:?}, expected P, PQ or Q"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexSet {
    pub kind: IndexKind,
    pub p: usize,
}

impl IndexSet {
    pub fn new(kind: IndexKind, p: usize) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidArgument(format!(
                "polynomial degree must be >= 1, got {p}"
            )));
        }
        Ok(IndexSet { kind, p })
    }

    pub fn cardinality(&self) -> usize {
        let p = self.p;
        match self.kind {
            IndexKind::TotalDegree => (p + 1) * (p + 2) * (p + 3) / 6,
            IndexKind::TimeTensorTotalSpace => (p + 1) * (p + 1) * (p + 2) / 2,
            IndexKind::FullTensor => (p + 1).pow(3),
        }
    }

    pub fn contains(&self, [a, b, c]: [usize; 3]) -> bool {
        let p = self.p;
        match self.kind {
            IndexKind::TotalDegree => a + b + c <= p,
            IndexKind::TimeTensorTotalSpace => a + b <= p && c <= p,
            IndexKind::FullTensor => a <= p && b <= p && c <= p,
        }
    }

    /// Exponents `(a, b, c)` of `x^a y^b t^c`, ordered by total degree so the
    /// constant comes first and a smaller total-degree set is a prefix.
    pub fn exponents(&self) -> Vec<[usize; 3]> {
        let p = self.p;
        let mut out = Vec::with_capacity(self.cardinality());
        for total in 0..=3 * p {
            for c in 0..=total.min(p) {
                for b in 0..=(total - c).min(p) {
                    let a = total - c - b;
                    if self.contains([a, b, c]) {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }
}

/// Number of basis functions of an index set.
pub fn cardinality(kind: IndexKind, p: usize) -> Result<usize> {
    Ok(IndexSet::new(kind, p)?.cardinality())
}

/// Rounding applied to `mu * n` in linearly increasing degree maps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeRounding {
    #[default]
    Ceil,
    Floor,
    Nearest,
}

impl std::str::FromStr for DegreeRounding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ceil" => Ok(DegreeRounding::Ceil),
            "floor" => Ok(DegreeRounding::Floor),
            "nearest" => Ok(DegreeRounding::Nearest),
            other => Err(Error::InvalidArgument(format!(
                "unknown degree rounding {other:?}, expected ceil, floor or nearest"
            ))),
        }
    }
}

/// Polynomial degree of each space-time element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeMap {
    pub default: usize,
    /// Degree per slab, overriding `default`.
    #[serde(default)]
    pub per_slab: Vec<usize>,
    /// Degree per `(slab, element)`, overriding everything else.
    #[serde(default)]
    pub per_element: BTreeMap<(usize, usize), usize>,
}

impl DegreeMap {
    pub fn uniform(p: usize) -> Self {
        DegreeMap {
            default: p,
            per_slab: Vec::new(),
            per_element: BTreeMap::new(),
        }
    }

    pub fn per_slab(degrees: Vec<usize>) -> Self {
        DegreeMap {
            default: degrees.last().copied().unwrap_or(1),
            per_slab: degrees,
            per_element: BTreeMap::new(),
        }
    }

    /// `p_n = round(mu * n)` for slabs `n = 1..=num_slabs`, at least 1.
    pub fn linear(mu: f64, num_slabs: usize, rounding: DegreeRounding) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "degree slope must be positive, got {mu}"
            )));
        }
        let degrees = (1..=num_slabs)
            .map(|n| {
                let v = mu * n as f64;
                let r = match rounding {
                    DegreeRounding::Ceil => (v - 1e-12).ceil(),
                    DegreeRounding::Floor => (v + 1e-12).floor(),
                    DegreeRounding::Nearest => v.round(),
                };
                (r as usize).max(1)
            })
            .collect();
        Ok(DegreeMap::per_slab(degrees))
    }

    pub fn with_element(mut self, slab: usize, element: usize, p: usize) -> Self {
        self.per_element.insert((slab, element), p);
        self
    }

    pub fn degree(&self, slab: usize, element: usize) -> usize {
        self.per_element
            .get(&(slab, element))
            .or_else(|| self.per_slab.get(slab))
            .copied()
            .unwrap_or(self.default)
    }

    pub fn validate(&self) -> Result<()> {
        let all = std::iter::once(self.default)
            .chain(self.per_slab.iter().copied())
            .chain(self.per_element.values().copied());
        for p in all {
            if p < 1 {
                return Err(Error::InvalidArgument("polynomial degrees must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// Index-set kind plus degree distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub kind: IndexKind,
    pub degrees: DegreeMap,
}

impl BasisSpec {
    pub fn uniform(kind: IndexKind, p: usize) -> Self {
        BasisSpec {
            kind,
            degrees: DegreeMap::uniform(p),
        }
    }

    pub fn index_set(&self, slab: usize, element: usize) -> Result<IndexSet> {
        IndexSet::new(self.kind, self.degrees.degree(slab, element))
    }
}

/// Legendre values and first derivatives `P_0..=P_n` at `x`.
pub fn legendre_table(n: usize, x: f64, values: &mut [f64], derivs: &mut [f64]) {
    values[0] = 1.0;
    derivs[0] = 0.0;
    if n == 0 {
        return;
    }
    values[1] = x;
    derivs[1] = 1.0;
    for k in 2..=n {
        let kf = k as f64;
        values[k] = ((2.0 * kf - 1.0) * x * values[k - 1] - (kf - 1.0) * values[k - 2]) / kf;
        derivs[k] = derivs[k - 2] + (2.0 * kf - 1.0) * values[k - 1];
    }
}

/// Values and derivatives of a set of functions at a set of points, one row
/// per point and one column per function.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub values: DMatrix<f64>,
    pub dx: DMatrix<f64>,
    pub dy: DMatrix<f64>,
    pub dt: DMatrix<f64>,
}

/// Values and derivatives of every basis function at one point.
#[derive(Clone, Debug)]
pub struct PointValues {
    pub value: Vec<f64>,
    pub grad: Vec<[f64; 2]>,
    pub dt: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ElementBasis {
    pub element: usize,
    pub sub_step: usize,
    pub index_set: IndexSet,
    /// Bounding-box centre `(x, y, t)`.
    pub center: [f64; 3],
    /// Bounding-box half widths.
    pub half: [f64; 3],
    pub exponents: Vec<[usize; 3]>,
    /// Lower-triangular map from scaled Legendre products to the orthonormal
    /// basis: row `k` holds the expansion of function `k`.
    pub coeffs: DMatrix<f64>,
}

/// Scaled tensor Legendre products on a box, before orthonormalization.
#[derive(Clone, Debug)]
pub struct RawProducts {
    pub center: [f64; 3],
    pub half: [f64; 3],
    pub exponents: Vec<[usize; 3]>,
}

impl RawProducts {
    fn max_degree(&self) -> usize {
        self.exponents.iter().flat_map(|e| e.iter().copied()).max().unwrap_or(0)
    }

    /// Tabulates the raw functions. Derivatives are skipped when `derivatives`
    /// is false (the returned derivative matrices are then empty).
    pub fn tabulate(&self, points: &[[f64; 3]], derivatives: bool) -> Tabulation {
        let m = self.exponents.len();
        let n = self.max_degree();
        let np = points.len();
        let mut values = DMatrix::zeros(np, m);
        let (mut dx, mut dy, mut dt) = if derivatives {
            (DMatrix::zeros(np, m), DMatrix::zeros(np, m), DMatrix::zeros(np, m))
        } else {
            (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
        };
        let mut lv = vec![[0.0; 3]; n + 1];
        let mut ld = vec![[0.0; 3]; n + 1];
        let mut vbuf = vec![0.0; n + 1];
        let mut dbuf = vec![0.0; n + 1];
        for (q, p) in points.iter().enumerate() {
            for d in 0..3 {
                let s = (p[d] - self.center[d]) / self.half[d];
                legendre_table(n, s, &mut vbuf, &mut dbuf);
                for k in 0..=n {
                    lv[k][d] = vbuf[k];
                    ld[k][d] = dbuf[k] / self.half[d];
                }
            }
            for (j, &[a, b, c]) in self.exponents.iter().enumerate() {
                let (va, vb, vc) = (lv[a][0], lv[b][1], lv[c][2]);
                values[(q, j)] = va * vb * vc;
                if derivatives {
                    dx[(q, j)] = ld[a][0] * vb * vc;
                    dy[(q, j)] = va * ld[b][1] * vc;
                    dt[(q, j)] = va * vb * ld[c][2];
                }
            }
        }
        Tabulation { values, dx, dy, dt }
    }
}

/// Modified Gram–Schmidt in the discrete inner product given by `weights`,
/// applied to the columns of `values` with one re-orthogonalization pass.
///
/// Returns the lower-triangular matrix `C` whose row `k` expands orthonormal
/// function `k` in the input functions, or the index of the first function
/// whose remaining norm falls below the conditioning limit.
pub fn modified_gram_schmidt(
    values: &DMatrix<f64>,
    weights: &[f64],
) -> std::result::Result<DMatrix<f64>, (usize, f64)> {
    let m = values.ncols();
    let mut weighted = values.clone();
    for (q, w) in weights.iter().enumerate() {
        weighted.row_mut(q).scale_mut(*w);
    }
    let gram = values.transpose() * weighted;
    let mut coeffs = DMatrix::<f64>::zeros(m, m);
    // gram * coeffs.row(j)^T for the finished rows
    let mut projected = DMatrix::<f64>::zeros(m, m);
    let mut c = vec![0.0; m];
    for k in 0..m {
        c.iter_mut().for_each(|v| *v = 0.0);
        c[k] = 1.0;
        let original = gram[(k, k)];
        for _pass in 0..2 {
            for j in 0..k {
                let mut r = 0.0;
                for l in 0..=k {
                    r += projected[(l, j)] * c[l];
                }
                for l in 0..=j {
                    c[l] -= r * coeffs[(j, l)];
                }
            }
        }
        let mut norm2 = 0.0;
        for a in 0..=k {
            let mut s = 0.0;
            for b in 0..=k {
                s += gram[(a, b)] * c[b];
            }
            norm2 += c[a] * s;
        }
        if !(norm2 > 1e-14 * original) {
            return Err((k, norm2 / original));
        }
        let inv = 1.0 / norm2.sqrt();
        for l in 0..=k {
            coeffs[(k, l)] = c[l] * inv;
        }
        for a in 0..m {
            let mut s = 0.0;
            for l in 0..=k {
                s += gram[(a, l)] * coeffs[(k, l)];
            }
            projected[(a, k)] = s;
        }
    }
    Ok(coeffs)
}

impl ElementBasis {
    /// Orthonormal basis on the prism `element x (t0, t1)`.
    pub fn new(
        mesh: &SpatialMesh,
        element: usize,
        sub_step: usize,
        t0: f64,
        t1: f64,
        index_set: IndexSet,
    ) -> Result<Self> {
        let rule = prism_rule(mesh, element, t0, t1, 2 * index_set.p);
        Self::with_rule(mesh, element, sub_step, t0, t1, index_set, &rule)
    }

    /// Same as [`ElementBasis::new`] with an explicit quadrature rule, which
    /// must be exact to degree `2p` on the prism.
    pub fn with_rule(
        mesh: &SpatialMesh,
        element: usize,
        sub_step: usize,
        t0: f64,
        t1: f64,
        index_set: IndexSet,
        rule: &QuadRule,
    ) -> Result<Self> {
        let [x0, x1, y0, y1] = mesh.elements[element].bbox;
        let raw = RawProducts {
            center: [0.5 * (x0 + x1), 0.5 * (y0 + y1), 0.5 * (t0 + t1)],
            half: [0.5 * (x1 - x0), 0.5 * (y1 - y0), 0.5 * (t1 - t0)],
            exponents: index_set.exponents(),
        };
        if raw.half.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::BasisConditioning {
                element,
                sub_step,
                message: "degenerate bounding box".into(),
            });
        }
        let tab = raw.tabulate(&rule.points, false);
        let fail = |(k, ratio): (usize, f64)| Error::BasisConditioning {
            element,
            sub_step,
            message: format!("function {k} lost all but {ratio:.1e} of its norm; Gram matrix is numerically singular"),
        };
        let first = modified_gram_schmidt(&tab.values, &rule.weights).map_err(fail)?;
        // second pass on the tabulated functions removes the error that the
        // Gram-matrix formulation accumulates on ill-conditioned elements
        let values = &tab.values * first.transpose();
        let second = modified_gram_schmidt(&values, &rule.weights).map_err(fail)?;
        let coeffs = second * first;
        Ok(ElementBasis {
            element,
            sub_step,
            index_set,
            center: raw.center,
            half: raw.half,
            exponents: raw.exponents,
            coeffs,
        })
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.index_set.p
    }

    pub fn raw(&self) -> RawProducts {
        RawProducts {
            center: self.center,
            half: self.half,
            exponents: self.exponents.clone(),
        }
    }

    /// Values (and derivatives when requested) of the orthonormal functions.
    pub fn tabulate(&self, points: &[[f64; 3]], derivatives: bool) -> Tabulation {
        let raw = self.raw().tabulate(points, derivatives);
        let ct = self.coeffs.transpose();
        if derivatives {
            Tabulation {
                values: &raw.values * &ct,
                dx: &raw.dx * &ct,
                dy: &raw.dy * &ct,
                dt: &raw.dt * &ct,
            }
        } else {
            Tabulation {
                values: &raw.values * &ct,
                dx: raw.dx,
                dy: raw.dy,
                dt: raw.dt,
            }
        }
    }

    pub fn evaluate(&self, point: [f64; 3]) -> PointValues {
        let tab = self.tabulate(&[point], true);
        let m = self.len();
        PointValues {
            value: (0..m).map(|j| tab.values[(0, j)]).collect(),
            grad: (0..m).map(|j| [tab.dx[(0, j)], tab.dy[(0, j)]]).collect(),
            dt: (0..m).map(|j| tab.dt[(0, j)]).collect(),
        }
    }

    /// Value and spatial gradient of `sum_j coeffs[j] * phi_j` at a point.
    pub fn expand(&self, coeffs: &[f64], point: [f64; 3]) -> (f64, [f64; 2]) {
        let pv = self.evaluate(point);
        let mut u = 0.0;
        let mut g = [0.0; 2];
        for ((c, v), d) in coeffs.iter().zip(&pv.value).zip(&pv.grad) {
            u += c * v;
            g[0] += c * d[0];
            g[1] += c * d[1];
        }
        (u, g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rectangular_mesh, Rect};

    #[test]
    fn cardinalities() {
        assert_eq!(cardinality(IndexKind::TotalDegree, 1).unwrap(), 4);
        assert_eq!(cardinality(IndexKind::TotalDegree, 2).unwrap(), 10);
        assert_eq!(cardinality(IndexKind::FullTensor, 2).unwrap(), 27);
        assert_eq!(cardinality(IndexKind::TimeTensorTotalSpace, 1).unwrap(), 6);
        assert!(cardinality(IndexKind::TotalDegree, 0).is_err());
        for kind in [
            IndexKind::TotalDegree,
            IndexKind::TimeTensorTotalSpace,
            IndexKind::FullTensor,
        ] {
            for p in 1..8 {
                let s = IndexSet::new(kind, p).unwrap();
                assert_eq!(s.exponents().len(), s.cardinality());
            }
        }
    }

    #[test]
    fn total_degree_is_prefix_ordered() {
        let e = IndexSet::new(IndexKind::TotalDegree, 3).unwrap().exponents();
        assert_eq!(e[0], [0, 0, 0]);
        let degs: Vec<usize> = e.iter().map(|x| x.iter().sum()).collect();
        assert!(degs.windows(2).all(|w| w[0] <= w[1]));
        let e2 = IndexSet::new(IndexKind::TotalDegree, 2).unwrap().exponents();
        assert_eq!(&e[..e2.len()], &e2[..]);
    }

    #[test]
    fn first_function_is_normalized_constant() {
        let m = build_rectangular_mesh(2, 2, Rect::UNIT).unwrap();
        let b = ElementBasis::new(&m, 1, 0, 0.0, 0.3, IndexSet::new(IndexKind::TotalDegree, 2).unwrap()).unwrap();
        let expected = 1.0 / (0.25f64 * 0.3).sqrt();
        for pt in [[0.6, 0.1, 0.05], [0.9, 0.4, 0.29]] {
            let v = b.evaluate(pt);
            assert!((v.value[0] - expected).abs() < 1e-12);
            assert!(v.grad[0][0].abs() < 1e-12 && v.dt[0].abs() < 1e-12);
        }
    }

    #[test]
    fn unit_prism_gives_normalized_legendre() {
        let m = build_rectangular_mesh(1, 1, Rect::UNIT).unwrap();
        let b = ElementBasis::new(&m, 0, 0, 0.0, 1.0, IndexSet::new(IndexKind::TotalDegree, 1).unwrap()).unwrap();
        // raw functions are already orthogonal: C is diagonal with 1 and sqrt(3)
        for k in 0..4 {
            for l in 0..4 {
                let expected = match (k, l) {
                    (0, 0) => 1.0,
                    (a, b) if a == b => 3f64.sqrt(),
                    _ => 0.0,
                };
                assert!((b.coeffs[(k, l)] - expected).abs() < 1e-12, "{k} {l}");
            }
        }
        let raw = b.raw().tabulate(&[[0.3, 0.8, 0.5]], true);
        // the linear x mode: 2(x - 1/2)
        let jx = b.exponents.iter().position(|e| *e == [1, 0, 0]).unwrap();
        assert!((raw.dx[(0, jx)] - 2.0).abs() < 1e-15);
        assert_eq!(raw.dy[(0, jx)], 0.0);
        assert_eq!(raw.dt[(0, jx)], 0.0);
    }

    #[test]
    fn regram_is_idempotent() {
        let coords = vec![[0.0, 0.0], [1.0, 0.1], [1.3, 0.9], [0.4, 1.2], [-0.2, 0.6]];
        let m = crate::mesh::SpatialMesh::from_parts(coords, vec![vec![0, 1, 2, 3, 4]], &[]).unwrap();
        let set = IndexSet::new(IndexKind::TotalDegree, 3).unwrap();
        let b = ElementBasis::new(&m, 0, 0, 0.0, 0.2, set).unwrap();
        let rule = prism_rule(&m, 0, 0.0, 0.2, 6);
        let tab = b.tabulate(&rule.points, false);
        let c = modified_gram_schmidt(&tab.values, &rule.weights).unwrap();
        let id = DMatrix::<f64>::identity(set.cardinality(), set.cardinality());
        assert!((c - id).amax() < 1e-12);
    }

    #[test]
    fn singular_input_is_reported() {
        let m = build_rectangular_mesh(1, 1, Rect::UNIT).unwrap();
        let rule = prism_rule(&m, 0, 0.0, 1.0, 2);
        let mut vals = DMatrix::<f64>::zeros(rule.len(), 2);
        for q in 0..rule.len() {
            vals[(q, 0)] = rule.points[q][0];
            vals[(q, 1)] = 2.0 * rule.points[q][0];
        }
        assert_eq!(modified_gram_schmidt(&vals, &rule.weights).unwrap_err().0, 1);
    }

    #[test]
    fn linear_degree_map() {
        let d = DegreeMap::linear(1.5, 4, DegreeRounding::Ceil).unwrap();
        assert_eq!(d.per_slab, vec![2, 3, 5, 6]);
        let d = DegreeMap::linear(1.5, 4, DegreeRounding::Floor).unwrap();
        assert_eq!(d.per_slab, vec![1, 3, 4, 6]);
        let d = DegreeMap::linear(1.0, 3, DegreeRounding::Ceil).unwrap();
        assert_eq!(d.per_slab, vec![1, 2, 3]);
        assert_eq!(d.degree(7, 0), 3);
        let d = d.with_element(1, 5, 4);
        assert_eq!(d.degree(1, 5), 4);
        assert_eq!(d.degree(1, 4), 2);
    }
}
