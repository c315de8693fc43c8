//! Slab-wise assembly of the space-time interior penalty discretization.
//!
//! For slab `I_n` the unknown `U_n` satisfies, for every test function `V_n`,
//!
//! ```text
//! int_{I_n} (d_t U, V) + a(U, V) dt + (U+_{n-1}, V+_{n-1})
//!     + sum_K sum_{j>=2} ([U]_{n,j-1}, V+_{n,j-1})_K
//!   = int_{I_n} (f, V) - int_{Gamma_D} g_D ((a grad V).n - sigma V) ds dt
//!     + (U-_{n-1}, V+_{n-1})
//! ```
//!
//! where `a(., .)` is the symmetric interior penalty form with averages and
//! jumps across spatial faces and `sigma` the face-wise penalty.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::basis::{BasisSpec, ElementBasis, Tabulation};
use crate::error::{Error, Result};
use crate::mesh::{Point, SpatialMesh, SPACE_DIM};
use crate::problem::{spectral_norm, Diffusion, ProblemData};
use crate::quadrature::{horizontal_face_rule, line_rule, prism_rule, segment_time_rule, QuadRule};
use crate::sparse::{BlockAssembler, CsrMatrix};
use crate::timegrid::TimeGrid;

/// Default penalty constant.
pub const DEFAULT_C_SIGMA: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DiscretizationOptions {
    pub c_sigma: f64,
    /// Quadrature order is `2p + quad_order_offset`.
    pub quad_order_offset: usize,
    /// Extra order for source, boundary and initial data terms.
    pub data_order_offset: usize,
}

impl Default for DiscretizationOptions {
    fn default() -> Self {
        DiscretizationOptions {
            c_sigma: DEFAULT_C_SIGMA,
            quad_order_offset: 2,
            data_order_offset: 0,
        }
    }
}

impl DiscretizationOptions {
    pub fn order(&self, p: usize) -> usize {
        2 * p + self.quad_order_offset
    }

    pub fn data_order(&self, p: usize) -> usize {
        self.order(p) + self.data_order_offset
    }
}

/// A prismatic space-time element `I_{n,j} x K` with its basis and the
/// position of its first unknown in the slab system.
#[derive(Clone, Debug)]
pub struct StElement {
    pub element: usize,
    pub sub_step: usize,
    pub t0: f64,
    pub t1: f64,
    pub offset: usize,
    pub basis: ElementBasis,
}

impl StElement {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }
}

/// Space-time elements of one slab in unknown order: spatial elements in mesh
/// order, sub-steps innermost, basis index last.
#[derive(Clone, Debug)]
pub struct SlabSpace {
    pub slab: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub elements: Vec<StElement>,
    /// Index into `elements` of the first sub-step of each spatial element.
    pub first: Vec<usize>,
    pub ndofs: usize,
}

impl SlabSpace {
    pub fn build(mesh: &SpatialMesh, grid: &TimeGrid, slab: usize, spec: &BasisSpec) -> Result<Self> {
        let s = grid
            .slabs
            .get(slab)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown slab {slab}")))?;
        let mut layout = Vec::new();
        let mut first = Vec::with_capacity(mesh.num_elements());
        for e in 0..mesh.num_elements() {
            first.push(layout.len());
            let bp = s.breakpoints(e);
            for j in 0..bp.len() - 1 {
                layout.push((e, j, bp[j], bp[j + 1]));
            }
        }
        let bases: Vec<ElementBasis> = layout
            .par_iter()
            .map(|&(e, j, t0, t1)| {
                let set = spec.index_set(slab, e)?;
                ElementBasis::new(mesh, e, j, t0, t1, set)
            })
            .collect::<Result<_>>()?;
        let mut offset = 0;
        let elements = layout
            .into_iter()
            .zip(bases)
            .map(|((element, sub_step, t0, t1), basis)| {
                let st = StElement {
                    element,
                    sub_step,
                    t0,
                    t1,
                    offset,
                    basis,
                };
                offset += st.len();
                st
            })
            .collect();
        Ok(SlabSpace {
            slab,
            t_start: s.t_start,
            t_end: s.t_end,
            elements,
            first,
            ndofs: offset,
        })
    }

    pub fn sub_steps(&self, element: usize) -> &[StElement] {
        let start = self.first[element];
        let end = self.first.get(element + 1).copied().unwrap_or(self.elements.len());
        &self.elements[start..end]
    }

    /// Index into `elements` of the last sub-step of `element`.
    pub fn last(&self, element: usize) -> usize {
        self.first[element] + self.sub_steps(element).len() - 1
    }

    /// Sub-step of `element` containing `t`; at an interior breakpoint `minus`
    /// selects the earlier one.
    pub fn locate_sub_step(&self, element: usize, t: f64, minus: bool) -> usize {
        let steps = self.sub_steps(element);
        let k = steps.partition_point(|s| if minus { s.t1 < t } else { s.t1 <= t });
        self.first[element] + k.min(steps.len() - 1)
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.elements.iter().map(|s| s.len()).collect()
    }

    pub fn block_offsets(&self) -> Vec<usize> {
        self.elements.iter().map(|s| s.offset).collect()
    }

    /// Vertical face pieces: each face times every interval of the union of
    /// the incident elements' local partitions.
    pub fn face_pieces(&self, mesh: &SpatialMesh) -> Vec<FacePiece> {
        let mut out = Vec::new();
        for f in &mesh.faces {
            let e1 = f.elements.0;
            let mut bps: Vec<f64> = self.sub_steps(e1).iter().map(|s| s.t0).collect();
            if let Some(e2) = f.elements.1 {
                bps.extend(self.sub_steps(e2).iter().map(|s| s.t0));
            }
            bps.push(self.t_end);
            bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
            bps.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (self.t_end - self.t_start));
            for w in bps.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                out.push(FacePiece {
                    face: f.id,
                    t0: w[0],
                    t1: w[1],
                    first: self.locate_sub_step(e1, mid, false),
                    second: f.elements.1.map(|e2| self.locate_sub_step(e2, mid, false)),
                });
            }
        }
        out
    }
}

/// A vertical space-time face `F x (t0, t1)` between space-time elements.
/// `first` is on the side of `faces[face].elements.0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FacePiece {
    pub face: usize,
    pub t0: f64,
    pub t1: f64,
    pub first: usize,
    pub second: Option<usize>,
}

/// Data entering the penalty from one incident space-time element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyInput {
    /// `|sqrt(a)|_2^2` over the element, i.e. the largest spectral norm of `a`.
    pub a_bar: f64,
    pub p: usize,
    pub h: f64,
}

/// `C_sigma * max a_bar^2 (p + 1)(p + d) / h` over the incident elements.
pub fn penalty_value(c_sigma: f64, incident: &[PenaltyInput]) -> f64 {
    let d = SPACE_DIM;
    c_sigma
        * incident
            .iter()
            .map(|k| k.a_bar * k.a_bar * ((k.p + 1) * (k.p + d)) as f64 / k.h)
            .fold(0.0, f64::max)
}

/// Penalty on one face piece.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FacePenalty {
    pub piece: FacePiece,
    pub sigma: f64,
}

/// Trace of the solution at the start of the slab.
pub enum PrevTrace<'a> {
    /// Evaluated pointwise; used with `u_0` on the first slab.
    Function(&'a (dyn Fn(f64, f64) -> f64 + Sync)),
    /// `U-_{n-1}` from the previous slab's expansion.
    Discrete {
        space: &'a SlabSpace,
        coeffs: &'a [f64],
    },
    Zero,
}

impl PrevTrace<'_> {
    fn degree(&self, element: usize) -> usize {
        match self {
            PrevTrace::Discrete { space, .. } => space.elements[space.last(element)].degree(),
            _ => 0,
        }
    }

    /// Values at spatial points of `element` (the `t` component is ignored).
    pub fn values(&self, element: usize, points: &[[f64; 3]]) -> Vec<f64> {
        match self {
            PrevTrace::Function(f) => points.iter().map(|p| f(p[0], p[1])).collect(),
            PrevTrace::Discrete { space, coeffs } => {
                let st = &space.elements[space.last(element)];
                let pts: Vec<[f64; 3]> = points.iter().map(|p| [p[0], p[1], st.t1]).collect();
                let tab = st.basis.tabulate(&pts, false);
                let c = DVector::from_column_slice(&coeffs[st.offset..st.offset + st.len()]);
                (tab.values * c).as_slice().to_vec()
            }
            PrevTrace::Zero => vec![0.0; points.len()],
        }
    }
}

/// Which terms of the slab form to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Terms {
    pub time_derivative: bool,
    pub stiffness: bool,
    pub face_consistency: bool,
    pub face_penalty: bool,
    /// `(U+, V+)` at the slab start.
    pub initial_trace: bool,
    /// Jumps between local sub-steps.
    pub local_jumps: bool,
    pub rhs: bool,
}

impl Terms {
    pub const ALL: Terms = Terms {
        time_derivative: true,
        stiffness: true,
        face_consistency: true,
        face_penalty: true,
        initial_trace: true,
        local_jumps: true,
        rhs: true,
    };

    /// The spatial form `a(u, v)` integrated over the slab.
    pub const SPATIAL: Terms = Terms {
        time_derivative: false,
        stiffness: true,
        face_consistency: true,
        face_penalty: true,
        initial_trace: false,
        local_jumps: false,
        rhs: false,
    };
}

#[derive(Clone, Debug)]
pub struct SlabSystem {
    pub slab: usize,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Sizes of the element blocks, in unknown order.
    pub block_sizes: Vec<usize>,
    pub penalties: Vec<FacePenalty>,
}

impl SlabSystem {
    pub fn ndofs(&self) -> usize {
        self.rhs.len()
    }
}

/// Rows scaled by the quadrature weights.
fn weighted(m: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (q, wq) in w.iter().enumerate() {
        out.row_mut(q).scale_mut(*wq);
    }
    out
}

/// `a grad(phi)` components at each point: returns `(flux_x, flux_y)`.
fn fluxes(tab: &Tabulation, diffusion: &Diffusion, points: &[[f64; 3]]) -> (DMatrix<f64>, DMatrix<f64>) {
    match diffusion {
        Diffusion::Constant(a) => (
            &tab.dx * a[0][0] + &tab.dy * a[0][1],
            &tab.dx * a[1][0] + &tab.dy * a[1][1],
        ),
        Diffusion::Field(f) => {
            let mut fx = tab.dx.clone();
            let mut fy = tab.dy.clone();
            for (q, p) in points.iter().enumerate() {
                let a = f(p[0], p[1], p[2]);
                for j in 0..tab.dx.ncols() {
                    let (gx, gy) = (tab.dx[(q, j)], tab.dy[(q, j)]);
                    fx[(q, j)] = a[0][0] * gx + a[0][1] * gy;
                    fy[(q, j)] = a[1][0] * gx + a[1][1] * gy;
                }
            }
            (fx, fy)
        }
    }
}

/// Normal flux `(a grad phi) . n` at each point.
fn normal_flux(tab: &Tabulation, diffusion: &Diffusion, points: &[[f64; 3]], n: [f64; 2]) -> DMatrix<f64> {
    match diffusion {
        Diffusion::Constant(a) => {
            let an = [a[0][0] * n[0] + a[0][1] * n[1], a[1][0] * n[0] + a[1][1] * n[1]];
            &tab.dx * an[0] + &tab.dy * an[1]
        }
        Diffusion::Field(f) => {
            let mut out = tab.dx.clone();
            for (q, p) in points.iter().enumerate() {
                let a = f(p[0], p[1], p[2]);
                let an = [a[0][0] * n[0] + a[0][1] * n[1], a[1][0] * n[0] + a[1][1] * n[1]];
                for j in 0..out.ncols() {
                    out[(q, j)] = an[0] * tab.dx[(q, j)] + an[1] * tab.dy[(q, j)];
                }
            }
            out
        }
    }
}

/// Largest spectral norm of the diffusion over the given points.
pub fn a_bar(diffusion: &Diffusion, points: &[[f64; 3]]) -> f64 {
    match diffusion {
        Diffusion::Constant(a) => spectral_norm(a),
        Diffusion::Field(f) => points
            .iter()
            .map(|p| spectral_norm(&f(p[0], p[1], p[2])))
            .fold(0.0, f64::max),
    }
}

fn inside_polygon(poly: &[Point], p: Point) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Points where `a_bar` is sampled on a space-time element: a Gauss grid on
/// the bounding box of `K` restricted to `K`, plus the centroid, at Gauss
/// times. They depend only on the geometry of `K`, not on how its boundary is
/// subdivided into faces.
pub fn a_bar_points(mesh: &SpatialMesh, element: usize, t0: f64, t1: f64, p: usize) -> Vec<[f64; 3]> {
    let el = &mesh.elements[element];
    let poly = mesh.polygon(element);
    let [x0, x1, y0, y1] = el.bbox;
    let n = p + 2;
    let (xs, _) = line_rule(x0, x1, 2 * n - 1);
    let (ys, _) = line_rule(y0, y1, 2 * n - 1);
    let (ts, _) = line_rule(t0, t1, 2 * n - 1);
    let mut space: Vec<Point> = vec![el.centroid];
    for &x in &xs {
        for &y in &ys {
            if inside_polygon(&poly, [x, y]) {
                space.push([x, y]);
            }
        }
    }
    ts.iter()
        .flat_map(|&t| space.iter().map(move |s| [s[0], s[1], t]))
        .collect()
}

struct VolumeOut {
    blocks: Vec<(usize, usize, DMatrix<f64>)>,
    rhs: DVector<f64>,
    a_bar: f64,
}

fn volume_contribution(
    mesh: &SpatialMesh,
    space: &SlabSpace,
    idx: usize,
    data: &ProblemData,
    prev: &PrevTrace,
    terms: Terms,
    opts: &DiscretizationOptions,
) -> VolumeOut {
    let st = &space.elements[idx];
    let p = st.degree();
    let m = st.len();
    let rule = prism_rule(mesh, st.element, st.t0, st.t1, opts.order(p));
    let mut blocks = Vec::new();
    let mut rhs = DVector::zeros(m);
    let abar = match &data.diffusion {
        Diffusion::Constant(a) => spectral_norm(a),
        d => a_bar(d, &a_bar_points(mesh, st.element, st.t0, st.t1, p)),
    };

    if terms.time_derivative || terms.stiffness || terms.rhs {
        let tab = st.basis.tabulate(&rule.points, true);
        let mut local = DMatrix::zeros(m, m);
        if terms.time_derivative {
            let wv = weighted(&tab.values, &rule.weights);
            local += wv.tr_mul(&tab.dt);
        }
        if terms.stiffness {
            let (fx, fy) = fluxes(&tab, &data.diffusion, &rule.points);
            local += weighted(&tab.dx, &rule.weights).tr_mul(&fx);
            local += weighted(&tab.dy, &rule.weights).tr_mul(&fy);
        }
        if terms.time_derivative || terms.stiffness {
            blocks.push((idx, idx, local));
        }
        if terms.rhs {
            if opts.data_order_offset == 0 {
                let f = DVector::from_iterator(
                    rule.len(),
                    rule.points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(q, w)| w * (data.source)(q[0], q[1], q[2])),
                );
                rhs += tab.values.tr_mul(&f);
            } else {
                let drule = prism_rule(mesh, st.element, st.t0, st.t1, opts.data_order(p));
                let dtab = st.basis.tabulate(&drule.points, false);
                let f = DVector::from_iterator(
                    drule.len(),
                    drule
                        .points
                        .iter()
                        .zip(&drule.weights)
                        .map(|(q, w)| w * (data.source)(q[0], q[1], q[2])),
                );
                rhs += dtab.values.tr_mul(&f);
            }
        }
    }

    if st.sub_step == 0 && (terms.initial_trace || terms.rhs) {
        let order = 2 * p.max(prev.degree(st.element)) + opts.quad_order_offset;
        let hrule = horizontal_face_rule(mesh, st.element, st.t0, order);
        let tab = st.basis.tabulate(&hrule.points, false);
        let wt = weighted(&tab.values, &hrule.weights);
        if terms.initial_trace {
            blocks.push((idx, idx, wt.tr_mul(&tab.values)));
        }
        if terms.rhs {
            let drule;
            let (rule_ref, wt_ref) = if opts.data_order_offset == 0 {
                (&hrule, wt)
            } else {
                drule = horizontal_face_rule(mesh, st.element, st.t0, order + opts.data_order_offset);
                let t = st.basis.tabulate(&drule.points, false);
                (&drule, weighted(&t.values, &drule.weights))
            };
            let prev_vals = DVector::from_vec(prev.values(st.element, &rule_ref.points));
            rhs += wt_ref.tr_mul(&prev_vals);
        }
    }

    if st.sub_step > 0 && terms.local_jumps {
        for (r, c, b) in time_jump_blocks(mesh, space, idx, opts) {
            blocks.push((r, c, b));
        }
    }

    VolumeOut {
        blocks,
        rhs,
        a_bar: abar,
    }
}

/// `([u]_{n,j-1}, v+_{n,j-1})_K` at the lower node of sub-step `idx`:
/// `+M(phi_j+, phi_j+)` on the diagonal and `-M(phi_j+, phi_{j-1}-)` coupling
/// to the predecessor.
fn time_jump_blocks(
    mesh: &SpatialMesh,
    space: &SlabSpace,
    idx: usize,
    opts: &DiscretizationOptions,
) -> Vec<(usize, usize, DMatrix<f64>)> {
    let cur = &space.elements[idx];
    let prev = &space.elements[idx - 1];
    debug_assert_eq!(cur.element, prev.element);
    let order = 2 * cur.degree().max(prev.degree()) + opts.quad_order_offset;
    let rule = horizontal_face_rule(mesh, cur.element, cur.t0, order);
    let tc = cur.basis.tabulate(&rule.points, false).values;
    let tp = prev.basis.tabulate(&rule.points, false).values;
    let wc = weighted(&tc, &rule.weights);
    vec![(idx, idx, wc.tr_mul(&tc)), (idx, idx - 1, -wc.tr_mul(&tp))]
}

/// Time-jump blocks of one spatial element's local sub-steps, as
/// `(row block, column block, matrix)` with block indices into
/// `space.elements`. Empty when the element has a single sub-step.
pub fn assemble_time_jump_terms(
    mesh: &SpatialMesh,
    space: &SlabSpace,
    element: usize,
    opts: &DiscretizationOptions,
) -> Vec<(usize, usize, DMatrix<f64>)> {
    let first = space.first[element];
    let n = space.sub_steps(element).len();
    (first + 1..first + n)
        .flat_map(|idx| time_jump_blocks(mesh, space, idx, opts))
        .collect()
}

struct FaceOut {
    blocks: Vec<(usize, usize, DMatrix<f64>)>,
    rhs: Vec<(usize, DVector<f64>)>,
}

#[allow(clippy::too_many_arguments)]
fn face_contribution(
    mesh: &SpatialMesh,
    space: &SlabSpace,
    piece: &FacePiece,
    sigma: f64,
    data: &ProblemData,
    terms: Terms,
    opts: &DiscretizationOptions,
) -> FaceOut {
    let face = &mesh.faces[piece.face];
    let (a, b) = mesh.face_points(piece.face);
    let sides: Vec<(usize, f64)> = std::iter::once((piece.first, 1.0))
        .chain(piece.second.map(|s| (s, -1.0)))
        .collect();
    let pmax = sides.iter().map(|(s, _)| space.elements[*s].degree()).max().unwrap();
    let rule = segment_time_rule(a, b, piece.t0, piece.t1, opts.order(pmax));
    let n = face.normal;
    let alpha = if piece.second.is_some() { 0.5 } else { 1.0 };

    struct Side {
        st: usize,
        sign: f64,
        wv: DMatrix<f64>,
        v: DMatrix<f64>,
        flux: DMatrix<f64>,
        wflux: DMatrix<f64>,
    }
    let tabs: Vec<Side> = sides
        .iter()
        .map(|&(st, sign)| {
            let tab = space.elements[st].basis.tabulate(&rule.points, true);
            let flux = normal_flux(&tab, &data.diffusion, &rule.points, n);
            Side {
                st,
                sign,
                wv: weighted(&tab.values, &rule.weights),
                wflux: weighted(&flux, &rule.weights),
                v: tab.values,
                flux,
            }
        })
        .collect();

    let mut blocks = Vec::new();
    if terms.face_consistency || terms.face_penalty {
        for r in &tabs {
            for c in &tabs {
                let mut blk = DMatrix::zeros(r.v.ncols(), c.v.ncols());
                if terms.face_consistency {
                    blk -= r.wv.tr_mul(&c.flux) * (alpha * r.sign);
                    blk -= r.wflux.tr_mul(&c.v) * (alpha * c.sign);
                }
                if terms.face_penalty {
                    blk += r.wv.tr_mul(&c.v) * (sigma * r.sign * c.sign);
                }
                blocks.push((r.st, c.st, blk));
            }
        }
    }

    let mut rhs = Vec::new();
    if terms.rhs && face.is_boundary() {
        let s = &tabs[0];
        let pmax = space.elements[s.st].degree();
        let (wv, wflux, g) = if opts.data_order_offset == 0 {
            let g = DVector::from_iterator(
                rule.len(),
                rule.points.iter().map(|q| (data.dirichlet)(q[0], q[1], q[2])),
            );
            (s.wv.clone(), s.wflux.clone(), g)
        } else {
            let drule = segment_time_rule(a, b, piece.t0, piece.t1, opts.data_order(pmax));
            let tab = space.elements[s.st].basis.tabulate(&drule.points, true);
            let flux = normal_flux(&tab, &data.diffusion, &drule.points, n);
            let g = DVector::from_iterator(
                drule.len(),
                drule.points.iter().map(|q| (data.dirichlet)(q[0], q[1], q[2])),
            );
            (
                weighted(&tab.values, &drule.weights),
                weighted(&flux, &drule.weights),
                g,
            )
        };
        let contrib = wv.tr_mul(&g) * sigma - wflux.tr_mul(&g);
        rhs.push((s.st, contrib));
    }
    FaceOut { blocks, rhs }
}

/// Penalty of every vertical face piece of the slab.
pub fn slab_penalties(
    mesh: &SpatialMesh,
    space: &SlabSpace,
    a_bars: &[f64],
    opts: &DiscretizationOptions,
) -> Vec<FacePenalty> {
    space
        .face_pieces(mesh)
        .into_iter()
        .map(|piece| {
            let mut inc = vec![PenaltyInput {
                a_bar: a_bars[piece.first],
                p: space.elements[piece.first].degree(),
                h: mesh.elements[space.elements[piece.first].element].h,
            }];
            if let Some(s) = piece.second {
                inc.push(PenaltyInput {
                    a_bar: a_bars[s],
                    p: space.elements[s].degree(),
                    h: mesh.elements[space.elements[s].element].h,
                });
            }
            FacePenalty {
                piece,
                sigma: penalty_value(opts.c_sigma, &inc),
            }
        })
        .collect()
}

/// `a_bar` of every space-time element in the slab.
pub fn slab_a_bars(mesh: &SpatialMesh, space: &SlabSpace, data: &ProblemData) -> Vec<f64> {
    if let Diffusion::Constant(a) = &data.diffusion {
        return vec![spectral_norm(a); space.elements.len()];
    }
    space
        .elements
        .par_iter()
        .map(|st| {
            a_bar(
                &data.diffusion,
                &a_bar_points(mesh, st.element, st.t0, st.t1, st.degree()),
            )
        })
        .collect()
}

/// Assembles the selected terms of the slab system.
pub fn assemble_slab_terms(
    mesh: &SpatialMesh,
    space: &SlabSpace,
    data: &ProblemData,
    prev: &PrevTrace,
    terms: Terms,
    opts: &DiscretizationOptions,
) -> Result<SlabSystem> {
    if mesh.sub_triangulation.elements.len() != mesh.num_elements() {
        return Err(Error::Assembly("mesh has no sub-triangulation".into()));
    }
    let volume: Vec<VolumeOut> = (0..space.elements.len())
        .into_par_iter()
        .map(|idx| volume_contribution(mesh, space, idx, data, prev, terms, opts))
        .collect();
    let a_bars: Vec<f64> = volume.iter().map(|v| v.a_bar).collect();
    let penalties = slab_penalties(mesh, space, &a_bars, opts);
    if let Some(bad) = penalties.iter().find(|p| !(p.sigma > 0.0)) {
        return Err(Error::Assembly(format!(
            "non-positive penalty {} on face {}",
            bad.sigma, bad.piece.face
        )));
    }
    let faces: Vec<FaceOut> = if terms.face_consistency || terms.face_penalty || terms.rhs {
        penalties
            .par_iter()
            .map(|fp| face_contribution(mesh, space, &fp.piece, fp.sigma, data, terms, opts))
            .collect()
    } else {
        Vec::new()
    };

    let sizes = space.block_sizes();
    let mut asm = BlockAssembler::square(&sizes);
    let mut rhs = vec![0.0; space.ndofs];
    for (idx, v) in volume.iter().enumerate() {
        for (r, c, b) in &v.blocks {
            asm.add(*r, *c, b);
        }
        let off = space.elements[idx].offset;
        for (k, val) in v.rhs.iter().enumerate() {
            rhs[off + k] += val;
        }
    }
    for f in &faces {
        for (r, c, b) in &f.blocks {
            asm.add(*r, *c, b);
        }
        for (st, vals) in &f.rhs {
            let off = space.elements[*st].offset;
            for (k, val) in vals.iter().enumerate() {
                rhs[off + k] += val;
            }
        }
    }
    // keep every diagonal block present so the pattern is complete
    for (i, s) in sizes.iter().enumerate() {
        if asm.block(i, i).is_none() {
            asm.add(i, i, &DMatrix::zeros(*s, *s));
        }
    }
    Ok(SlabSystem {
        slab: space.slab,
        matrix: asm.into_csr(),
        rhs,
        block_sizes: sizes,
        penalties,
    })
}

/// Full slab system.
pub fn assemble_slab(
    mesh: &SpatialMesh,
    space: &SlabSpace,
    data: &ProblemData,
    prev: &PrevTrace,
    opts: &DiscretizationOptions,
) -> Result<SlabSystem> {
    assemble_slab_terms(mesh, space, data, prev, Terms::ALL, opts)
}

/// Coupling `-(u-_{n-1}, v+_{n-1})` between the last sub-steps of slab `n-1`
/// (columns) and the first sub-steps of slab `n` (rows).
pub fn assemble_slab_coupling(
    mesh: &SpatialMesh,
    prev: &SlabSpace,
    cur: &SlabSpace,
    opts: &DiscretizationOptions,
) -> CsrMatrix {
    let blocks: Vec<(usize, usize, DMatrix<f64>)> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let (r, c) = (cur.first[e], prev.last(e));
            let (sr, sc) = (&cur.elements[r], &prev.elements[c]);
            let order = 2 * sr.degree().max(sc.degree()) + opts.quad_order_offset;
            let rule = horizontal_face_rule(mesh, e, cur.t_start, order);
            let tr = sr.basis.tabulate(&rule.points, false).values;
            let pts: Vec<[f64; 3]> = rule.points.iter().map(|p| [p[0], p[1], sc.t1]).collect();
            let tc = sc.basis.tabulate(&pts, false).values;
            (r, c, -weighted(&tr, &rule.weights).tr_mul(&tc))
        })
        .collect();
    let mut asm = BlockAssembler::new(&cur.block_sizes(), &prev.block_sizes());
    for (r, c, b) in &blocks {
        asm.add(*r, *c, b);
    }
    asm.into_csr()
}

/// Mass-type Gram matrix `(phi_i, phi_j)` on a horizontal face rule, used by
/// diagnostics.
pub fn horizontal_gram(
    left: &ElementBasis,
    right: &ElementBasis,
    rule: &QuadRule,
    t_left: f64,
    t_right: f64,
) -> DMatrix<f64> {
    let pl: Vec<[f64; 3]> = rule.points.iter().map(|p| [p[0], p[1], t_left]).collect();
    let pr: Vec<[f64; 3]> = rule.points.iter().map(|p| [p[0], p[1], t_right]).collect();
    let tl = left.tabulate(&pl, false).values;
    let tr = right.tabulate(&pr, false).values;
    weighted(&tl, &rule.weights).tr_mul(&tr)
}

pub(crate) fn weighted_tr_mul(a: &DMatrix<f64>, w: &[f64], b: &DMatrix<f64>) -> DMatrix<f64> {
    weighted(a, w).tr_mul(b)
}
