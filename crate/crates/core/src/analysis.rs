//! Error norms, dG and streamline-diffusion norms, convergence tables and the
//! inf-sup diagnostic.
//!
//! The dG norm of `v` is
//!
//! ```text
//! |||v|||^2 = int_J |sqrt(a) grad v|^2 + |sqrt(sigma) [v]|^2_Gamma dt
//!           + 1/2 |v+_0|^2 + sum_n 1/2 |[v]_n|^2 + 1/2 |v-_N|^2
//! ```
//!
//! where the time jumps include the interior nodes of local partitions. The
//! streamline-diffusion norm adds `sum lambda |d_t v|^2` with
//! `lambda = tau / p_hat^2`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::assembly::{
    assemble_slab_coupling, assemble_slab_terms, horizontal_gram, slab_a_bars, slab_penalties, weighted_tr_mul,
    DiscretizationOptions, FacePenalty, PrevTrace, SlabSpace, Terms,
};
use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::mesh::SpatialMesh;
use crate::problem::{ExactSolution, ProblemData};
use crate::quadrature::{horizontal_face_rule, line_rule, prism_rule, segment_time_rule};
use crate::solver::DiscreteSolution;
use crate::sparse::CsrMatrix;
use crate::timegrid::TimeGrid;

/// Default extra quadrature order for error integrals, on top of `2p`.
pub const DEFAULT_ERROR_ORDER_OFFSET: usize = 4;

/// Default DOF cap of the dense inf-sup diagnostic.
pub const DEFAULT_INFSUP_CAP: usize = 5000;

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct DgNormParts {
    /// `int_J |sqrt(a) grad v|^2`.
    pub energy: f64,
    /// `int_J |sqrt(sigma) [v]|^2` over interior and boundary faces.
    pub face_jumps: f64,
    /// `1/2 |v+_0|^2`.
    pub initial: f64,
    /// `1/2 |[v]|^2` summed over interior slab and sub-step nodes.
    pub time_jumps: f64,
    /// `1/2 |v-_N|^2`.
    pub terminal: f64,
}

impl DgNormParts {
    pub fn total_squared(&self) -> f64 {
        self.energy + self.face_jumps + self.initial + self.time_jumps + self.terminal
    }

    pub fn norm(&self) -> f64 {
        self.total_squared().sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ErrorReport {
    pub e_l2l2: f64,
    /// Broken gradient seminorm.
    pub e_l2h1: f64,
    /// Broken `L2(H1)` norm including the `L2` part.
    pub e_l2h1_full: f64,
    /// Maximum of the spatial `L2` error over the sampled times.
    pub e_linfl2: f64,
    pub dg_norm_of_error: f64,
    pub dg_parts: DgNormParts,
    pub dofs: usize,
    pub h_max: f64,
    pub tau_max: f64,
}

struct ElementErrors {
    l2: f64,
    h1: f64,
}

/// Errors of `sol` against `exact`. Prism integrals use order `2p + offset`.
pub fn error_norms(
    mesh: &SpatialMesh,
    sol: &DiscreteSolution,
    data: &ProblemData,
    exact: &ExactSolution,
    disc: &DiscretizationOptions,
    order_offset: usize,
) -> Result<ErrorReport> {
    let items: Vec<(usize, usize)> = sol
        .spaces
        .iter()
        .enumerate()
        .flat_map(|(n, s)| (0..s.elements.len()).map(move |i| (n, i)))
        .collect();
    let per: Vec<ElementErrors> = items
        .par_iter()
        .map(|&(n, i)| {
            let st = &sol.spaces[n].elements[i];
            let rule = prism_rule(mesh, st.element, st.t0, st.t1, 2 * st.degree() + order_offset);
            let tab = st.basis.tabulate(&rule.points, true);
            let c = DVector::from_column_slice(sol.local(n, i));
            let (u, ux, uy) = (&tab.values * &c, &tab.dx * &c, &tab.dy * &c);
            let mut l2 = 0.0;
            let mut h1 = 0.0;
            for (q, (p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                let e = (exact.u)(p[0], p[1], p[2]) - u[q];
                let g = (exact.grad)(p[0], p[1], p[2]);
                let (ex, ey) = (g[0] - ux[q], g[1] - uy[q]);
                l2 += w * e * e;
                h1 += w * (ex * ex + ey * ey);
            }
            ElementErrors { l2, h1 }
        })
        .collect();
    let l2: f64 = per.iter().map(|e| e.l2).sum();
    let h1: f64 = per.iter().map(|e| e.h1).sum();

    let linf = linf_l2_error(mesh, sol, exact, order_offset);
    let parts = dg_norm_parts(mesh, sol, data, Some(exact), disc, order_offset)?;

    Ok(ErrorReport {
        e_l2l2: l2.sqrt(),
        e_l2h1: h1.sqrt(),
        e_l2h1_full: (l2 + h1).sqrt(),
        e_linfl2: linf,
        dg_norm_of_error: parts.norm(),
        dg_parts: parts,
        dofs: sol.total_dofs(),
        h_max: mesh.h_max,
        tau_max: sol.grid.tau_max(),
    })
}

/// Spatial `L2` error at time `t`, using the one-sided limit `minus`.
pub fn spatial_l2_error(
    mesh: &SpatialMesh,
    sol: &DiscreteSolution,
    exact: &ExactSolution,
    t: f64,
    minus: bool,
    order_offset: usize,
) -> f64 {
    let Some(n) = sol.grid.slab_at(t, minus) else {
        return f64::NAN;
    };
    let space = &sol.spaces[n];
    (0..mesh.num_elements())
        .map(|e| {
            let i = space.locate_sub_step(e, t, minus);
            let st = &space.elements[i];
            let rule = horizontal_face_rule(mesh, e, t, 2 * st.degree() + order_offset);
            let tab = st.basis.tabulate(&rule.points, false);
            let u = &tab.values * DVector::from_column_slice(sol.local(n, i));
            rule.points
                .iter()
                .zip(&rule.weights)
                .enumerate()
                .map(|(q, (p, w))| {
                    let d = (exact.u)(p[0], p[1], p[2]) - u[q];
                    w * d * d
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

/// Max of the spatial `L2` error over the slab nodes (minus side, plus side at
/// `t = 0`) and the temporal Gauss points of every sub-step. The sample times
/// use order `2p + 4` whatever the integration order, so that raising the
/// latter only sharpens the spatial integrals.
fn linf_l2_error(mesh: &SpatialMesh, sol: &DiscreteSolution, exact: &ExactSolution, order_offset: usize) -> f64 {
    let mut samples: Vec<(f64, bool)> = vec![(sol.grid.slabs[0].t_start, false)];
    for space in &sol.spaces {
        let mut times: Vec<f64> = Vec::new();
        for st in &space.elements {
            let (pts, _) = line_rule(st.t0, st.t1, 2 * st.degree() + DEFAULT_ERROR_ORDER_OFFSET);
            times.extend(pts);
            times.push(st.t1);
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        samples.extend(times.into_iter().map(|t| (t, true)));
    }
    samples
        .par_iter()
        .map(|&(t, minus)| spatial_l2_error(mesh, sol, exact, t, minus, order_offset))
        .reduce(|| 0.0, f64::max)
}

/// Components of the dG norm of `u - U` (or of `U` when `exact` is `None`),
/// evaluated pointwise by quadrature.
pub fn dg_norm_parts(
    mesh: &SpatialMesh,
    sol: &DiscreteSolution,
    data: &ProblemData,
    exact: Option<&ExactSolution>,
    disc: &DiscretizationOptions,
    order_offset: usize,
) -> Result<DgNormParts> {
    let ex_u = |x: f64, y: f64, t: f64| exact.map_or(0.0, |e| (e.u)(x, y, t));
    let ex_g = |x: f64, y: f64, t: f64| exact.map_or([0.0; 2], |e| (e.grad)(x, y, t));
    let mut parts = DgNormParts::default();
    let n_slabs = sol.spaces.len();
    for (n, space) in sol.spaces.iter().enumerate() {
        // energy
        parts.energy += (0..space.elements.len())
            .into_par_iter()
            .map(|i| {
                let st = &space.elements[i];
                let rule = prism_rule(mesh, st.element, st.t0, st.t1, 2 * st.degree() + order_offset);
                let tab = st.basis.tabulate(&rule.points, true);
                let c = DVector::from_column_slice(sol.local(n, i));
                let (ux, uy) = (&tab.dx * &c, &tab.dy * &c);
                rule.points
                    .iter()
                    .zip(&rule.weights)
                    .enumerate()
                    .map(|(q, (p, w))| {
                        let g = ex_g(p[0], p[1], p[2]);
                        let e = [g[0] - ux[q], g[1] - uy[q]];
                        let a = data.diffusion.at(p[0], p[1], p[2]);
                        let ae = [a[0][0] * e[0] + a[0][1] * e[1], a[1][0] * e[0] + a[1][1] * e[1]];
                        w * (ae[0] * e[0] + ae[1] * e[1])
                    })
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum::<f64>();

        // face jumps; the exact solution has no jumps across interior faces
        let a_bars = slab_a_bars(mesh, space, data);
        let penalties = slab_penalties(mesh, space, &a_bars, disc);
        parts.face_jumps += penalties
            .par_iter()
            .map(|fp: &FacePenalty| {
                let piece = &fp.piece;
                let (a, b) = mesh.face_points(piece.face);
                let s1 = &space.elements[piece.first];
                let pmax = piece
                    .second
                    .map_or(s1.degree(), |s| s1.degree().max(space.elements[s].degree()));
                let rule = segment_time_rule(a, b, piece.t0, piece.t1, 2 * pmax + order_offset);
                let v1 = &s1.basis.tabulate(&rule.points, false).values
                    * DVector::from_column_slice(sol.local(n, piece.first));
                let jump: Vec<f64> = match piece.second {
                    Some(s) => {
                        let v2 = &space.elements[s].basis.tabulate(&rule.points, false).values
                            * DVector::from_column_slice(sol.local(n, s));
                        (0..rule.len()).map(|q| v1[q] - v2[q]).collect()
                    }
                    None => rule
                        .points
                        .iter()
                        .enumerate()
                        .map(|(q, p)| ex_u(p[0], p[1], p[2]) - v1[q])
                        .collect(),
                };
                fp.sigma * rule.weights.iter().zip(&jump).map(|(w, j)| w * j * j).sum::<f64>()
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum::<f64>();

        // time jumps at the slab start and inside local partitions
        for e in 0..mesh.num_elements() {
            let steps = space.sub_steps(e);
            let first = space.first[e];
            for (j, st) in steps.iter().enumerate() {
                let i = first + j;
                let below: Option<(&SlabSpace, usize, usize)> = if j > 0 {
                    Some((space, n, i - 1))
                } else if n > 0 {
                    let ps = &sol.spaces[n - 1];
                    Some((ps, n - 1, ps.last(e)))
                } else {
                    None
                };
                let pb = below.map_or(0, |(s, _, k)| s.elements[k].degree());
                let rule = horizontal_face_rule(mesh, e, st.t0, 2 * st.degree().max(pb) + order_offset);
                let up = &st.basis.tabulate(&rule.points, false).values * DVector::from_column_slice(sol.local(n, i));
                let sq: f64 = match below {
                    Some((s, m, k)) => {
                        let lo = &s.elements[k].basis.tabulate(&rule.points, false).values
                            * DVector::from_column_slice(sol.local(m, k));
                        rule.weights
                            .iter()
                            .enumerate()
                            .map(|(q, w)| w * (up[q] - lo[q]).powi(2))
                            .sum()
                    }
                    None => rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .enumerate()
                        .map(|(q, (p, w))| w * (ex_u(p[0], p[1], p[2]) - up[q]).powi(2))
                        .sum(),
                };
                if below.is_some() {
                    parts.time_jumps += 0.5 * sq;
                } else {
                    parts.initial += 0.5 * sq;
                }
            }
            if n + 1 == n_slabs {
                let i = space.last(e);
                let st = &space.elements[i];
                let rule = horizontal_face_rule(mesh, e, st.t1, 2 * st.degree() + order_offset);
                let lo = &st.basis.tabulate(&rule.points, false).values * DVector::from_column_slice(sol.local(n, i));
                parts.terminal += 0.5
                    * rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .enumerate()
                        .map(|(q, (p, w))| w * (ex_u(p[0], p[1], p[2]) - lo[q]).powi(2))
                        .sum::<f64>();
            }
        }
    }
    Ok(parts)
}

/// All slab spaces of a grid with global unknown offsets.
#[derive(Clone, Debug)]
pub struct GlobalSpace {
    pub spaces: Vec<SlabSpace>,
    /// Offset of each slab's unknowns; last entry is the total.
    pub offsets: Vec<usize>,
}

impl GlobalSpace {
    pub fn build(mesh: &SpatialMesh, grid: &TimeGrid, spec: &BasisSpec) -> Result<Self> {
        let spaces = (0..grid.num_slabs())
            .map(|n| SlabSpace::build(mesh, grid, n, spec))
            .collect::<Result<Vec<_>>>()?;
        let mut offsets = vec![0];
        for s in &spaces {
            offsets.push(offsets.last().unwrap() + s.ndofs);
        }
        Ok(GlobalSpace { spaces, offsets })
    }

    pub fn ndofs(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Splits a global vector into per-slab coefficient vectors.
    pub fn split(&self, v: &[f64]) -> Vec<Vec<f64>> {
        self.offsets.windows(2).map(|w| v[w[0]..w[1]].to_vec()).collect()
    }
}

fn push_block(out: &mut Vec<(usize, usize, f64)>, r0: usize, c0: usize, m: &DMatrix<f64>, scale: f64) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out.push((r0 + i, c0 + j, scale * m[(i, j)]));
        }
    }
}

fn push_csr(out: &mut Vec<(usize, usize, f64)>, r0: usize, c0: usize, m: &CsrMatrix) {
    out.extend(m.triplets().into_iter().map(|(i, j, v)| (r0 + i, c0 + j, v)));
}

/// Global space-time bilinear form `B(u, v)` (rows are test functions).
pub fn global_bilinear_form(
    mesh: &SpatialMesh,
    gs: &GlobalSpace,
    data: &ProblemData,
    disc: &DiscretizationOptions,
) -> Result<CsrMatrix> {
    let terms = Terms {
        rhs: false,
        ..Terms::ALL
    };
    let mut entries = Vec::new();
    for (n, space) in gs.spaces.iter().enumerate() {
        let sys = assemble_slab_terms(mesh, space, data, &PrevTrace::Zero, terms, disc)?;
        push_csr(&mut entries, gs.offsets[n], gs.offsets[n], &sys.matrix);
        if n > 0 {
            let c = assemble_slab_coupling(mesh, &gs.spaces[n - 1], space, disc);
            push_csr(&mut entries, gs.offsets[n], gs.offsets[n - 1], &c);
        }
    }
    Ok(CsrMatrix::from_triplets(gs.ndofs(), gs.ndofs(), entries))
}

/// Gram matrix of the dG norm; with `streamline` the streamline-diffusion
/// norm.
pub fn dg_norm_gram(
    mesh: &SpatialMesh,
    gs: &GlobalSpace,
    data: &ProblemData,
    disc: &DiscretizationOptions,
    streamline: bool,
) -> Result<CsrMatrix> {
    let spatial = Terms {
        time_derivative: false,
        stiffness: true,
        face_consistency: false,
        face_penalty: true,
        initial_trace: false,
        local_jumps: false,
        rhs: false,
    };
    let mut entries = Vec::new();
    let last_slab = gs.spaces.len() - 1;
    for (n, space) in gs.spaces.iter().enumerate() {
        let off = gs.offsets[n];
        let sys = assemble_slab_terms(mesh, space, data, &PrevTrace::Zero, spatial, disc)?;
        push_csr(&mut entries, off, off, &sys.matrix);

        for e in 0..mesh.num_elements() {
            let first = space.first[e];
            for j in 0..space.sub_steps(e).len() {
                let i = first + j;
                let st = &space.elements[i];
                let below = if j > 0 {
                    Some((off, &space.elements[i - 1]))
                } else if n > 0 {
                    let ps = &gs.spaces[n - 1];
                    Some((gs.offsets[n - 1], &ps.elements[ps.last(e)]))
                } else {
                    None
                };
                let pb = below.map_or(0, |(_, s)| s.degree());
                let rule = horizontal_face_rule(mesh, e, st.t0, 2 * st.degree().max(pb) + disc.quad_order_offset);
                let uu = horizontal_gram(&st.basis, &st.basis, &rule, st.t0, st.t0);
                push_block(&mut entries, off + st.offset, off + st.offset, &uu, 0.5);
                if let Some((boff, lo)) = below {
                    let ll = horizontal_gram(&lo.basis, &lo.basis, &rule, lo.t1, lo.t1);
                    let ul = horizontal_gram(&st.basis, &lo.basis, &rule, st.t0, lo.t1);
                    push_block(&mut entries, boff + lo.offset, boff + lo.offset, &ll, 0.5);
                    push_block(&mut entries, off + st.offset, boff + lo.offset, &ul, -0.5);
                    push_block(&mut entries, boff + lo.offset, off + st.offset, &ul.transpose(), -0.5);
                }
            }
            if n == last_slab {
                let st = &space.elements[space.last(e)];
                let rule = horizontal_face_rule(mesh, e, st.t1, 2 * st.degree() + disc.quad_order_offset);
                let ll = horizontal_gram(&st.basis, &st.basis, &rule, st.t1, st.t1);
                push_block(&mut entries, off + st.offset, off + st.offset, &ll, 0.5);
            }
        }

        if streamline {
            let p_hat = p_hat(mesh, space);
            for (i, st) in space.elements.iter().enumerate() {
                let lambda = (st.t1 - st.t0) / (p_hat[i] * p_hat[i]) as f64;
                let rule = prism_rule(mesh, st.element, st.t0, st.t1, disc.order(st.degree()));
                let tab = st.basis.tabulate(&rule.points, true);
                let m = weighted_tr_mul(&tab.dt, &rule.weights, &tab.dt);
                push_block(&mut entries, off + st.offset, off + st.offset, &m, lambda);
            }
        }
    }
    Ok(CsrMatrix::from_triplets(gs.ndofs(), gs.ndofs(), entries))
}

/// `p_hat` of every space-time element in a slab: the largest degree among
/// itself and the elements sharing a vertical face piece with it.
pub fn p_hat(mesh: &SpatialMesh, space: &SlabSpace) -> Vec<usize> {
    let mut out: Vec<usize> = space.elements.iter().map(|s| s.degree()).collect();
    for piece in space.face_pieces(mesh) {
        if let Some(s) = piece.second {
            let m = space.elements[piece.first].degree().max(space.elements[s].degree());
            out[piece.first] = out[piece.first].max(m);
            out[s] = out[s].max(m);
        }
    }
    out
}

/// Dense lower Cholesky factor of a symmetric positive definite matrix.
fn cholesky_lower(g: &CsrMatrix, what: &str) -> Result<DMatrix<f64>> {
    let d = g.to_dense();
    let sym = (&d + d.transpose()) * 0.5;
    sym.cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::Diagnostic(format!("{what} Gram matrix is not positive definite")))
}

/// `min_v max_w B(v, w) / (|||v|||_s |||w|||_s)` computed as the smallest
/// singular value of `L^{-1} B L^{-T}` with `G_s = L L^T`.
pub fn infsup_estimate(
    mesh: &SpatialMesh,
    grid: &TimeGrid,
    spec: &BasisSpec,
    data: &ProblemData,
    disc: &DiscretizationOptions,
    cap: usize,
) -> Result<f64> {
    let gs = GlobalSpace::build(mesh, grid, spec)?;
    if gs.ndofs() > cap {
        return Err(Error::Diagnostic(format!(
            "inf-sup diagnostic refused: {} unknowns exceed the cap of {cap}",
            gs.ndofs()
        )));
    }
    let b = global_bilinear_form(mesh, &gs, data, disc)?.to_dense();
    let g = dg_norm_gram(mesh, &gs, data, disc, true)?;
    let l = cholesky_lower(&g, "streamline-diffusion")?;
    let lb = l
        .solve_lower_triangular(&b)
        .ok_or_else(|| Error::Diagnostic("singular Cholesky factor".into()))?;
    let m = l
        .solve_lower_triangular(&lb.transpose())
        .ok_or_else(|| Error::Diagnostic("singular Cholesky factor".into()))?
        .transpose();
    let sv = m.singular_values();
    Ok(sv.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `B(v, v) / |||v|||^2`.
pub fn rayleigh_quotient(b: &CsrMatrix, gram: &CsrMatrix, v: &[f64]) -> f64 {
    b.bilinear(v, v) / gram.bilinear(v, v)
}

/// One row of a convergence table.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub report: ErrorReport,
    pub eoc_l2l2: Option<f64>,
    pub eoc_l2h1: Option<f64>,
    pub eoc_linfl2: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

pub const CSV_HEADER: &str = "level,h_max,tau_max,dofs,e_L2L2,eoc_L2L2,e_L2H1,eoc_L2H1,e_LinfL2,eoc_LinfL2,dg_norm";

/// `log(e_prev / e) / log(h_prev / h)`.
pub fn eoc_value(e_prev: f64, e: f64, h_prev: f64, h: f64) -> f64 {
    (e_prev / e).ln() / (h_prev / h).ln()
}

/// Convergence table with rates; `h` must decrease strictly.
pub fn eoc(reports: &[ErrorReport]) -> Result<ConvergenceTable> {
    for w in reports.windows(2) {
        if !(w[1].h_max < w[0].h_max) {
            return Err(Error::InvalidArgument(format!(
                "mesh sizes must decrease strictly, got {} then {}",
                w[0].h_max, w[1].h_max
            )));
        }
    }
    let rows = reports
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let prev = k.checked_sub(1).map(|j| &reports[j]);
            let rate = |f: fn(&ErrorReport) -> f64| prev.map(|p| eoc_value(f(p), f(r), p.h_max, r.h_max));
            ConvergenceRow {
                level: k,
                report: r.clone(),
                eoc_l2l2: rate(|r| r.e_l2l2),
                eoc_l2h1: rate(|r| r.e_l2h1),
                eoc_linfl2: rate(|r| r.e_linfl2),
            }
        })
        .collect();
    Ok(ConvergenceTable { rows })
}

impl ConvergenceTable {
    /// Rows without rates, for refinement families that do not vary `h`.
    pub fn without_eoc(reports: &[ErrorReport]) -> Self {
        ConvergenceTable {
            rows: reports
                .iter()
                .enumerate()
                .map(|(k, r)| ConvergenceRow {
                    level: k,
                    report: r.clone(),
                    eoc_l2l2: None,
                    eoc_l2h1: None,
                    eoc_linfl2: None,
                })
                .collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for row in &self.rows {
            let r = &row.report;
            s.push_str(&format!(
                "{},{:.6e},{:.6e},{},{:.6e},{},{:.6e},{},{:.6e},{},{:.6e}\n",
                row.level,
                r.h_max,
                r.tau_max,
                r.dofs,
                r.e_l2l2,
                opt(row.eoc_l2l2),
                r.e_l2h1,
                opt(row.eoc_l2h1),
                r.e_linfl2,
                opt(row.eoc_linfl2),
                r.dg_norm_of_error,
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(h: f64, e: f64) -> ErrorReport {
        ErrorReport {
            e_l2l2: e,
            e_l2h1: e,
            e_l2h1_full: e,
            e_linfl2: e,
            dg_norm_of_error: e,
            dg_parts: DgNormParts::default(),
            dofs: 1,
            h_max: h,
            tau_max: h,
        }
    }

    #[test]
    fn eoc_examples() {
        let t = eoc(&[report(0.2, 0.1), report(0.1, 0.025)]).unwrap();
        assert!((t.rows[1].eoc_l2l2.unwrap() - 2.0).abs() < 1e-14);
        assert!(t.rows[0].eoc_l2l2.is_none());
        let t = eoc(&[report(0.2, 0.1)]).unwrap();
        assert!(t.rows[0].eoc_l2h1.is_none());
        let t = eoc(&[report(0.2, 0.1), report(0.1, 0.1)]).unwrap();
        assert_eq!(t.rows[1].eoc_linfl2.unwrap(), 0.0);
        assert!(eoc(&[report(0.1, 0.1), report(0.2, 0.1)]).is_err());
        assert!(eoc(&[report(0.1, 0.1), report(0.1, 0.1)]).is_err());
    }

    #[test]
    fn csv_layout() {
        let t = eoc(&[report(0.2, 0.1), report(0.1, 0.025)]).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), 11);
        assert_eq!(lines[1].split(',').nth(5), Some(""));
        assert_eq!(lines[2].split(',').nth(5), Some("2.000000"));
    }
}
