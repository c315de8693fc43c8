//! Linear solvers for the slab systems and the time-marching driver.

use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::assembly::{assemble_slab, DiscretizationOptions, PrevTrace, SlabSpace, SlabSystem};
use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::mesh::SpatialMesh;
use crate::problem::ProblemData;
use crate::sparse::CsrMatrix;
use crate::timegrid::TimeGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Direct below `direct_threshold` unknowns, GMRES above.
    Auto,
    Direct,
    Gmres,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverOptions {
    pub kind: SolverKind,
    pub direct_threshold: usize,
    /// Relative residual tolerance of the iterative solver.
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            kind: SolverKind::Auto,
            direct_threshold: 200_000,
            tol: 1e-12,
            restart: 100,
            max_iter: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SolveStats {
    pub slab: usize,
    pub dofs: usize,
    pub method: String,
    pub iterations: usize,
    /// `|b - A x| / |b|`.
    pub residual: f64,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let nb = norm(b);
    if nb == 0.0 {
        norm(&r)
    } else {
        norm(&r) / nb
    }
}

/// Sparse LU solve.
pub fn solve_direct(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows;
    let mut triplets = Vec::with_capacity(a.nnz());
    for i in 0..n {
        for (j, v) in a.row(i) {
            triplets.push(Triplet::new(i, j, v));
        }
    }
    let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, a.ncols, &triplets).map_err(|e| Error::Solver {
        slab: usize::MAX,
        message: format!("could not build sparse matrix: {e:?}"),
        residual: f64::NAN,
    })?;
    let lu = m.sp_lu().map_err(|e| Error::Solver {
        slab: usize::MAX,
        message: format!("sparse LU failed: {e:?}"),
        residual: f64::NAN,
    })?;
    let mut x = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    lu.solve_in_place(&mut x);
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

/// Inverses of the diagonal blocks, applied as a right preconditioner.
pub struct BlockJacobi {
    offsets: Vec<usize>,
    inverses: Vec<DMatrix<f64>>,
}

impl BlockJacobi {
    pub fn new(a: &CsrMatrix, block_sizes: &[usize]) -> Result<Self> {
        let mut offsets = vec![0];
        for s in block_sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        let inverses = (0..block_sizes.len())
            .into_par_iter()
            .map(|k| {
                let (o, s) = (offsets[k], block_sizes[k]);
                let mut d = DMatrix::zeros(s, s);
                for i in 0..s {
                    for (j, v) in a.row(o + i) {
                        if j >= o && j < o + s {
                            d[(i, j - o)] = v;
                        }
                    }
                }
                d.try_inverse().ok_or_else(|| Error::Solver {
                    slab: usize::MAX,
                    message: format!("singular diagonal block {k}"),
                    residual: f64::NAN,
                })
            })
            .collect::<Result<_>>()?;
        Ok(BlockJacobi { offsets, inverses })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for (k, inv) in self.inverses.iter().enumerate() {
            let o = self.offsets[k];
            let s = inv.nrows();
            let v = inv * DVector::from_column_slice(&x[o..o + s]);
            y[o..o + s].copy_from_slice(v.as_slice());
        }
        y
    }
}

/// Restarted GMRES with right preconditioning. Returns the solution, the
/// number of iterations and the final relative residual.
pub fn gmres(a: &CsrMatrix, b: &[f64], precond: &BlockJacobi, opts: &SolverOptions) -> (Vec<f64>, usize, f64) {
    let n = b.len();
    let nb = norm(b);
    let mut x = vec![0.0; n];
    if nb == 0.0 {
        return (x, 0, 0.0);
    }
    let m = opts.restart.max(1);
    let mut iters = 0;
    let mut rel = 1.0;
    while iters < opts.max_iter {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        rel = beta / nb;
        if rel <= opts.tol {
            break;
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut h = DMatrix::<f64>::zeros(m + 1, m);
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let zk = precond.apply(&v[k]);
            let mut w = a.mul_vec(&zk);
            z.push(zk);
            for i in 0..=k {
                let hik: f64 = w.iter().zip(&v[i]).map(|(a, b)| a * b).sum();
                h[(i, k)] = hik;
                for (wj, vj) in w.iter_mut().zip(&v[i]) {
                    *wj -= hik * vj;
                }
            }
            let hn = norm(&w);
            h[(k + 1, k)] = hn;
            for i in 0..k {
                let t = cs[i] * h[(i, k)] + sn[i] * h[(i + 1, k)];
                h[(i + 1, k)] = -sn[i] * h[(i, k)] + cs[i] * h[(i + 1, k)];
                h[(i, k)] = t;
            }
            let d = h[(k, k)].hypot(h[(k + 1, k)]);
            cs[k] = h[(k, k)] / d;
            sn[k] = h[(k + 1, k)] / d;
            h[(k, k)] = d;
            h[(k + 1, k)] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iters += 1;
            k_used = k + 1;
            if (g[k + 1].abs() / nb) <= opts.tol || hn == 0.0 || iters >= opts.max_iter {
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[(i, j)] * y[j];
            }
            y[i] = s / h[(i, i)];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, zi) in x.iter_mut().zip(&z[j]) {
                *xi += yj * zi;
            }
        }
    }
    let ax = a.mul_vec(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    rel = if rel.is_finite() { norm(&r) / nb } else { rel };
    (x, iters, rel)
}

/// Solves one slab system according to the options.
pub fn solve_slab(sys: &SlabSystem, opts: &SolverOptions) -> Result<(Vec<f64>, SolveStats)> {
    let n = sys.ndofs();
    let direct = match opts.kind {
        SolverKind::Direct => true,
        SolverKind::Gmres => false,
        SolverKind::Auto => n <= opts.direct_threshold,
    };
    let start = Instant::now();
    let with_slab = |e: Error| match e {
        Error::Solver { message, residual, .. } => Error::Solver {
            slab: sys.slab,
            message,
            residual,
        },
        other => other,
    };
    let (x, method, iterations, residual) = if direct {
        let x = solve_direct(&sys.matrix, &sys.rhs).map_err(with_slab)?;
        let r = relative_residual(&sys.matrix, &x, &sys.rhs);
        (x, "direct", 0, r)
    } else {
        let pc = BlockJacobi::new(&sys.matrix, &sys.block_sizes).map_err(with_slab)?;
        let (x, it, r) = gmres(&sys.matrix, &sys.rhs, &pc, opts);
        if !(r <= opts.tol * 10.0) {
            return Err(Error::Solver {
                slab: sys.slab,
                message: format!("GMRES did not converge in {it} iterations"),
                residual: r,
            });
        }
        (x, "gmres", it, r)
    };
    if !residual.is_finite() || x.iter().any(|v| !v.is_finite()) || residual > 1e-6 {
        return Err(Error::Solver {
            slab: sys.slab,
            message: format!("{method} solve produced residual {residual:.3e}"),
            residual,
        });
    }
    Ok((
        x,
        SolveStats {
            slab: sys.slab,
            dofs: n,
            method: method.to_string(),
            iterations,
            residual,
            assembly_seconds: 0.0,
            solve_seconds: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Which one-sided limit to take at a time node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// Discrete solution over all slabs.
#[derive(Clone, Debug)]
pub struct DiscreteSolution {
    pub grid: TimeGrid,
    pub spaces: Vec<SlabSpace>,
    pub coeffs: Vec<Vec<f64>>,
    pub stats: Vec<SolveStats>,
}

impl DiscreteSolution {
    pub fn total_dofs(&self) -> usize {
        self.spaces.iter().map(|s| s.ndofs).sum()
    }

    /// Coefficients of space-time element `idx` of slab `slab`.
    pub fn local(&self, slab: usize, idx: usize) -> &[f64] {
        let st = &self.spaces[slab].elements[idx];
        &self.coeffs[slab][st.offset..st.offset + st.len()]
    }

    /// Value and spatial gradient at `(x, y, t)`; `side` picks the limit at
    /// slab and sub-step nodes.
    pub fn evaluate(&self, mesh: &SpatialMesh, x: f64, y: f64, t: f64, side: Side) -> Result<(f64, [f64; 2])> {
        let minus = side == Side::Minus;
        let slab = self.grid.slab_at(t, minus).ok_or(Error::Location { x, y, t })?;
        let e = mesh.locate([x, y]).ok_or(Error::Location { x, y, t })?;
        let space = &self.spaces[slab];
        let idx = space.locate_sub_step(e, t, minus);
        let st = &space.elements[idx];
        Ok(st.basis.expand(self.local(slab, idx), [x, y, t]))
    }
}

/// Solves slab after slab, feeding each slab's final trace into the next.
pub fn march(
    mesh: &SpatialMesh,
    grid: &TimeGrid,
    spec: &BasisSpec,
    data: &ProblemData,
    disc: &DiscretizationOptions,
    solver: &SolverOptions,
) -> Result<DiscreteSolution> {
    spec.degrees.validate()?;
    let u0 = data.initial.clone();
    let initial = move |x: f64, y: f64| u0(x, y, 0.0);
    let mut spaces: Vec<SlabSpace> = Vec::with_capacity(grid.num_slabs());
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(grid.num_slabs());
    let mut stats = Vec::with_capacity(grid.num_slabs());
    for n in 0..grid.num_slabs() {
        let t_asm = Instant::now();
        let space = SlabSpace::build(mesh, grid, n, spec)?;
        let prev = match (spaces.last(), coeffs.last()) {
            (Some(space), Some(c)) => PrevTrace::Discrete { space, coeffs: c },
            _ => PrevTrace::Function(&initial),
        };
        let sys = assemble_slab(mesh, &space, data, &prev, disc)?;
        let assembly_seconds = t_asm.elapsed().as_secs_f64();
        let (x, mut st) = solve_slab(&sys, solver)?;
        st.assembly_seconds = assembly_seconds;
        stats.push(st);
        spaces.push(space);
        coeffs.push(x);
    }
    Ok(DiscreteSolution {
        grid: grid.clone(),
        spaces,
        coeffs,
        stats,
    })
}
