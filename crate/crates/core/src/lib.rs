//! hp-version space-time interior penalty discontinuous Galerkin methods for
//! `u_t - div(a grad u) = f` on prismatic space-time meshes whose spatial
//! elements are general polygons.
//!
//! Local spaces are polynomials of total degree `p` in `(x, y, t)` on each
//! prism `I_{n,j} x K`, orthonormalized in physical coordinates. The problem
//! is solved slab by slab.
//!
//! ```no_run
//! use stdg_core::*;
//!
//! let mesh = build_rectangular_mesh(8, 8, Rect::UNIT).unwrap();
//! let grid = uniform_partition(1.0, 80).unwrap();
//! let spec = BasisSpec::uniform(IndexKind::TotalDegree, 1);
//! let data = example1();
//! let sol = march(&mesh, &grid, &spec, &data, &Default::default(), &Default::default()).unwrap();
//! let exact = data.exact.as_ref().unwrap();
//! let report = error_norms(&mesh, &sol, &data, exact, &Default::default(), 4).unwrap();
//! println!("{}", report.e_l2l2);
//! ```

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assembly;
pub mod basis;
pub mod error;
pub mod expr;
pub mod mesh;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod timegrid;

pub use analysis::{
    dg_norm_gram, dg_norm_parts, eoc, error_norms, global_bilinear_form, infsup_estimate, ConvergenceRow,
    ConvergenceTable, DgNormParts, ErrorReport, GlobalSpace, CSV_HEADER, DEFAULT_ERROR_ORDER_OFFSET,
    DEFAULT_INFSUP_CAP,
};
pub use assembly::{
    assemble_slab, assemble_slab_terms, penalty_value, DiscretizationOptions, PenaltyInput, PrevTrace, SlabSpace,
    SlabSystem, StElement, Terms, DEFAULT_C_SIGMA,
};
pub use basis::{cardinality, BasisSpec, DegreeMap, DegreeRounding, ElementBasis, IndexKind, IndexSet};
pub use error::{Error, Result};
pub use mesh::{build_rectangular_mesh, load_mesh, parse_mesh, shape_regularity_report, MeshFile, Rect, SpatialMesh};
pub use problem::{example1, example2, heat_decay, polynomial_problem, Polynomial};
pub use problem::{CustomExpressions, Diffusion, ExactSolution, ProblemData};
pub use quadrature::QuadRule;
pub use solver::{march, solve_slab, DiscreteSolution, Side, SolveStats, SolverKind, SolverOptions};
pub use sparse::CsrMatrix;
pub use timegrid::{geometric_partition, uniform_partition, TimeGrid, TimeSlab};
