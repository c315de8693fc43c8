//! Named experiments and config-driven runs.

use std::time::Instant;

use serde::Serialize;
use stdg_core::basis::DegreeRounding;
use stdg_core::{
    build_rectangular_mesh, error_norms, geometric_partition, infsup_estimate, march, uniform_partition, BasisSpec,
    ConvergenceTable, DegreeMap, DiscretizationOptions, ErrorReport, IndexKind, ProblemData, Rect, SolveStats,
    SolverOptions, SpatialMesh, TimeGrid,
};

use crate::config::RunConfig;
use crate::{fixtures, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MeshFamily {
    Rect,
    Poly,
}

/// Timings and sizes of one solve.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub elements: usize,
    pub slabs: usize,
    pub dofs: usize,
    pub max_slab_dofs: usize,
    pub methods: Vec<String>,
    pub max_residual: f64,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
    pub error_seconds: f64,
}

fn summarize(label: String, mesh: &SpatialMesh, stats: &[SolveStats], dofs: usize, error_seconds: f64) -> RunSummary {
    let mut methods: Vec<String> = stats.iter().map(|s| s.method.clone()).collect();
    methods.sort();
    methods.dedup();
    RunSummary {
        label,
        elements: mesh.num_elements(),
        slabs: stats.len(),
        dofs,
        max_slab_dofs: stats.iter().map(|s| s.dofs).max().unwrap_or(0),
        methods,
        max_residual: stats.iter().map(|s| s.residual).fold(0.0, f64::max),
        assembly_seconds: stats.iter().map(|s| s.assembly_seconds).sum(),
        solve_seconds: stats.iter().map(|s| s.solve_seconds).sum(),
        error_seconds,
    }
}

/// Solves once and measures the error against the exact solution.
#[allow(clippy::too_many_arguments)]
pub fn solve_and_measure(
    label: String,
    mesh: &SpatialMesh,
    grid: &TimeGrid,
    spec: &BasisSpec,
    data: &ProblemData,
    disc: &DiscretizationOptions,
    solver: &SolverOptions,
    error_order_offset: usize,
) -> Result<(ErrorReport, RunSummary), CliError> {
    let exact = data.exact.as_ref().ok_or_else(|| CliError::Config {
        path: "problem".into(),
        message: format!("problem {:?} has no exact solution", data.name),
    })?;
    let sol = march(mesh, grid, spec, data, disc, solver)?;
    let t = Instant::now();
    let report = error_norms(mesh, &sol, data, exact, disc, error_order_offset)?;
    let summary = summarize(label, mesh, &sol.stats, sol.total_dofs(), t.elapsed().as_secs_f64());
    Ok((report, summary))
}

#[derive(Clone, Debug, Serialize)]
pub struct Example1Options {
    pub levels: usize,
    pub p: usize,
    pub mesh: MeshFamily,
    pub kind: IndexKind,
    pub disc: DiscretizationOptions,
    pub solver: SolverOptions,
    pub error_order_offset: usize,
}

impl Example1Options {
    pub fn new(levels: usize, p: usize, mesh: MeshFamily) -> Self {
        Example1Options {
            levels,
            p,
            mesh,
            kind: IndexKind::TotalDegree,
            disc: DiscretizationOptions::default(),
            solver: SolverOptions::default(),
            error_order_offset: stdg_core::DEFAULT_ERROR_ORDER_OFFSET,
        }
    }
}

/// Level `k` of the refinement family: `16 * 4^k` elements, `40 * 2^k` slabs.
pub fn example1_level(k: usize, family: MeshFamily) -> Result<(SpatialMesh, TimeGrid), CliError> {
    let mesh = match family {
        MeshFamily::Rect => {
            let n = 4 << k;
            build_rectangular_mesh(n, n, Rect::UNIT)?
        }
        MeshFamily::Poly => fixtures::voronoi(16 << (2 * k))?,
    };
    let grid = uniform_partition(1.0, 40 << k)?;
    Ok((mesh, grid))
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentOutput {
    pub table: ConvergenceTable,
    pub runs: Vec<RunSummary>,
}

pub fn run_example1(opts: &Example1Options) -> Result<ExperimentOutput, CliError> {
    let max_levels = match opts.mesh {
        MeshFamily::Rect => 8,
        MeshFamily::Poly => fixtures::SIZES.len(),
    };
    if opts.levels < 2 || opts.levels > max_levels {
        return Err(CliError::Config {
            path: "levels".into(),
            message: format!("need 2 <= levels <= {max_levels}, got {}", opts.levels),
        });
    }
    if opts.p == 0 {
        return Err(CliError::Config {
            path: "p".into(),
            message: "degree must be at least 1".into(),
        });
    }
    let data = stdg_core::example1();
    let spec = BasisSpec::uniform(opts.kind, opts.p);
    let mut reports = Vec::new();
    let mut runs = Vec::new();
    for k in 0..opts.levels {
        let (mesh, grid) = example1_level(k, opts.mesh)?;
        let label = format!("{} elements, {} slabs", mesh.num_elements(), grid.num_slabs());
        let (r, s) = solve_and_measure(
            label,
            &mesh,
            &grid,
            &spec,
            &data,
            &opts.disc,
            &opts.solver,
            opts.error_order_offset,
        )?;
        reports.push(r);
        runs.push(s);
    }
    Ok(ExperimentOutput {
        table: stdg_core::eoc(&reports)?,
        runs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Example2Options {
    pub n_max: usize,
    pub sigma: f64,
    pub mu: f64,
    pub rounding: DegreeRounding,
    /// Square number of rectangular elements.
    pub elements: usize,
    pub alpha: f64,
    pub final_time: f64,
    pub kind: IndexKind,
    pub disc: DiscretizationOptions,
    pub solver: SolverOptions,
    pub error_order_offset: usize,
}

impl Example2Options {
    pub fn new(n_max: usize, sigma: f64, mu: f64) -> Self {
        Example2Options {
            n_max,
            sigma,
            mu,
            rounding: DegreeRounding::Ceil,
            elements: 256,
            alpha: 0.5,
            final_time: 0.1,
            kind: IndexKind::TotalDegree,
            disc: DiscretizationOptions::default(),
            solver: SolverOptions::default(),
            error_order_offset: stdg_core::DEFAULT_ERROR_ORDER_OFFSET,
        }
    }
}

/// Geometric grids with `N = 1..=n_max` slabs and degrees growing linearly
/// with the slab index. Rows are indexed by `N`; rates are left empty.
pub fn run_example2(opts: &Example2Options) -> Result<ExperimentOutput, CliError> {
    let bad = |path: &str, message: &str| CliError::Config {
        path: path.into(),
        message: message.into(),
    };
    if !(opts.sigma > 0.0 && opts.sigma < 1.0) {
        return Err(bad("sigma", "grading factor must lie in (0, 1)"));
    }
    if !(opts.mu > 0.0) {
        return Err(bad("mu", "must be positive"));
    }
    if opts.n_max == 0 {
        return Err(bad("N", "must be at least 1"));
    }
    let n = (opts.elements as f64).sqrt().round() as usize;
    if n == 0 || n * n != opts.elements {
        return Err(bad("elements", "must be a positive square number"));
    }
    let mesh = build_rectangular_mesh(n, n, Rect::UNIT)?;
    let data = stdg_core::example2(opts.alpha);
    let mut reports = Vec::new();
    let mut runs = Vec::new();
    for slabs in 1..=opts.n_max {
        let grid = geometric_partition(opts.final_time, slabs, opts.sigma)?;
        let spec = BasisSpec {
            kind: opts.kind,
            degrees: DegreeMap::linear(opts.mu, slabs, opts.rounding)?,
        };
        let label = format!("N = {slabs}, degrees {:?}", spec.degrees.per_slab);
        let (r, s) = solve_and_measure(
            label,
            &mesh,
            &grid,
            &spec,
            &data,
            &opts.disc,
            &opts.solver,
            opts.error_order_offset,
        )?;
        reports.push(r);
        runs.push(s);
    }
    let mut table = ConvergenceTable::without_eoc(&reports);
    for (i, row) in table.rows.iter_mut().enumerate() {
        row.level = i + 1;
    }
    Ok(ExperimentOutput { table, runs })
}

/// Result of `stdg run`.
#[derive(Clone, Debug, Serialize)]
pub struct CustomOutcome {
    pub report: Option<ErrorReport>,
    pub summary: RunSummary,
    /// Per-slab coefficient vectors when there is no exact solution.
    pub coefficients: Option<Vec<Vec<f64>>>,
}

pub fn run_custom(cfg: &RunConfig) -> Result<CustomOutcome, CliError> {
    cfg.validate()?;
    let data = cfg.problem_data()?;
    let mesh = cfg.mesh()?;
    let grid = cfg.grid(mesh.num_elements())?;
    let spec = cfg.basis()?;
    let disc = cfg.discretization();
    let sol = march(&mesh, &grid, &spec, &data, &disc, &cfg.solver_options())?;
    let t = Instant::now();
    let report = match &data.exact {
        Some(exact) => Some(error_norms(
            &mesh,
            &sol,
            &data,
            exact,
            &disc,
            cfg.quad.error_order_offset,
        )?),
        None => None,
    };
    let summary = summarize(
        cfg.output.name.clone(),
        &mesh,
        &sol.stats,
        sol.total_dofs(),
        t.elapsed().as_secs_f64(),
    );
    let coefficients = if report.is_none() { Some(sol.coeffs) } else { None };
    Ok(CustomOutcome {
        report,
        summary,
        coefficients,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InfSupOutcome {
    pub value: f64,
    pub dofs: usize,
    pub h_max: f64,
    pub tau_max: f64,
}

pub fn run_infsup(cfg: &RunConfig) -> Result<InfSupOutcome, CliError> {
    cfg.validate()?;
    let data = cfg.problem_data()?;
    let mesh = cfg.mesh()?;
    let grid = cfg.grid(mesh.num_elements())?;
    let spec = cfg.basis()?;
    let disc = cfg.discretization();
    let dofs = stdg_core::GlobalSpace::build(&mesh, &grid, &spec)?.ndofs();
    let value = infsup_estimate(&mesh, &grid, &spec, &data, &disc, cfg.diag.infsup_cap)?;
    Ok(InfSupOutcome {
        value,
        dofs,
        h_max: mesh.h_max,
        tau_max: grid.tau_max(),
    })
}
