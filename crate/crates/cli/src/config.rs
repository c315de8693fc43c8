//! TOML run configuration.
//!
//! ```toml
//! [problem]
//! name = "example1"        # example1 | example2 | heat_decay | custom
//!
//! [mesh]
//! kind = "rect"            # rect | file | fixture
//! nx = 8
//! ny = 8
//!
//! [time]
//! final_time = 1.0
//! slabs = 80
//!
//! [basis]
//! kind = "P"
//! p = 2
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stdg_core::basis::DegreeRounding;
use stdg_core::mesh::Rect;
use stdg_core::problem::{self, CustomExpressions};
use stdg_core::{
    BasisSpec, DegreeMap, DiscretizationOptions, IndexKind, ProblemData, SolverKind, SolverOptions, SpatialMesh,
    TimeGrid,
};

use crate::fixtures;
use crate::CliError;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Worker threads; `STDG_THREADS` applies when absent.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub basis: BasisConfig,
    #[serde(default)]
    pub penalty: PenaltyConfig,
    #[serde(default)]
    pub quad: QuadConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub diag: DiagConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "default_problem")]
    pub name: String,
    /// Exponent of `t^alpha` for `example2`.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Expressions for `name = "custom"`.
    #[serde(default)]
    pub custom: Option<CustomExpressions>,
}

fn default_problem() -> String {
    "example1".into()
}

fn default_alpha() -> f64 {
    0.5
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            name: default_problem(),
            alpha: default_alpha(),
            custom: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshKind {
    Rect,
    File,
    Fixture,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default = "default_mesh_kind")]
    pub kind: MeshKind,
    #[serde(default = "default_n")]
    pub nx: usize,
    #[serde(default = "default_n")]
    pub ny: usize,
    /// `[x0, x1, y0, y1]`.
    #[serde(default = "default_domain")]
    pub domain: [f64; 4],
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Number of cells of a shipped Voronoi fixture.
    #[serde(default)]
    pub fixture: Option<usize>,
    /// Split every face into this many collinear pieces.
    #[serde(default = "one")]
    pub split_faces: usize,
    #[serde(default = "default_shape_warning")]
    pub shape_warning: f64,
}

fn default_mesh_kind() -> MeshKind {
    MeshKind::Rect
}

fn default_n() -> usize {
    8
}

fn default_domain() -> [f64; 4] {
    [0.0, 1.0, 0.0, 1.0]
}

fn one() -> usize {
    1
}

fn default_shape_warning() -> f64 {
    stdg_core::mesh::DEFAULT_SHAPE_WARNING
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            kind: default_mesh_kind(),
            nx: default_n(),
            ny: default_n(),
            domain: default_domain(),
            path: None,
            fixture: None,
            split_faces: 1,
            shape_warning: default_shape_warning(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeKind {
    Uniform,
    Geometric,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalRefinement {
    pub slab: usize,
    pub element: usize,
    pub parts: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default = "default_final_time")]
    pub final_time: f64,
    #[serde(default = "default_time_kind")]
    pub kind: TimeKind,
    #[serde(default = "default_slabs")]
    pub slabs: usize,
    /// Grading factor of a geometric grid.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub local: Vec<LocalRefinement>,
}

fn default_final_time() -> f64 {
    1.0
}

fn default_time_kind() -> TimeKind {
    TimeKind::Uniform
}

fn default_slabs() -> usize {
    10
}

fn default_sigma() -> f64 {
    0.1
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            final_time: default_final_time(),
            kind: default_time_kind(),
            slabs: default_slabs(),
            sigma: default_sigma(),
            local: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default = "default_p")]
    pub p: usize,
    /// Per-slab degrees `ceil(mu * n)` (or the chosen rounding) when set.
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default = "default_rounding")]
    pub rounding: String,
    /// Explicit per-slab degrees.
    #[serde(default)]
    pub per_slab: Vec<usize>,
}

fn default_kind() -> String {
    "P".into()
}

fn default_p() -> usize {
    1
}

fn default_rounding() -> String {
    "ceil".into()
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig {
            kind: default_kind(),
            p: default_p(),
            mu: None,
            rounding: default_rounding(),
            per_slab: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyConfig {
    #[serde(default = "default_c_sigma")]
    pub c_sigma: f64,
}

fn default_c_sigma() -> f64 {
    stdg_core::DEFAULT_C_SIGMA
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            c_sigma: default_c_sigma(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadConfig {
    #[serde(default = "two")]
    pub order_offset: usize,
    #[serde(default)]
    pub data_order_offset: usize,
    #[serde(default = "four")]
    pub error_order_offset: usize,
}

fn two() -> usize {
    2
}

fn four() -> usize {
    stdg_core::DEFAULT_ERROR_ORDER_OFFSET
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            order_offset: 2,
            data_order_offset: 0,
            error_order_offset: four(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_solver_kind")]
    pub kind: SolverKind,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_threshold")]
    pub direct_threshold: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_restart")]
    pub restart: usize,
}

fn default_solver_kind() -> SolverKind {
    SolverKind::Auto
}

fn default_tol() -> f64 {
    SolverOptions::default().tol
}

fn default_threshold() -> usize {
    SolverOptions::default().direct_threshold
}

fn default_max_iters() -> usize {
    SolverOptions::default().max_iter
}

fn default_restart() -> usize {
    SolverOptions::default().restart
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            kind: default_solver_kind(),
            tol: default_tol(),
            direct_threshold: default_threshold(),
            max_iters: default_max_iters(),
            restart: default_restart(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_out_name")]
    pub name: String,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_out_name() -> String {
    "run".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_out_dir(),
            name: default_out_name(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagConfig {
    #[serde(default = "default_cap")]
    pub infsup_cap: usize,
}

fn default_cap() -> usize {
    stdg_core::DEFAULT_INFSUP_CAP
}

impl Default for DiagConfig {
    fn default() -> Self {
        DiagConfig {
            infsup_cap: default_cap(),
        }
    }
}

fn invalid(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| invalid("", e.to_string()))
    }

    /// Reads a config file; relative mesh paths are resolved against the
    /// config's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid("", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(p), Some(dir)) = (cfg.mesh.path.as_mut(), path.parent()) {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Checks every field before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.problem.name.as_str() {
            "custom" => {
                if self.problem.custom.is_none() {
                    return Err(invalid("problem.custom", "required when problem.name = \"custom\""));
                }
            }
            "example1" | "example2" | "heat_decay" => {}
            other => return Err(invalid("problem.name", format!("unknown problem {other:?}"))),
        }
        match self.mesh.kind {
            MeshKind::Rect => {
                if self.mesh.nx == 0 || self.mesh.ny == 0 {
                    return Err(invalid("mesh.nx", "element counts must be at least 1"));
                }
                let [x0, x1, y0, y1] = self.mesh.domain;
                if !(x1 > x0 && y1 > y0) {
                    return Err(invalid(
                        "mesh.domain",
                        "expected [x0, x1, y0, y1] with x0 < x1 and y0 < y1",
                    ));
                }
            }
            MeshKind::File => match &self.mesh.path {
                None => return Err(invalid("mesh.path", "required when mesh.kind = \"file\"")),
                Some(p) if !p.exists() => {
                    return Err(invalid("mesh.path", format!("file {} does not exist", p.display())))
                }
                _ => {}
            },
            MeshKind::Fixture => match self.mesh.fixture {
                Some(n) if fixtures::SIZES.contains(&n) => {}
                other => {
                    return Err(invalid(
                        "mesh.fixture",
                        format!("{other:?} is not one of the shipped sizes {:?}", fixtures::SIZES),
                    ))
                }
            },
        }
        if self.mesh.split_faces == 0 {
            return Err(invalid("mesh.split_faces", "must be at least 1"));
        }
        if !(self.time.final_time > 0.0) {
            return Err(invalid("time.final_time", "must be positive"));
        }
        if self.time.slabs == 0 {
            return Err(invalid("time.slabs", "must be at least 1"));
        }
        if self.time.kind == TimeKind::Geometric && !(self.time.sigma > 0.0 && self.time.sigma < 1.0) {
            return Err(invalid("time.sigma", "grading factor must lie in (0, 1)"));
        }
        for (i, r) in self.time.local.iter().enumerate() {
            if r.slab >= self.time.slabs || r.parts < 2 {
                return Err(invalid(
                    &format!("time.local[{i}]"),
                    "slab must exist and parts must be at least 2",
                ));
            }
        }
        self.basis
            .kind
            .parse::<IndexKind>()
            .map_err(|e| invalid("basis.kind", e.to_string()))?;
        if self.basis.p == 0 {
            return Err(invalid("basis.p", "degree must be at least 1"));
        }
        if let Some(mu) = self.basis.mu {
            if !(mu > 0.0) {
                return Err(invalid("basis.mu", "must be positive"));
            }
        }
        self.basis
            .rounding
            .parse::<DegreeRounding>()
            .map_err(|e| invalid("basis.rounding", e.to_string()))?;
        if !self.basis.per_slab.is_empty() {
            if self.basis.per_slab.len() != self.time.slabs {
                return Err(invalid("basis.per_slab", "needs one degree per slab"));
            }
            if self.basis.per_slab.contains(&0) {
                return Err(invalid("basis.per_slab", "degrees must be at least 1"));
            }
        }
        if !(self.penalty.c_sigma > 0.0) {
            return Err(invalid("penalty.c_sigma", "must be positive"));
        }
        if !(self.solver.tol > 0.0) {
            return Err(invalid("solver.tol", "must be positive"));
        }
        if self.solver.restart == 0 || self.solver.max_iters == 0 {
            return Err(invalid("solver.restart", "restart and max_iters must be positive"));
        }
        Ok(())
    }

    pub fn problem_data(&self) -> Result<ProblemData, CliError> {
        Ok(match self.problem.name.as_str() {
            "custom" => problem::custom(self.problem.custom.as_ref().unwrap())?,
            "example2" => problem::example2(self.problem.alpha),
            other => problem::by_name(other)?,
        })
    }

    pub fn mesh(&self) -> Result<SpatialMesh, CliError> {
        let mesh = match self.mesh.kind {
            MeshKind::Rect => {
                let [x0, x1, y0, y1] = self.mesh.domain;
                stdg_core::build_rectangular_mesh(self.mesh.nx, self.mesh.ny, Rect { x0, x1, y0, y1 })?
            }
            MeshKind::File => stdg_core::load_mesh(self.mesh.path.as_ref().unwrap())?,
            MeshKind::Fixture => fixtures::voronoi(self.mesh.fixture.unwrap())?,
        };
        Ok(if self.mesh.split_faces > 1 {
            mesh.split_faces(self.mesh.split_faces)?
        } else {
            mesh
        })
    }

    pub fn grid(&self, num_elements: usize) -> Result<TimeGrid, CliError> {
        let mut grid = match self.time.kind {
            TimeKind::Uniform => stdg_core::uniform_partition(self.time.final_time, self.time.slabs)?,
            TimeKind::Geometric => {
                stdg_core::geometric_partition(self.time.final_time, self.time.slabs, self.time.sigma)?
            }
        };
        for r in &self.time.local {
            grid = grid.refine_locally(r.slab, r.element, r.parts, num_elements)?;
        }
        Ok(grid)
    }

    pub fn basis(&self) -> Result<BasisSpec, CliError> {
        let kind: IndexKind = self.basis.kind.parse()?;
        let degrees = if !self.basis.per_slab.is_empty() {
            DegreeMap::per_slab(self.basis.per_slab.clone())
        } else if let Some(mu) = self.basis.mu {
            DegreeMap::linear(mu, self.time.slabs, self.basis.rounding.parse()?)?
        } else {
            DegreeMap::uniform(self.basis.p)
        };
        Ok(BasisSpec { kind, degrees })
    }

    pub fn discretization(&self) -> DiscretizationOptions {
        DiscretizationOptions {
            c_sigma: self.penalty.c_sigma,
            quad_order_offset: self.quad.order_offset,
            data_order_offset: self.quad.data_order_offset,
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            kind: self.solver.kind,
            direct_threshold: self.solver.direct_threshold,
            tol: self.solver.tol,
            restart: self.solver.restart,
            max_iter: self.solver.max_iters,
        }
    }
}
