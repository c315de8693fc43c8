use thiserror::Error;

/// Errors produced by mesh handling, discretization and solution.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("geometry error in element {element}: {message}")]
    Geometry { element: usize, message: String },

    #[error("basis conditioning error in element {element} (sub-step {sub_step}): {message}")]
    BasisConditioning {
        element: usize,
        sub_step: usize,
        message: String,
    },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("solver error in slab {slab}: {message} (relative residual {residual:.3e})")]
    Solver {
        slab: usize,
        message: String,
        residual: f64,
    },

    #[error("point ({x}, {y}, {t}) lies outside the space-time domain")]
    Location { x: f64, y: f64, t: f64 },

    #[error("diagnostic refused: {0}")]
    Diagnostic(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
