//! Command-line harness: config files, the two named experiments, the
//! inf-sup diagnostic and CSV/manifest output.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod fixtures;
pub mod output;

pub use config::RunConfig;
pub use experiments::{
    example1_level, run_custom, run_example1, run_example2, run_infsup, Example1Options, Example2Options,
    ExperimentOutput, MeshFamily,
};
pub use output::{write_outputs, Manifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Core(#[from] stdg_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub const THREADS_ENV: &str = "STDG_THREADS";

/// Sizes the global rayon pool from `STDG_THREADS` unless `threads` is given.
/// Results do not depend on the thread count.
pub fn init_threads(threads: Option<usize>) -> Result<usize, CliError> {
    let requested = match threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| CliError::Config {
                path: THREADS_ENV.into(),
                message: format!("expected a positive integer, got {v:?}"),
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = requested {
        if n == 0 {
            return Err(CliError::Config {
                path: THREADS_ENV.into(),
                message: "thread count must be positive".into(),
            });
        }
        // A second initialisation (tests, library use) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}
