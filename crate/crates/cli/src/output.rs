use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Written next to every CSV as `<name>.json`.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: &'static str,
    pub threads: usize,
    pub config: serde_json::Value,
    pub timings: BTreeMap<String, f64>,
    pub results: serde_json::Value,
}

impl Manifest {
    pub fn new(command: &str, config: &impl Serialize, threads: usize) -> Result<Self, CliError> {
        Ok(Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            threads,
            config: serde_json::to_value(config)?,
            timings: BTreeMap::new(),
            results: serde_json::Value::Null,
        })
    }
}

/// Writes `<dir>/<name>.csv` (when given) and `<dir>/<name>.json`; returns
/// the paths written.
pub fn write_outputs(dir: &Path, name: &str, csv: Option<&str>, manifest: &Manifest) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if let Some(csv) = csv {
        let p = dir.join(format!("{name}.csv"));
        std::fs::write(&p, csv)?;
        written.push(p);
    }
    let p = dir.join(format!("{name}.json"));
    std::fs::write(&p, serde_json::to_string_pretty(manifest)?)?;
    written.push(p);
    Ok(written)
}
