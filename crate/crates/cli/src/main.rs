use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use stdg_cli::{
    init_threads, run_custom, run_example1, run_example2, run_infsup, write_outputs, CliError, Example1Options,
    Example2Options, Manifest, MeshFamily, RunConfig,
};
use stdg_core::basis::DegreeRounding;
use stdg_core::{ConvergenceTable, IndexKind};

#[derive(Parser)]
#[command(
    name = "stdg",
    version,
    about = "Space-time interior penalty dG for the heat equation on polygonal meshes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Convergence study for the oscillating Gaussian benchmark.
    Example1 {
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, value_enum, default_value_t = MeshFamily::Rect)]
        mesh: MeshFamily,
        /// Local space: P, PQ or Q.
        #[arg(long, default_value = "P")]
        kind: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// hp study for the `t^alpha` singular benchmark on geometric grids.
    Example2 {
        #[arg(long = "N", default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        #[arg(long, default_value_t = 1.5)]
        mu: f64,
        #[arg(long, default_value = "ceil")]
        degree_round: String,
        #[arg(long, default_value_t = 256)]
        elements: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Diagnostics.
    Diag {
        #[command(subcommand)]
        which: Diag,
    },
}

#[derive(Subcommand)]
enum Diag {
    /// Discrete inf-sup constant in the streamline-diffusion norm.
    Infsup {
        #[arg(long)]
        config: PathBuf,
    },
}

fn table_output(
    command: &str,
    name: &str,
    out: &Path,
    options: &impl serde::Serialize,
    threads: usize,
    run: impl FnOnce() -> Result<stdg_cli::ExperimentOutput, CliError>,
) -> Result<(), CliError> {
    let mut manifest = Manifest::new(command, options, threads)?;
    let t = Instant::now();
    let result = run()?;
    manifest
        .timings
        .insert("total_seconds".into(), t.elapsed().as_secs_f64());
    manifest.results = serde_json::to_value(&result)?;
    let csv = result.table.to_csv();
    print!("{csv}");
    for p in write_outputs(out, name, Some(&csv), &manifest)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            cfg.validate()?;
            let threads = init_threads(cfg.threads)?;
            let mut manifest = Manifest::new("run", &cfg, threads)?;
            let t = Instant::now();
            let outcome = run_custom(&cfg)?;
            manifest
                .timings
                .insert("total_seconds".into(), t.elapsed().as_secs_f64());
            manifest.results = serde_json::to_value(&outcome)?;
            let csv = outcome
                .report
                .as_ref()
                .map(|r| ConvergenceTable::without_eoc(std::slice::from_ref(r)).to_csv());
            if let Some(csv) = &csv {
                print!("{csv}");
            }
            for p in write_outputs(&cfg.output.dir, &cfg.output.name, csv.as_deref(), &manifest)? {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Example1 {
            levels,
            p,
            mesh,
            kind,
            out,
        } => {
            let threads = init_threads(None)?;
            let mut opts = Example1Options::new(levels, p, mesh);
            opts.kind = kind.parse::<IndexKind>()?;
            let name = format!(
                "example1_{}_p{p}",
                serde_json::to_value(mesh)?.as_str().unwrap_or("mesh")
            );
            table_output("example1", &name, &out, &opts, threads, || run_example1(&opts))
        }
        Command::Example2 {
            n,
            sigma,
            mu,
            degree_round,
            elements,
            out,
        } => {
            let threads = init_threads(None)?;
            let mut opts = Example2Options::new(n, sigma, mu);
            opts.rounding = degree_round.parse::<DegreeRounding>()?;
            opts.elements = elements;
            let name = format!("example2_sigma{sigma}_mu{mu}");
            table_output("example2", &name, &out, &opts, threads, || run_example2(&opts))
        }
        Command::Diag {
            which: Diag::Infsup { config },
        } => {
            let cfg = RunConfig::load(&config)?;
            cfg.validate()?;
            let threads = init_threads(cfg.threads)?;
            let mut manifest = Manifest::new("diag infsup", &cfg, threads)?;
            let t = Instant::now();
            let outcome = run_infsup(&cfg)?;
            manifest
                .timings
                .insert("total_seconds".into(), t.elapsed().as_secs_f64());
            manifest.results = serde_json::to_value(&outcome)?;
            println!("infsup,{:.6e},dofs,{}", outcome.value, outcome.dofs);
            let name = format!("{}_infsup", cfg.output.name);
            for p in write_outputs(&cfg.output.dir, &name, None, &manifest)? {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
