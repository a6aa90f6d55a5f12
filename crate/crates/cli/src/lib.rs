//! Scenario-driven front end for `qsd-core`: reads a JSON configuration,
//! applies command-line overrides, runs a named experiment and writes CSV
//! results next to the master-equation reference.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod scenarios;

use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::{json, Value};

use qsd_core::Error;

pub use config::{validate, Overrides, RunConfig};
pub use scenarios::{Artifacts, RunFailure, Scenario, ScenarioRegistry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Version string recorded in run metadata.
pub const VERSION: &str = env!("QSD_VERSION");

#[derive(Debug, Parser)]
#[command(name = "simulate", version = VERSION, about = "Run a doubled-space trajectory experiment")]
pub struct Args {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of trajectories.
    #[arg(long = "n")]
    pub n: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_parser = ["qsd", "jump"])]
    pub unraveling: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long = "out")]
    pub out: Option<PathBuf>,
}

impl Args {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            n_trajectories: self.n,
            dt: self.dt,
            unraveling: self.unraveling.clone(),
            workers: self.workers,
            output: self.out.clone(),
        }
    }
}

/// Errors that stem from the request rather than from the numerics.
fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::DimensionMismatch { .. }
            | Error::NotSquare { .. }
            | Error::EmptyDimension
            | Error::NonHermitianHamiltonian(_)
            | Error::NotNormalized(_)
            | Error::NonMonotoneGrid
            | Error::IncommensurateGrid { .. }
            | Error::NonPositiveStep(_)
            | Error::UnknownUnraveling(_)
            | Error::InvalidArgument(_)
    )
}

/// The deterministic run description: everything except timing, worker
/// count and output location, so it is identical across repeated runs.
pub fn metadata(cfg: &RunConfig, artifacts: &Artifacts) -> Value {
    json!({
        "version": VERSION,
        "scenario": cfg.scenario,
        "seed": cfg.seed,
        "dt": cfg.dt,
        "n": cfg.n_trajectories,
        "config": cfg,
        "runs": artifacts.details,
    })
}

/// Runs a validated configuration and writes its files. Returns the exit code.
pub fn execute(cfg: &RunConfig, registry: &ScenarioRegistry) -> i32 {
    let scenario = registry.get(&cfg.scenario).expect("validated scenario");
    let start = std::time::Instant::now();
    match scenario.run(cfg) {
        Ok(artifacts) => {
            let mut timing = artifacts.timing.clone();
            timing.insert("total_wall_time_seconds".into(), json!(start.elapsed().as_secs_f64()));
            timing.insert("workers".into(), json!(cfg.workers));
            let mut files = artifacts.files.clone();
            files.push(("metadata.json".into(), output::json_bytes(&metadata(cfg, &artifacts))));
            files.push(("timing.json".into(), output::json_bytes(&timing)));
            match output::write_all(&cfg.output, &files) {
                Ok(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: writing to {}: {e}", cfg.output.display());
                    EXIT_IO
                }
            }
        }
        Err(RunFailure { error, .. }) if is_config_error(&error) => {
            eprintln!("error: {error}");
            EXIT_CONFIG
        }
        Err(RunFailure { error, report }) => failure(cfg, &error, report),
    }
}

fn failure(cfg: &RunConfig, error: &Error, report: Option<Value>) -> i32 {
    let body = json!({
        "version": VERSION,
        "scenario": cfg.scenario,
        "seed": cfg.seed,
        "error": error.to_string(),
        "config": cfg,
        "report": report,
    });
    let file = vec![("failure.json".to_string(), output::json_bytes(&body))];
    eprintln!("error: numerical failure: {error}");
    match output::write_all(&cfg.output, &file) {
        Ok(paths) => {
            eprintln!("instability report: {}", paths[0].display());
            EXIT_NUMERICAL
        }
        Err(e) => {
            eprintln!("error: writing to {}: {e}", cfg.output.display());
            EXIT_IO
        }
    }
}

/// Reads and validates the configuration file with `overrides` applied.
pub fn load(path: &Path, overrides: &Overrides, registry: &ScenarioRegistry) -> Result<RunConfig, Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| vec![format!("{}: {e}", path.display())])?;
    validate(&text, overrides, registry).map_err(|errs| errs.into_iter().map(|e| format!("{}: {e}", path.display())).collect())
}

pub fn run_cli(args: &Args) -> i32 {
    let registry = ScenarioRegistry::default();
    match load(&args.config, &args.overrides(), &registry) {
        Ok(cfg) => execute(&cfg, &registry),
        Err(errors) => {
            for e in errors {
                eprintln!("config error: {e}");
            }
            EXIT_CONFIG
        }
    }
}
