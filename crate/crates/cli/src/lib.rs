//! Experiment runner: configuration, the experiment catalog, result records
//! and output persistence.

pub mod catalog;
pub mod config;
pub mod error;
pub mod experiments;
pub mod record;

use std::fs;
use std::path::Path;
use std::time::Instant;

pub use catalog::{catalog, ExperimentInfo, ParamInfo};
pub use config::{ExperimentConfig, RunSpec};
pub use error::{CliError, ExitCode};
pub use record::{Quantity, ResultRecord, Tolerance};

/// Environment variable overriding the worker-pool size.
pub const WORKERS_ENV: &str = "SLE_LAB_WORKERS";

/// A finished run: the record plus the files to write next to it.
#[derive(Debug)]
pub struct RunOutput {
    pub record: ResultRecord,
    pub artifacts: Vec<(String, String)>,
}

impl RunOutput {
    pub fn exit_code(&self) -> ExitCode {
        if self.record.acceptance && self.record.passed == Some(false) {
            ExitCode::Tolerance
        } else {
            ExitCode::Ok
        }
    }
}

/// Configures the global worker pool from [`WORKERS_ENV`], if set.
pub fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{WORKERS_ENV}={raw:?} is not a worker count")))?;
    if n == 0 {
        return Err(CliError::Config(format!("{WORKERS_ENV} must be positive")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

/// Runs an experiment without touching the filesystem beyond reading inputs.
pub fn execute(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let mut out = experiments::dispatch(spec)?;
    out.record.experiment = spec.experiment.clone();
    out.record.seed = spec.seed;
    out.record.tool_version = format!("sle-lab {}", env!("CARGO_PKG_VERSION"));
    out.record.wall_time_s = start.elapsed().as_secs_f64();
    out.record.artifacts = out.artifacts.iter().map(|(name, _)| name.clone()).collect();
    Ok(out)
}

/// Writes `record.json`, the artifacts and `config.toml` into `dir`.
pub fn persist(spec: &RunSpec, out: &RunOutput, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for (name, body) in &out.artifacts {
        fs::write(dir.join(name), body)?;
    }
    let mut config = spec.to_config();
    if let Ok(toml::Value::Table(params)) = toml::Value::try_from(&out.record.params) {
        config.params = params;
    }
    fs::write(dir.join("config.toml"), config.to_toml()?)?;
    let json = serde_json::to_string_pretty(&out.record).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(dir.join("record.json"), json + "\n")?;
    Ok(())
}
