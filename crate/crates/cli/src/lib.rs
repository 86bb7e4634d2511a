//! Configuration-driven runner for the `subres` command.

pub mod config;
pub mod tasks;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use config::{ExperimentConfig, PrecisionMode, Task};

/// Report schema tag; bump when the report layout changes.
pub const SCHEMA: &str = "subres-report/1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    schema: &'static str,
    version: &'static str,
    task: Task,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<&'a str>,
    config: &'a ExperimentConfig,
    results: Value,
    diagnostics: Value,
}

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub precision: Option<PrecisionMode>,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    ExperimentConfig::parse(&text, json)
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Runs one experiment and writes its report. Returns the paths written.
///
/// Parse, validation and I/O errors leave no report behind. A numeric failure
/// still produces a complete report carrying the failure before the error is
/// returned.
pub fn run(config_path: &Path, out: &Path, overrides: &Overrides, verbose: bool) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = load_config(config_path)?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if overrides.precision.is_some() {
        cfg.precision = overrides.precision;
    }
    let start = Instant::now();
    let outcome = tasks::execute(&cfg);
    if verbose {
        eprintln!("task {:?} finished in {:.3} s", cfg.task, start.elapsed().as_secs_f64());
    }
    let (output, failure) = match outcome {
        Ok(o) => {
            let f = o.failure.clone();
            (Some(o), f)
        }
        Err(CliError::Numeric(m)) => (None, Some(m)),
        Err(e) => return Err(e),
    };
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let report = Report {
        schema: SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        task: cfg.task,
        status: if failure.is_some() { "failed" } else { "ok" },
        failure: failure.as_deref(),
        config: &cfg,
        results: output.as_ref().map_or(Value::Null, |o| o.results.clone()),
        diagnostics: output.as_ref().map_or(Value::Null, |o| o.diagnostics.clone()),
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    let mut written = Vec::new();
    let report_path = out.join(&cfg.output.report);
    write(&report_path, &text)?;
    written.push(report_path);
    if let (Some(name), Some(csv)) = (&cfg.output.csv, output.as_ref().and_then(|o| o.csv.as_ref())) {
        let p = out.join(name);
        write(&p, csv)?;
        written.push(p);
    }
    if verbose {
        for p in &written {
            eprintln!("wrote {}", p.display());
        }
    }
    match failure {
        Some(m) => Err(CliError::Numeric(m)),
        None => Ok(written),
    }
}
