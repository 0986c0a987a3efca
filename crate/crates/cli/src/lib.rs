//! Experiment runner: config parsing, scenarios and artifact writers.

// `!(x > 0.0)` guards are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod scenarios;

use std::path::{Path, PathBuf};

use config::{parse_config, ConfigError, Scenario};
use output::{Artifacts, IoFailure};
use scenarios::RunError;

/// Process exit statuses.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const ASSERTION_FAILED: u8 = 1;
    pub const CONFIG_ERROR: u8 = 2;
    pub const IO_ERROR: u8 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Run(RunError),
    #[error("i/o error: {0}")]
    Io(#[from] IoFailure),
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Io(io) => CliError::Io(io),
            other => CliError::Run(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Run(_) => exit::CONFIG_ERROR,
            CliError::Io(_) => exit::IO_ERROR,
        }
    }
}

/// Outcome of a completed run.
#[derive(Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub summary_text: String,
    pub passed: bool,
}

/// Reads the config, runs `scenario` and writes artifacts plus `summary.txt`.
/// `out` takes precedence over the config's `output_dir`.
pub fn run_from_file(
    scenario: Scenario,
    config_path: &Path,
    out: Option<&Path>,
    overrides: &[String],
) -> Result<RunReport, CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|source| IoFailure {
        path: config_path.to_path_buf(),
        source,
    })?;
    let cfg = parse_config(&text, overrides, scenario)?;
    let out_dir = match (out, &cfg.output_dir) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => p.clone(),
        (None, None) => {
            return Err(ConfigError::Invalid(
                "no output directory: pass --out or set output_dir".into(),
            )
            .into())
        }
    };
    let mut artifacts = Artifacts::create(&out_dir)?;
    let summary = scenarios::run(scenario, &cfg, &mut artifacts)?;
    let summary_text = summary.render(scenario.name());
    artifacts.write("summary.txt", &summary_text)?;
    log::info!(
        "wrote {} files to {}",
        artifacts.written().len(),
        out_dir.display()
    );
    Ok(RunReport {
        out_dir,
        summary_text,
        passed: summary.all_pass(),
    })
}
