use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use vapor_image_cli::config::Scenario;
use vapor_image_cli::{exit, run_from_file};

/// Thread count for the parallel time loops; unset means all cores.
const THREADS_ENV: &str = "VAPOR_IMAGE_THREADS";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    SlitDiffuse,
    ArtificialDiffuse,
    ImageEvolve,
    Fidelity,
    Validate,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::SlitDiffuse => Scenario::SlitDiffuse,
            ScenarioArg::ArtificialDiffuse => Scenario::ArtificialDiffuse,
            ScenarioArg::ImageEvolve => Scenario::ImageEvolve,
            ScenarioArg::Fidelity => Scenario::Fidelity,
            ScenarioArg::Validate => Scenario::Validate,
        }
    }
}

/// Simulates image storage and diffusion in a 4f vapor-cell memory.
#[derive(Debug, Parser)]
#[command(name = "vapor-image", version)]
struct Args {
    scenario: ScenarioArg,
    /// `key = value` experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra `key=value` entries applied after the config file.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    if let Err(e) = init_threads() {
        eprintln!("config error: {e}");
        return ExitCode::from(exit::CONFIG_ERROR);
    }
    match run_from_file(
        args.scenario.into(),
        &args.config,
        args.out.as_deref(),
        &args.overrides,
    ) {
        Ok(report) => {
            print!("{}", report.summary_text);
            if report.passed {
                ExitCode::from(exit::PASS)
            } else {
                ExitCode::from(exit::ASSERTION_FAILED)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
