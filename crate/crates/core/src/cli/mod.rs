//! Config-driven batch driver. Each subcommand reads its inputs from the
//! `[input]` section, writes artifacts to the output directory and records
//! the resolved configuration in `run.json`.

mod commands;
mod config;

pub use config::{
    CredibilityConfig, DiversityConfig, HeatmapConfig, InputConfig, LatticeConfig, RunConfig, ScaleChoice,
    ScalesConfig, SetupKind, SimulateConfig, VariogramRunConfig,
};

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

/// Environment variable giving the default worker cap.
pub const THREADS_ENV: &str = "DOMINANT_FEATURES_THREADS";

#[derive(Debug, Parser)]
#[command(name = "dominant-features", version, about = "Dominant-feature identification on lattice data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every stochastic stage; overrides `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker cap.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Simulate one of the synthetic setups.
    Simulate,
    /// Resample a data grid with the Gibbs sampler.
    Resample,
    /// Scale-derivative norm curves and selected scales.
    Scales,
    /// Decompose a field or posterior draws into details.
    Decompose,
    /// Pointwise credibility maps of detail draws.
    Credibility,
    /// Empirical variograms and Matérn fits.
    Variogram,
    /// Moving-window functional diversity maps.
    Diversity,
    /// Full reference run with a pass/fail summary.
    ReproduceIllustration,
    /// Render grids as PPM images.
    Heatmap,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("acceptance checks failed: {0}")]
    Acceptance(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Input(_) => 3,
            Self::Stage { .. } => 4,
            Self::Acceptance(_) => 5,
        }
    }

    pub(crate) fn stage(stage: &'static str, e: impl std::fmt::Display) -> Self {
        Self::Stage {
            stage,
            message: e.to_string(),
        }
    }
}

impl From<crate::io::IoError> for CliError {
    fn from(e: crate::io::IoError) -> Self {
        Self::Input(e.to_string())
    }
}

#[derive(Serialize)]
struct RunRecord<'a> {
    tool: &'static str,
    version: &'static str,
    command: Command,
    seed: u64,
    threads: usize,
    config: &'a RunConfig,
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}

/// Runs one subcommand to completion.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    cfg.chain.seed = cfg.seed;
    cfg.illustration.seed = cfg.seed;
    let threads = cli.threads.unwrap_or(1).max(1);
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| CliError::Config(format!("{}: {e}", cfg.output_dir.display())))?;
    crate::io::write_json(
        &cfg.output_dir.join("run.json"),
        &RunRecord {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: cli.command,
            seed: cfg.seed,
            threads,
            config: &cfg,
        },
    )?;
    let mut timings = commands::Timings::default();
    let started = Instant::now();
    let result = commands::dispatch(cli.command, &cfg, &mut timings);
    timings.record("total", started);
    timings.write(&cfg.output_dir)?;
    result
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
