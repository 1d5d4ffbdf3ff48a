//! Command-line front end. `run` parses arguments, dispatches to a
//! subcommand and maps failures to exit codes:
//! 0 ok, 1 environment, 2 config, 3 data, 4 model, 5 reproduction targets missed.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::gbdt::{GbdtError, DEFAULT_TEST_FRACTION};
use crate::ingest::DEFAULT_WINDOW_DAYS;
use crate::pipeline::{PipelineError, DEFAULT_QUANTILE};

pub use output::{FileDigest, RunManifest, MANIFEST};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("environment: {0}")]
    Env(String),
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("model: {0}")]
    Model(String),
    #[error("{0} reproduction target(s) missed")]
    TargetsMissed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Env(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Model(_) => 4,
            CliError::TargetsMissed(_) => 5,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let msg = e.to_string();
        match e {
            PipelineError::Synth(_) | PipelineError::UnknownPreset(_) => CliError::Config(msg),
            PipelineError::Ingest(_)
            | PipelineError::Unlabelled(_)
            | PipelineError::Metrics(_)
            | PipelineError::Stats(_) => CliError::Data(msg),
            PipelineError::Gbdt(GbdtError::UnlabelledRecord(_)) => CliError::Data(msg),
            PipelineError::Gbdt(GbdtError::Io(_)) => CliError::Env(msg),
            PipelineError::Gbdt(_) => CliError::Model(msg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "reportsignal", version, about = "Noise decomposition, volume statistics and routing for user reports")]
pub struct Cli {
    /// Run seed; every module derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Format of summary artifacts.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic report stream and labelled content table.
    Synth(SynthArgs),
    /// Aggregate, clip, decompose noise and order classes by report volume.
    Analyze(AnalyzeArgs),
    /// Split, train the router and evaluate it.
    TrainEval(TrainEvalArgs),
    /// Synthesize, analyze and train on the default preset, then score the run.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Preset name (ig-fr, ig-us, fb-us) or path to a JSON config.
    #[arg(long, default_value = "ig-us")]
    pub config: String,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Report events, one JSON object per line.
    #[arg(long)]
    pub events: PathBuf,
    /// Labelled content table (CSV).
    #[arg(long)]
    pub contents: PathBuf,
    #[arg(long, default_value_t = DEFAULT_WINDOW_DAYS)]
    pub window_days: u32,
    /// Window start in epoch seconds; defaults to midnight UTC before the first event.
    #[arg(long)]
    pub window_start: Option<i64>,
    #[arg(long, default_value_t = DEFAULT_QUANTILE)]
    pub quantile: f64,
    /// Monthly active users per country, as COUNTRY=N; repeatable.
    #[arg(long = "mau", value_name = "COUNTRY=N")]
    pub mau: Vec<String>,
}

#[derive(Debug, Args)]
pub struct TrainEvalArgs {
    /// Feature table written by `analyze`.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub contents: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TEST_FRACTION)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = DEFAULT_WINDOW_DAYS)]
    pub window_days: u32,
    #[arg(long, default_value_t = 200)]
    pub trees: usize,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 20)]
    pub min_leaf: usize,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Number of consecutive seeds to score, starting at --seed. Artifacts
    /// are written for the first one only.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => return Err(CliError::Config(e.to_string())),
        Err(e) => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
    };
    match &cli.command {
        Command::Synth(a) => commands::synth(&cli, a),
        Command::Analyze(a) => commands::analyze(&cli, a),
        Command::TrainEval(a) => commands::train_eval(&cli, a),
        Command::Reproduce(a) => commands::reproduce(&cli, a),
    }
}
