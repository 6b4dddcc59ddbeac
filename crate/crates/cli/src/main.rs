//! Batch experiment runner for the causal-feature-learning lab.
//!
//! Subcommands: `cluster`, `train`, `analyze-se`, `compare-samplers`,
//! `eval`. Every run writes a `resolved-config.json` capturing the effective
//! configuration; re-running any command from that file reproduces its
//! metric files byte for byte. Exit codes: 0 success, 1 configuration
//! error, 2 numeric divergence, 3 I/O error.

mod commands;
mod config;
mod exit;
mod model_file;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Erm,
    Maml,
    Cicf,
}

#[derive(Parser)]
#[command(name = "cicf-lab", about = "Causal feature learning laboratory", version)]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Dotted-path override, e.g. --set training.alpha=0.1 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output directory (overrides output.directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Single seed to run (overrides the config's seed list).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster the dataset per class and write the assignment CSV.
    Cluster,
    /// Train across all seeds and leave-one-out domains.
    Train {
        #[arg(long, value_enum)]
        method: Method,
    },
    /// Analytic + Monte-Carlo standard errors over a batch-size sweep.
    AnalyzeSe,
    /// Histogram difference between stratified and rival samplers.
    CompareSamplers,
    /// Evaluate a saved model on the configured dataset.
    Eval {
        /// Model parameters file written by `train`.
        #[arg(long)]
        params: PathBuf,
    },
}

fn dispatch(cli: &Cli) -> Result<(), exit::CliError> {
    let config_path = cli
        .config
        .as_deref()
        .ok_or_else(|| cicf_core::Error::config("--config is required"))?;
    let config = config::load_config(config_path, &cli.overrides, cli.seed, cli.out.as_deref())?;
    match &cli.command {
        Command::Cluster => commands::cluster::run(&config),
        Command::Train { method } => commands::train::run(&config, *method),
        Command::AnalyzeSe => commands::analyze::run(&config),
        Command::CompareSamplers => commands::compare::run(&config),
        Command::Eval { params } => commands::eval::run(&config, params),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            // Bad usage is a configuration error in this tool's taxonomy.
            eprintln!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(1))
        }
    }
}
