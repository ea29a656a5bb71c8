use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod cmd;
mod config;
mod error;

use error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "darijakit", version, about = "Darija OCR data and benchmarking toolkit")]
struct Cli {
    /// Log filter (overrides DARIJAKIT_LOG and the config file).
    #[arg(long, global = true, value_name = "FILTER")]
    log_level: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthetic sample generation.
    #[command(subcommand)]
    Forge(cmd::forge::ForgeCmd),
    /// Manifest operations.
    #[command(subcommand)]
    Dataset(cmd::dataset::DatasetCmd),
    /// Label unlabeled images through a transcription API.
    #[command(subcommand)]
    Pseudolabel(cmd::pseudolabel::PseudolabelCmd),
    /// Human review of pseudo-labels.
    #[command(subcommand)]
    Review(cmd::review::ReviewCmd),
    /// Score OCR models on a benchmark manifest.
    #[command(subcommand)]
    Bench(cmd::bench::BenchCmd),
}

/// Flags shared by commands that take a run config.
#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// TOML run config.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed override (else DARIJAKIT_SEED, else the config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (else DARIJAKIT_JOBS, else the config).
    #[arg(long)]
    pub jobs: Option<usize>,
}

fn run(cli: Cli) -> CliResult {
    let log = cli.log_level.as_deref();
    match cli.command {
        Command::Forge(c) => cmd::forge::run(c, log),
        Command::Dataset(c) => cmd::dataset::run(c, log),
        Command::Pseudolabel(c) => cmd::pseudolabel::run(c, log),
        Command::Review(c) => cmd::review::run(c, log),
        Command::Bench(c) => cmd::bench::run(c, log),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
