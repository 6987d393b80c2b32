//! `higgslab`: batch driver for flows, eigenvalue estimates and identity checks.
//!
//! Exit codes: 0 success, 1 verification failure, 2 config error, 3 numerical failure.

mod commands;
mod config;
mod error;

use clap::{Parser, Subcommand};
use commands::Context;
use config::RunConfig;
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "higgslab", version, about = "Higgs pairs on flat Kähler tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Yang–Mills–Higgs flow, writing JSON-lines diagnostics and checkpoints
    Flow(Flags),
    /// Estimate the constrained least eigenvalue, optionally with a continuity sweep
    Eigen(Flags),
    /// Run the identity and cross-check suites
    Verify(Flags),
    /// Continue a flow from a checkpoint, appending diagnostics
    Resume(Flags),
}

#[derive(clap::Args)]
struct Flags {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// start from this checkpoint instead of generated data
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// output directory (overrides output.dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// data seed (overrides bundle.seed)
    #[arg(long)]
    seed: Option<u64>,
    /// suppress progress output
    #[arg(long)]
    quiet: bool,
}

fn context(flags: Flags) -> Result<Context, CliError> {
    let mut cfg = RunConfig::load(&flags.config)?;
    if let Some(seed) = flags.seed {
        cfg.bundle.seed = seed;
    }
    let out = flags.out.unwrap_or_else(|| cfg.output.dir.clone());
    Ok(Context { cfg, checkpoint: flags.checkpoint, out, quiet: flags.quiet })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Flow(f) => commands::flow(&context(f)?),
        Command::Eigen(f) => commands::eigen(&context(f)?),
        Command::Verify(f) => commands::verify(&context(f)?),
        Command::Resume(f) => commands::resume(&context(f)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("higgslab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
