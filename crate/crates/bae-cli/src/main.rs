//! `bae`: batch front end for spectra, pump sweeps, Monte Carlo validation and structure checks.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure, 4 `--check` failure, 1 output
//! I/O failure.

mod commands;
mod config;
mod error;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::CheckOutcome;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::OutputDir;

#[derive(Debug, Parser)]
#[command(name = "bae", version, about = "Back-action-evading optomechanical force measurement toolkit")]
struct Cli {
    /// TOML run configuration; defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides the Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Exit with status 4 when the command's acceptance conditions fail.
    #[arg(long, global = true)]
    check: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Closed-form and exact force-referred spectra over frequency.
    Spectrum,
    /// Detuned spectrum over the pump level, with optima and regime labels.
    Sweep,
    /// Simulated spectra against the solver, and the pulse detection experiment.
    Montecarlo,
    /// Eigenvalues of the linear dynamics.
    Stability,
    /// Closed-subsystem evolution, symplectic defect and Hamiltonian drift check.
    QmfsCheck,
    /// Per-regime numeric minima against their closed forms.
    Regimes,
}

fn run(cli: &Cli) -> Result<CheckOutcome, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.montecarlo.seed = seed;
    }
    let mut out = OutputDir::create(&cli.out, &cfg)?;
    let outcome = match cli.command {
        Command::Spectrum => commands::spectrum(&cfg, &mut out),
        Command::Sweep => commands::sweep(&cfg, &mut out),
        Command::Montecarlo => commands::montecarlo(&cfg, &mut out),
        Command::Stability => commands::stability(&cfg, &mut out),
        Command::QmfsCheck => commands::qmfs(&cfg, &mut out),
        Command::Regimes => commands::regimes(&cfg, &mut out),
    }?;
    for path in out.written() {
        println!("{}", path.display());
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) if cli.check && !outcome.passed => {
            for f in &outcome.failures {
                eprintln!("check failed: {f}");
            }
            ExitCode::from(CliError::CheckFailed(String::new()).exit_code())
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bae: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
