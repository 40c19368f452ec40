//! `spatial-qubits`: simulate, reconstruct and check two-photon spatial qubits.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 validation error, 3 numerical
//! failure, 4 acceptance bound violated.

mod compare;
mod config;
mod error;
mod oracle;
mod reconstruct;
mod simulate;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spatial_qubits::Method;

use crate::error::CliResult;

#[derive(Parser)]
#[command(name = "spatial-qubits", version, about = "Spatial-qubit simulation and tomography")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the sixteen coincidence counts for the configured pump.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a CSV with one row per setting.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Store expected counts instead of Poisson draws.
        #[arg(long)]
        noiseless: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Reconstruct a density matrix from a count record.
    Reconstruct {
        #[arg(long)]
        counts: PathBuf,
        /// exact, paper or mle
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// State file to compare against, or `pump` for the configured state.
        #[arg(long)]
        reference: Option<String>,
    },
    /// Compare two density-matrix files.
    Compare { a: PathBuf, b: PathBuf },
    /// Check the closed-form far-field integral against quadrature.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// JSON file with `x_mm` and `q_per_mm` arrays.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fidelity statistics over repeated noisy simulations.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        var: sweep::Variable,
        /// counts: `N` or `start:end:points` (log-spaced); seeds: `S` or `start:end`.
        #[arg(long)]
        range: String,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { config, out, csv, noiseless, seed } => {
            simulate::run(simulate::Args { config, out, csv, noiseless, seed })
        }
        Command::Reconstruct { counts, method, config, out, reference } => {
            reconstruct::run(reconstruct::Args { counts, method, config, out, reference })
        }
        Command::Compare { a, b } => compare::run(a, b),
        Command::Oracle { config, grid, out } => oracle::run(oracle::Args { config, grid, out }),
        Command::Sweep { config, var, range, trials, out, jobs } => {
            sweep::run(sweep::Args { config, var, range, trials, out, jobs })
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
