//! Command-line front end: privacy-accounting sweeps, federated-learning
//! simulation runs, and single-order Rényi queries, all emitting
//! deterministic CSV or JSON.

mod commands;
mod config_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

/// Failures split by exit code: configuration and usage problems exit
/// with 1, domain violations inside the computation with 2.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Domain(String),
}

#[derive(Parser)]
#[command(
    name = "oacfl",
    version,
    about = "Privacy accounting and simulation for over-the-air federated learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Privacy accounting over iteration horizons.
    Account {
        #[command(subcommand)]
        command: AccountCommand,
    },
    /// Run the over-the-air training simulation and record its trajectory.
    Simulate {
        /// Config file with `system`, `task`, and `accounting` blocks.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; a `.meta.json` sidecar is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Rényi-DP queries for a single mechanism invocation.
    Rdp {
        #[command(subcommand)]
        command: RdpCommand,
    },
}

#[derive(Subcommand)]
enum AccountCommand {
    /// Sweep composite epsilon over every horizon and sampling rate.
    Sweep {
        /// Config file with an `accountant` block.
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated sampling rates; defaults to the config's rate.
        #[arg(long, value_delimiter = ',')]
        rates: Option<Vec<f64>>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum RdpCommand {
    /// Evaluate the subsampled Gaussian mechanism at one Rényi order.
    Eval {
        /// Sampling rate in [0, 1].
        #[arg(long)]
        rate: f64,
        /// Noise multiplier, in units of the query sensitivity.
        #[arg(long)]
        noise: f64,
        /// Integer Rényi order, at least 2.
        #[arg(long)]
        alpha: u32,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error) => {
            let _ = error.print();
            return if matches!(
                error.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };

    let result = match cli.command {
        Command::Account {
            command: AccountCommand::Sweep { config, rates, out },
        } => commands::account_sweep(&config, rates, &out),
        Command::Simulate { config, out } => commands::simulate(&config, &out),
        Command::Rdp {
            command: RdpCommand::Eval { rate, noise, alpha },
        } => commands::rdp_eval(rate, noise, alpha),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Domain(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
