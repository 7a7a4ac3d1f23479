//! Command-line front end for the spectral laboratory: single runs,
//! viscosity sweeps, closed-form bound reports, determining-mode
//! probes, and standalone radius fits.
//!
//! Configuration is a flat dotted-key text file (see `config`). Every
//! run writes its artifacts under `--out` and finishes with a
//! `manifest.json` carrying the resolved configuration and a checksum
//! per artifact. Failures print one JSON line to stderr with a
//! `category` of `config`, `blowup`, `io` or `unresolved`, mapped to
//! exit codes 3-6; usage errors exit with 2.

mod commands;
mod config;
mod fail;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "gevlab", version, about = "Pseudo-spectral laboratory for the damped-driven 2D vorticity equation", max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation; write diagnostics, checkpoints and a summary
    Simulate {
        /// Configuration file
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if absent)
        #[arg(long)]
        out: PathBuf,
        /// Override initial.seed for a random initial state
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the viscosity sweep and fit the radius-vs-D scaling
    Sweep {
        /// Configuration file with sweep.* keys
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if absent)
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for explicitly-gridded sweeps
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Override initial.seed for a random initial state
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print every closed-form bound for a configuration as JSON
    Bounds {
        /// Configuration file
        #[arg(long)]
        config: PathBuf,
        /// Also write bounds.json and a manifest under this directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probe master/slave synchronization through low-mode observation
    Sync {
        /// Configuration file with sync.kappa_c
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if absent)
        #[arg(long)]
        out: PathBuf,
        /// Override initial.seed for a random initial state
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit an analyticity radius to a stored shell spectrum
    Radius {
        /// CSV file of `kappa,S` rows
        #[arg(long)]
        spectrum: PathBuf,
        /// Also write radius.json under this directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { config, out, seed } => commands::simulate(&config, &out, seed),
        Command::Sweep { config, out, jobs, seed } => commands::sweep(&config, &out, jobs, seed),
        Command::Bounds { config, out } => commands::bounds(&config, out.as_deref()),
        Command::Sync { config, out, seed } => commands::sync(&config, &out, seed),
        Command::Radius { spectrum, out } => commands::radius(&spectrum, out.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.to_json());
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
