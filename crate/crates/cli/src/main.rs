mod commands;
mod config;
mod output;
mod svg;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

/// Simulation and verification for nonlocal degenerate diffusion on the torus.
#[derive(Parser)]
#[command(name = "coulombflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FrontMode {
    Single,
    Double,
    Super,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write observables, snapshots and rearrangements.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a front ODE system.
    Fronts {
        #[arg(long, value_enum)]
        mode: FrontMode,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and write report.json.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Runs executed concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Plot CSV columns to SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        x: String,
        /// Comma-separated column names.
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Simulate { config, out } => commands::simulate(&config, out.as_deref()),
        Command::Fronts { mode, config, out } => commands::fronts(mode, &config, out.as_deref()),
        Command::Verify { config, out, jobs } => commands::verify(&config, out.as_deref(), jobs),
        Command::Plot { input, out, x, y } => commands::plot(&input, &out, &x, &y),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
