//! `whipchain` command-line front end.
//!
//! Each subcommand reads an optional JSON config, writes CSV (and SVG with
//! `--format csv+svg`) into the output directory together with a
//! `manifest.json` holding the resolved config and artifact checksums.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 a
//! convergence study below its threshold.

mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::WhipError;
use output::Format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_THRESHOLD: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "whipchain", version, about = "Discrete chains and continuum whips")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON config for the subcommand.
    #[arg(long, visible_alias = "study")]
    pub config: Option<PathBuf>,
    /// JSON chain state `{theta, omega, g}`; overrides the config.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct RandomArgs {
    /// Number of random samples to draw.
    #[arg(long)]
    pub random: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the chain with RK4 and record diagnostics.
    Simulate(Common),
    /// Tensions and elimination pivots of one state.
    Tension(Common),
    /// Sectional curvatures of the configuration torus.
    Curvature {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        random: RandomArgs,
    },
    /// Continuum Green function table.
    Green(Common),
    /// Method-of-lines evolution of the continuum whip.
    Evolve(Common),
    /// Riccati approximation of the pivots.
    Riccati(Common),
    /// Kinked Green function and its discrete limit.
    #[command(name = "kink-green")]
    KinkGreen(Common),
    /// Convergence study with an order threshold.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Minimum observed order; below it the exit code is 3.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Negative-tension probes.
    Probe {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        random: RandomArgs,
    },
}

/// Outcome of a subcommand that ran to completion.
pub(crate) enum Outcome {
    Ok,
    BelowThreshold { observed: f64, threshold: f64 },
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code. `WHIPCHAIN_THREADS` caps the worker pool.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let threads = std::env::var("WHIPCHAIN_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    let result = match threads {
        Some(t) if t > 0 => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| run(cli.command)),
            Err(e) => Err(WhipError::Invalid(format!("thread pool: {e}"))),
        },
        _ => run(cli.command),
    };
    match result {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::BelowThreshold { observed, threshold }) => {
            eprintln!("observed order {observed:.4} is below the threshold {threshold}");
            EXIT_THRESHOLD
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn run(command: Command) -> crate::Result<Outcome> {
    match command {
        Command::Simulate(c) => commands::simulate(&c),
        Command::Tension(c) => commands::tension(&c),
        Command::Curvature { common, random } => commands::curvature(&common, random.random),
        Command::Green(c) => commands::green(&c),
        Command::Evolve(c) => commands::evolve(&c),
        Command::Riccati(c) => commands::riccati(&c),
        Command::KinkGreen(c) => commands::kink_green(&c),
        Command::Converge { common, threshold } => commands::converge(&common, threshold),
        Command::Probe { common, random } => commands::probe(&common, random.random),
    }
}
