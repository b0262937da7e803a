//! Command-line front end for the `quasim` toolkit.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 protocol failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

mod commands;
pub mod inputs;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] quasim::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("could not start thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Parser)]
#[command(name = "quasim", version, about = "Quasi-stochastic simulation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a quasi-stochastic matrix into positive and negative stochastic parts.
    Decompose(DecomposeArgs),
    /// Run the nebit simulation protocol on one state.
    Simulate(SimulateArgs),
    /// Compare blind and communicating post-selection on the shared state.
    Bipartite(BipartiteArgs),
    /// Exact feasibility checks.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Inspect the region of states that stay non-negative under the model matrix.
    Region(RegionArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// `paper-S`, `identity` or a matrix JSON file.
    #[arg(long, default_value = "paper-S")]
    pub matrix: String,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Generated and printed to stderr when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Worker threads; the output does not depend on this value.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub threads: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `e0`..`e5`, `uniform`, `pAB`, an inline list such as `1,0,0`, or a JSON file.
    #[arg(long)]
    pub state: String,
    /// `paper-S`, `identity` or a matrix JSON file. A d×d matrix acts on
    /// the second factor of a d²-level state.
    #[arg(long, default_value = "paper-S")]
    pub matrix: String,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct BipartiteArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum CheckCommand {
    /// Is there one stochastic matrix mapping each input vertex to its output?
    Map {
        #[arg(long, default_value = "e0:e1,e2:e3,e4:e5")]
        pairs: String,
    },
    /// Is the joint state a mixture of products of the six vertices?
    Sep {
        #[arg(long, default_value = "pAB")]
        state: String,
    },
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    /// Check the orbit e0 -> ... -> e5 -> e0 and that S^6 is the identity.
    #[arg(long)]
    pub verify: bool,
    /// Compare the two membership tests on this many random rational points.
    #[arg(long)]
    pub sample: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Classify one point, e.g. `1,0,0`.
    #[arg(long)]
    pub point: Option<String>,
}

/// Parse `args` (program name first) and execute, returning the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return e.exit_code();
        }
    };
    match commands::execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
