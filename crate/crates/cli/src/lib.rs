//! Command-line front end for the `rarbf` library.
//!
//! Five subcommands share one key set (see [`config`]):
//!
//! - `solve`: one design for a generated or loaded instance.
//! - `validate`: Monte Carlo check of a saved beamformer file.
//! - `experiment`: feasibility, power and satisfaction tables over a γ grid.
//! - `bisect`: one design with its conservatism knob refined by bisection.
//! - `bench`: solve-time table over problem sizes.
//!
//! # Files
//!
//! All JSON. Complex vectors are stored as interleaved real/imaginary
//! pairs, `[re₀, im₀, re₁, im₁, ...]`, in text, so there is no binary byte
//! order to track.
//!
//! - Instance: `{n_t, k, sigma2[], gamma_db[], rho[], channels[][],
//!   error_model{type, sigma_e2 | epsilon, correlation}}`. Noise and outage
//!   values are linear, targets are dB.
//! - Beamformers: `{n_t, k, beams[][]}`, one interleaved vector per user.
//! - `manifest.json`: `{subcommand, versions{rarbf, rarbf_cli}, seed,
//!   config, wall_seconds, artifacts[], exit_status}`. `config` holds every
//!   resolved key and can be passed back through `--config`.
//!
//! CSV tables use the experiment module schemas; empty cells hold `NA`.
//!
//! Exit status: 0 on success, 2 when the design is infeasible, 1 on any
//! error (usage errors included). A solver failure writes the conic
//! program to `failure.dump` and prints its path.

pub mod commands;
pub mod config;
pub mod plot;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::run;
pub use config::{resolve, Command, Resolved, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] rarbf::Error),
    #[error("solver failure ({status}); conic program written to {dump}")]
    SolverFailure { status: String, dump: PathBuf },
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(rarbf::Error::Json(e))
    }
}

/// Outcome of a successful run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Infeasible,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Done => 0,
            Outcome::Infeasible => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rarbf",
    version,
    about = "Outage-constrained robust transmit beamforming",
    after_long_help = config::KEY_HELP,
    subcommand_required = true,
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Config file: TOML, or a JSON run manifest to replay
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Design beamformers for one instance
    #[command(after_long_help = config::KEY_HELP)]
    Solve(RunArgs),
    /// Monte Carlo check of saved beamformers against an instance
    #[command(after_long_help = config::KEY_HELP)]
    Validate(RunArgs),
    /// Feasibility, power and satisfaction tables over a target grid
    #[command(after_long_help = config::KEY_HELP)]
    Experiment(RunArgs),
    /// One design with its conservatism knob refined by bisection
    #[command(after_long_help = config::KEY_HELP)]
    Bisect(RunArgs),
    /// Solve-time table over problem sizes
    #[command(after_long_help = config::KEY_HELP)]
    Bench(RunArgs),
}

impl CliCommand {
    pub fn parts(self) -> (Command, RunArgs) {
        match self {
            CliCommand::Solve(a) => (Command::Solve, a),
            CliCommand::Validate(a) => (Command::Validate, a),
            CliCommand::Experiment(a) => (Command::Experiment, a),
            CliCommand::Bisect(a) => (Command::Bisect, a),
            CliCommand::Bench(a) => (Command::Bench, a),
        }
    }
}

/// Parses argv and the optional config file into resolved settings.
pub fn parse_config<I, T>(argv: I) -> Result<Resolved, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    resolve_cli(cli)
}

pub fn resolve_cli(cli: Cli) -> Result<Resolved, CliError> {
    let (cmd, args) = cli.command.parts();
    let file = args.config.as_deref().map(config::read_config_file).transpose()?;
    resolve(cmd, args.settings, file)
}

/// Runs argv end to end and returns the process exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match resolve_cli(cli).and_then(|r| run(&r)) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("rarbf: {e}");
            1
        }
    }
}
