//! Library side of the `fch` binary: configuration, commands and the
//! argument-to-exit-code driver.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::Options;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "fch", version, about = "Sixth-order Cahn-Hilliard solver with logarithmic potential")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides `initial.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Integrate to run.t_end, writing ledger, snapshots and a summary.
    Run,
    /// Run the invariant suite and print a pass/fail table.
    Verify,
    /// Measure single-mode decay rates against the dispersion relation.
    Dispersion,
    /// Continuous-dependence experiment on a perturbed pair.
    Cdep,
    /// Run every (lambda, eta, n) combination of the [sweep] block.
    Sweep,
    /// Write the generated initial field.
    Init,
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let mut loaded = config::load(path)?;
    if let Some(seed) = cli.seed {
        loaded.config.initial.seed = seed;
    }
    if cli.threads == Some(0) {
        return Err(CliError::Config("--threads must be positive".into()));
    }
    let opts = Options { out: cli.out.clone(), threads: cli.threads, seed: cli.seed };
    match cli.command {
        Command::Run => commands::cmd_run(&loaded, &opts).map(drop),
        Command::Verify => commands::cmd_verify(&loaded, &opts).map(drop),
        Command::Dispersion => commands::cmd_dispersion(&loaded, &opts).map(drop),
        Command::Cdep => commands::cmd_cdep(&loaded, &opts).map(drop),
        Command::Sweep => commands::cmd_sweep(&loaded, &opts).map(drop),
        Command::Init => commands::cmd_init(&loaded, &opts).map(drop),
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
