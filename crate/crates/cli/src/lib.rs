//! Batch front end for the `magtor` binary: scenario files, the gradcheck,
//! solve and oracle-compare runs, and their CSV/JSON artifacts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario;
pub mod studies;

use std::path::Path;

use clap::{Parser, Subcommand};

pub use commands::{run_gradcheck, run_oracle_compare, run_solve, solve_scenario, Outcome};
pub use error::CliError;
pub use scenario::{Resolved, Scenario};

#[derive(Debug, Parser)]
#[command(
    name = "magtor",
    version,
    about = "Magnetic geodesics of toric potentials"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Finite-difference check of the functional's gradient.
    Gradcheck(RunArgs),
    /// Solve for a critical path and write trace, residuals and path.
    Solve(RunArgs),
    /// Compare the classical solve with the Legendre oracle.
    OracleCompare(RunArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Scenario file (JSON).
    pub config: std::path::PathBuf,
    /// Output directory, overriding the scenario's.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Gradcheck(a) | Command::Solve(a) | Command::OracleCompare(a) => a,
        }
    }
}

/// Load, validate and run one scenario.
pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    let args = command.args();
    let resolved = Scenario::load(&args.config)?.resolve()?;
    let out = match &args.out {
        Some(dir) => dir.clone(),
        None => resolved.scenario.output_dir.clone(),
    };
    run(command, &resolved, &out)
}

pub fn run(command: &Command, resolved: &Resolved, out: &Path) -> Result<Outcome, CliError> {
    match command {
        Command::Gradcheck(_) => run_gradcheck(resolved, out),
        Command::Solve(_) => run_solve(resolved, out),
        Command::OracleCompare(_) => run_oracle_compare(resolved, out),
    }
}
