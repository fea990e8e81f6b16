//! Configuration-driven runs of the symmetrization, solver and comparison
//! pipeline. The binary `aniso-symm` is a thin layer over [`run`].

pub mod checks;
pub mod commands;
pub mod compare;
pub mod config;
pub mod output;

use std::fmt;
use std::path::Path;

use clap::ValueEnum;

/// Failure classes with their exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// A check ran and failed (exit 1).
    Failed(String),
    /// Unreadable or invalid configuration (exit 2).
    Config(String),
    /// A numerical routine failed (exit 3).
    Numerics(String),
    /// The problem violates a hypothesis and was not solved (exit 4).
    Hypothesis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Failed(_) => 1,
            Self::Config(_) => 2,
            Self::Numerics(_) => 3,
            Self::Hypothesis(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Failed(m) => write!(f, "check failed: {m}"),
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Numerics(m) => write!(f, "numerical failure: {m}"),
            Self::Hypothesis(m) => write!(f, "refused: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<aniso_symm::Error> for CliError {
    fn from(e: aniso_symm::Error) -> Self {
        use aniso_symm::Error as E;
        match e {
            E::HypothesisViolation(_) => Self::Hypothesis(e.to_string()),
            E::InvalidInput(_) => Self::Config(e.to_string()),
            _ => Self::Numerics(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Klimov,
    SolveRadial,
    SolveAniso,
    Compare,
    Verify,
}

/// Reads the configuration at `config` and runs `command`, writing into `out`.
pub fn run(command: Command, config: &Path, out: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config).map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
    let out = output::Output::new(out, &text)?;
    match command {
        Command::Klimov => commands::klimov(&text, &out),
        Command::SolveRadial => commands::solve_radial(&text, &out),
        Command::SolveAniso => commands::solve_aniso(&text, &out),
        Command::Compare => commands::compare(&text, &out),
        Command::Verify => commands::verify(&text, &out),
    }
}
