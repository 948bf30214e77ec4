//! The `sparsetree` command line: configuration, dispatch and emission.

pub mod config;
pub mod emit;
pub mod run;

use std::fmt;

pub use config::{Format, RunConfig, Subcommand};
pub use run::{run, Report};

use crate::error::Error;

/// Failure classes, each with its own exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad configuration or a violated precondition (exit 2).
    Validation(String),
    /// A size guard refused the computation (exit 3).
    Guard(String),
    /// Reading the config or writing the report failed (exit 1).
    Io(String),
    /// The computation itself failed (exit 1).
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Io(_) | CliError::Compute(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Guard(m) => write!(f, "guard violation: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Compute(m) => write!(f, "computation failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. } | Error::NotStrictlyIncreasing { .. } | Error::DimensionMismatch(_) => {
                CliError::Validation(e.to_string())
            }
            Error::SizeGuard { .. } | Error::Overflow(_) => CliError::Guard(e.to_string()),
            Error::NoConvergence { .. } => CliError::Compute(e.to_string()),
        }
    }
}
