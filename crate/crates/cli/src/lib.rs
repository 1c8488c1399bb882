//! Command-line front end: load an instance, run a solver to its OUT point or
//! budget, write the trace, and re-verify traces.
//!
//! Exit codes: 0 OUT defined (or trace verified), 1 parse/validation error,
//! 2 oracle infeasible, 3 OUT undefined within budget, 4 verification mismatch.

pub mod cache;
pub mod commands;
pub mod config;
pub mod trace;

pub use commands::{batch_command, run_command, verify_command, Overrides, RunOutcome};
pub use config::InstanceConfig;
pub use trace::{Footer, Trace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("oracle infeasible: {0}")]
    OracleInfeasible(String),
    #[error("verification failed: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse(_) | Self::Validation(_) | Self::Io(_) => 1,
            Self::OracleInfeasible(_) => 2,
            Self::Mismatch(_) => 4,
        }
    }
}
