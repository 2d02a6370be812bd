//! Library half of the `far` binary: scenario file I/O, deterministic
//! scenario generation, and the power-sweep table writer.
//!
//! Everything here is deterministic: the only randomness is a seeded,
//! versioned generator, and emitted tables carry no paths, timestamps, or
//! other machine state, so byte-identical reruns are part of the contract.

use std::fmt;

pub mod generate;
pub mod scenario_file;
pub mod sweep;

/// Process-level failure categories. Each maps to a documented exit code so
/// scripts can branch on the kind of failure without parsing messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad input: unreadable or malformed files, invalid field values,
    /// unusable flag combinations. Exit code 1.
    Validation(String),
    /// Structurally valid scenario that admits no solution meeting every
    /// rate floor. Exit code 2.
    Infeasible(String),
    /// The solver itself failed; a bug or a pathological instance. Exit
    /// code 3.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "validation error: {msg}"),
            CliError::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            CliError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<far_core::Error> for CliError {
    fn from(e: far_core::Error) -> Self {
        use far_core::Error as E;
        match e {
            E::InvalidScenario { .. }
            | E::NoUsers
            | E::EmptyInterval { .. }
            | E::DomainViolation(_)
            | E::GridTooLarge { .. } => CliError::Validation(e.to_string()),
            E::InvalidExpansionPoint(_)
            | E::SubproblemIterationLimit { .. }
            | E::LinearProgram(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// `10^(dBm/10)` milliwatts expressed in watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Plain decibel value to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
