//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Error`]. Infeasibility of
//! a scenario is *not* an error: it is reported through the `feasible` flags
//! on results, so callers can distinguish "the input is malformed" from "the
//! input admits no solution".

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A scenario field violates a structural invariant. `field` names the
    /// offending key so front ends can point at the input.
    #[error("invalid scenario: {field}: {reason}")]
    InvalidScenario { field: &'static str, reason: String },

    /// An operation that needs at least one user was given none.
    #[error("no users")]
    NoUsers,

    /// A clip/projection interval with `lo > hi`.
    #[error("empty interval: lo ({lo}) > hi ({hi})")]
    EmptyInterval { lo: f64, hi: f64 },

    /// An argument is outside the mathematical domain of the operation
    /// (e.g. a non-positive slack where a positive one is required).
    #[error("domain violation: {0}")]
    DomainViolation(String),

    /// A linearization was requested around a point where it is undefined.
    #[error("invalid expansion point: {0}")]
    InvalidExpansionPoint(String),

    /// The inner convex solver ran out of iterations without certifying
    /// stationarity. Carries the last projected-gradient norm for diagnosis.
    #[error("subproblem solver hit the {max_iters}-iteration limit (projected-gradient norm {pg_norm:.3e})")]
    SubproblemIterationLimit { max_iters: usize, pg_norm: f64 },

    /// A grid request would enumerate more lattice points than the hard cap.
    /// `suggested` is the coarsest per-axis resolution that fits.
    #[error("grid of {points} points exceeds the {max}-point cap; use a resolution of at least {suggested:.4} m")]
    GridTooLarge { points: u128, max: u128, suggested: f64 },

    /// The reference linear-program solver failed (unbounded or numerically
    /// degenerate input). Infeasible programs are reported as results, not
    /// errors.
    #[error("linear program: {0}")]
    LinearProgram(String),
}
