//! Joint port-placement and bandwidth-allocation solver for an uplink relay
//! whose two antenna ports slide within a bounded wall rectangle.
//!
//! Users transmit to port A on the indoor face, the signal crosses the wall
//! to port B, and port B forwards to the base station. The channel gain of
//! each user is a deterministic function of the three-segment path length,
//! so the system design reduces to placing the two ports and splitting a
//! shared bandwidth budget under per-user minimum rates.
//!
//! Pipeline ([`solver::solve`]):
//!
//! 1. Port B drops out of the user-dependent terms and is placed by a
//!    closed-form projection ([`port_b::optimal_port_b`]).
//! 2. For each hypothesis "user k holds the surplus bandwidth", port A is
//!    optimized by multi-start successive convex approximation
//!    ([`sca::PortAProblem`]); hypotheses that are not self-consistent at
//!    their solved placement are discarded.
//! 3. Bandwidth splits in closed form: pinned users sit exactly at their
//!    rate floors and the best user absorbs the remainder
//!    ([`bandwidth::allocate`]).
//!
//! Two independent verification routes back the fast paths: a tiny simplex
//! LP solver ([`bandwidth::lp_oracle`]) for the allocation and exhaustive
//! lattice search ([`oracle::grid_2d`], [`oracle::grid_4d`]) for placement.
//! Everything is deterministic: no unseeded randomness, and parallel
//! reductions are associative with index tie-breaks.

pub mod bandwidth;
pub mod error;
pub mod model;
pub mod oracle;
pub mod port_b;
pub mod sca;
pub mod simplex;
pub mod solver;

pub use bandwidth::{allocate, lp_oracle, BandwidthAllocation};
pub use error::{Error, Result};
pub use model::{PortPlacement, Scenario, UserTerminal};
pub use oracle::{grid_2d, grid_4d, OracleResult};
pub use port_b::optimal_port_b;
pub use sca::{PortAProblem, ScaState, ScaTrace, Termination};
pub use solver::{
    equal_bandwidth_baseline, fixed_location_baseline, solve, solve_with, Scheme, SolveReport,
    SolverConfig,
};
