//! Shared fixtures for the benchmark suite.

use far_core::{Scenario, UserTerminal};

/// Deterministic five-user instance on the reference geometry. Benchmarks
/// must not depend on RNG state, so the user positions are spelled out.
pub fn five_user_scenario() -> Scenario {
    let users = vec![
        UserTerminal { x: 204.6, y: 285.1, tx_power: 0.01, min_rate: 1e5 },
        UserTerminal { x: 128.3, y: 188.2, tx_power: 0.01, min_rate: 1e5 },
        UserTerminal { x: 86.6, y: 45.0, tx_power: 0.01, min_rate: 1e5 },
        UserTerminal { x: 92.4, y: 241.2, tx_power: 0.01, min_rate: 1e5 },
        UserTerminal { x: 231.4, y: 71.6, tx_power: 0.01, min_rate: 1e5 },
    ];
    Scenario::new(
        users,
        [350.0, 30.0, 30.0],
        20.0,
        [0.0, 20.0],
        [0.0, 20.0],
        1e7,
        1e-12,
        1e-4,
        2.0,
        3.0,
    )
    .expect("fixture is valid")
}
