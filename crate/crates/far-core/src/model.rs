//! System model: geometry, channel gains, and achievable rates.
//!
//! A fluid-antenna relay sits on a wall of thickness `wall_width` that
//! separates the users from the base station. The relay has two movable
//! ports: port A on the user-facing surface (the plane `x = 0`) at wall
//! coordinates `(y1, z1)`, and port B on the station-facing surface (the
//! plane `x = wall_width`) at `(y2, z2)`. Both ports slide inside the same
//! rectangle `[y_min, y_max] x [z_min, z_max]`.
//!
//! The uplink signal of user `n` travels three legs: user to port A, port A
//! to port B through the wall, and port B to the base station. The in-wall
//! leg propagates faster by the medium factor `A > 1`, so it contributes
//! `d2 / A` to the effective path length
//!
//! ```text
//! L_n = d_n1 + d2 / A + d3
//! ```
//!
//! and the line-of-sight channel gain is `ref_gain * L_n^(-alpha)`. A user
//! granted bandwidth `b` sees the rate `b * log2(1 + p * h / noise_power)`,
//! which is linear in `b`; that linearity is what the bandwidth module's
//! closed form exploits.
//!
//! All quantities are SI (meters, Hz, Watts, bits/s). Conversions from dBm
//! or dB happen at configuration ingestion, never inside the model.

use crate::error::{Error, Result};

/// One uplink user: position on the ground plane `z = 0`, transmit power,
/// and the minimum rate its traffic contract demands.
#[derive(Debug, Clone, PartialEq)]
pub struct UserTerminal {
    /// Distance from the wall plane, in meters (the user-side x coordinate).
    pub x: f64,
    /// Lateral coordinate along the wall, in meters.
    pub y: f64,
    /// Transmit power in Watts.
    pub tx_power: f64,
    /// Minimum required rate in bits/s.
    pub min_rate: f64,
}

/// A complete problem instance.
///
/// Construct with [`Scenario::new`], which enforces the structural
/// invariants; the fields stay public for read access in the numeric code.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub users: Vec<UserTerminal>,
    /// Base-station position `(s1, s2, H)` in the world frame, meters.
    pub bs_position: [f64; 3],
    /// Wall thickness in meters; the station-side surface is `x = wall_width`.
    pub wall_width: f64,
    /// Port rectangle bounds along y, meters, `y_bounds[0] <= y_bounds[1]`.
    pub y_bounds: [f64; 2],
    /// Port rectangle bounds along z, meters.
    pub z_bounds: [f64; 2],
    /// Total bandwidth to split among users, Hz.
    pub total_bandwidth: f64,
    /// Receiver noise power, Watts.
    pub noise_power: f64,
    /// Reference gain at unit effective path length (linear, not dB).
    pub ref_gain: f64,
    /// Path-loss exponent, `>= 1`.
    pub path_loss_exp: f64,
    /// In-wall speed-up factor `A > 1`.
    pub medium_factor: f64,
}

impl Scenario {
    /// Validates and builds a scenario. Every structural invariant violation
    /// is reported with the offending field's name.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        users: Vec<UserTerminal>,
        bs_position: [f64; 3],
        wall_width: f64,
        y_bounds: [f64; 2],
        z_bounds: [f64; 2],
        total_bandwidth: f64,
        noise_power: f64,
        ref_gain: f64,
        path_loss_exp: f64,
        medium_factor: f64,
    ) -> Result<Self> {
        let s = Scenario {
            users,
            bs_position,
            wall_width,
            y_bounds,
            z_bounds,
            total_bandwidth,
            noise_power,
            ref_gain,
            path_loss_exp,
            medium_factor,
        };
        s.validate()?;
        Ok(s)
    }

    /// Re-checks every invariant. Useful after mutating public fields.
    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Error {
            Error::InvalidScenario { field, reason: reason.into() }
        }
        fn finite(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(bad(field, format!("must be finite, got {v}")))
            }
        }

        if self.users.is_empty() {
            return Err(bad("users", "at least one user is required"));
        }
        for (i, u) in self.users.iter().enumerate() {
            finite("users.x", u.x)?;
            finite("users.y", u.y)?;
            if !(u.tx_power > 0.0 && u.tx_power.is_finite()) {
                return Err(bad("users.tx_power", format!("user {i}: must be > 0, got {}", u.tx_power)));
            }
            if !(u.min_rate > 0.0 && u.min_rate.is_finite()) {
                return Err(bad("users.min_rate", format!("user {i}: must be > 0, got {}", u.min_rate)));
            }
        }
        for (axis, v) in ["bs.x", "bs.y", "bs.z"].iter().zip(self.bs_position) {
            if !v.is_finite() {
                return Err(bad("bs_position", format!("{axis} must be finite, got {v}")));
            }
        }
        if !(self.wall_width > 0.0 && self.wall_width.is_finite()) {
            return Err(bad("wall_width", format!("must be > 0, got {}", self.wall_width)));
        }
        for (field, b) in [("y_bounds", self.y_bounds), ("z_bounds", self.z_bounds)] {
            finite(field, b[0])?;
            finite(field, b[1])?;
            if b[0] > b[1] {
                return Err(bad(field, format!("lower bound {} exceeds upper bound {}", b[0], b[1])));
            }
        }
        if !(self.total_bandwidth > 0.0 && self.total_bandwidth.is_finite()) {
            return Err(bad("total_bandwidth", format!("must be > 0, got {}", self.total_bandwidth)));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(bad("noise_power", format!("must be > 0, got {}", self.noise_power)));
        }
        if !(self.ref_gain > 0.0 && self.ref_gain.is_finite()) {
            return Err(bad("ref_gain", format!("must be > 0, got {}", self.ref_gain)));
        }
        if !(self.path_loss_exp >= 1.0 && self.path_loss_exp.is_finite()) {
            return Err(bad("path_loss_exp", format!("must be >= 1, got {}", self.path_loss_exp)));
        }
        if !(self.medium_factor > 1.0 && self.medium_factor.is_finite()) {
            return Err(bad("medium_factor", format!("must be > 1, got {}", self.medium_factor)));
        }
        Ok(())
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    /// Center of the port rectangle; the fixed-location baseline parks both
    /// ports here.
    pub fn rectangle_center(&self) -> (f64, f64) {
        (
            0.5 * (self.y_bounds[0] + self.y_bounds[1]),
            0.5 * (self.z_bounds[0] + self.z_bounds[1]),
        )
    }
}

/// Positions of both relay ports: A at `(y1, z1)` on the user-side surface,
/// B at `(y2, z2)` on the station-side surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortPlacement {
    pub y1: f64,
    pub z1: f64,
    pub y2: f64,
    pub z2: f64,
}

impl PortPlacement {
    pub fn new(y1: f64, z1: f64, y2: f64, z2: f64) -> Self {
        PortPlacement { y1, z1, y2, z2 }
    }

    /// True when both ports lie inside the scenario's rectangle (closed).
    pub fn within_bounds(&self, s: &Scenario) -> bool {
        let [ylo, yhi] = s.y_bounds;
        let [zlo, zhi] = s.z_bounds;
        ylo <= self.y1
            && self.y1 <= yhi
            && ylo <= self.y2
            && self.y2 <= yhi
            && zlo <= self.z1
            && self.z1 <= zhi
            && zlo <= self.z2
            && self.z2 <= zhi
    }
}

// --------------------------------------------------------------------------
// Geometry
// --------------------------------------------------------------------------

/// Euclidean distance from a user at `(x, y, 0)` to port A at `(0, y1, z1)`.
pub fn dist_user_to_port_a(user: &UserTerminal, y1: f64, z1: f64) -> f64 {
    (user.x * user.x + (y1 - user.y) * (y1 - user.y) + z1 * z1).sqrt()
}

/// Straight-line distance through the wall from port A to port B.
/// Always at least `wall_width`.
pub fn dist_port_a_to_port_b(wall_width: f64, y1: f64, z1: f64, y2: f64, z2: f64) -> f64 {
    let dy = y1 - y2;
    let dz = z1 - z2;
    (wall_width * wall_width + dy * dy + dz * dz).sqrt()
}

/// Distance from port B at `(wall_width, y2, z2)` to the base station.
pub fn dist_port_b_to_bs(wall_width: f64, bs_position: [f64; 3], y2: f64, z2: f64) -> f64 {
    let dx = wall_width - bs_position[0];
    let dy = y2 - bs_position[1];
    let dz = z2 - bs_position[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Effective path length of user `n`'s signal: the in-wall leg is shortened
/// by the medium factor.
pub fn effective_length(s: &Scenario, n: usize, p: &PortPlacement) -> f64 {
    let d1 = dist_user_to_port_a(&s.users[n], p.y1, p.z1);
    let d2 = dist_port_a_to_port_b(s.wall_width, p.y1, p.z1, p.y2, p.z2);
    let d3 = dist_port_b_to_bs(s.wall_width, s.bs_position, p.y2, p.z2);
    d1 + d2 / s.medium_factor + d3
}

// --------------------------------------------------------------------------
// Channel and rate
// --------------------------------------------------------------------------

/// Gain at a given effective path length: `ref_gain * length^(-alpha)`.
/// Strictly decreasing in the length, strictly positive for finite length.
pub fn gain_from_effective_length(ref_gain: f64, path_loss_exp: f64, length: f64) -> f64 {
    ref_gain * length.powf(-path_loss_exp)
}

/// Channel gain of user `n` under the given placement.
pub fn channel_gain(s: &Scenario, n: usize, p: &PortPlacement) -> f64 {
    gain_from_effective_length(s.ref_gain, s.path_loss_exp, effective_length(s, n, p))
}

/// Gains of every user, in user order.
pub fn channel_gains(s: &Scenario, p: &PortPlacement) -> Vec<f64> {
    (0..s.n_users()).map(|n| channel_gain(s, n, p)).collect()
}

/// Receive SNR of user `n`: `tx_power * gain / noise_power`.
pub fn snr(s: &Scenario, n: usize, p: &PortPlacement) -> f64 {
    snr_from_gain(s, n, channel_gain(s, n, p))
}

/// SNR from an externally supplied gain (used when gains are probed or
/// replayed rather than derived from a placement).
pub fn snr_from_gain(s: &Scenario, n: usize, gain: f64) -> f64 {
    s.users[n].tx_power * gain / s.noise_power
}

/// Spectral efficiency in bits/s/Hz at a given SNR, `log2(1 + snr)`.
///
/// Routed through `ln_1p` so every module that needs this quantity computes
/// bit-identical values.
pub fn spectral_efficiency_from_snr(snr: f64) -> f64 {
    snr.ln_1p() / std::f64::consts::LN_2
}

/// Spectral efficiency of user `n` under the placement.
pub fn spectral_efficiency(s: &Scenario, n: usize, p: &PortPlacement) -> f64 {
    spectral_efficiency_from_snr(snr(s, n, p))
}

/// Rate of user `n` when granted `bandwidth` Hz. Linear in the bandwidth and
/// increasing in the gain.
pub fn achievable_rate(s: &Scenario, n: usize, p: &PortPlacement, bandwidth: f64) -> f64 {
    bandwidth * spectral_efficiency(s, n, p)
}

// --------------------------------------------------------------------------
// Tests
// --------------------------------------------------------------------------
