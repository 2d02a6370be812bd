//! Closed-form placement of the station-side port B.
//!
//! Port B only appears in the station leg `d3` and the in-wall leg `d2`, and
//! `d3` dominates every user's path identically, so the sum rate is maximized
//! by minimizing `d3` alone: project the base station's `(y, z)` onto the
//! port rectangle. Separable box projection reduces to one clip per axis.

use crate::error::{Error, Result};
use crate::model::Scenario;

/// Clamps `value` into `[lo, hi]`. An inverted interval is an error.
pub fn clip(value: f64, lo: f64, hi: f64) -> Result<f64> {
    if lo > hi {
        return Err(Error::EmptyInterval { lo, hi });
    }
    Ok(value.max(lo).min(hi))
}

/// Optimal port-B coordinates: the Euclidean projection of the base
/// station's `(s2, H)` onto the rectangle.
pub fn optimal_port_b(s: &Scenario) -> Result<(f64, f64)> {
    let y2 = clip(s.bs_position[1], s.y_bounds[0], s.y_bounds[1])?;
    let z2 = clip(s.bs_position[2], s.z_bounds[0], s.z_bounds[1])?;
    Ok((y2, z2))
}
