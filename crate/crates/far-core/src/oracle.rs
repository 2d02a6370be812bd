//! Brute-force lattice search over port placements.
//!
//! The grid oracle is the ground truth the iterative solver is judged
//! against: it evaluates the full closed-form bandwidth allocation at every
//! lattice point and keeps the best feasible one. Lattices are anchored at
//! the lower bound with the upper bound appended when it is off-lattice, so
//! halving the resolution produces a superset of points and the best value
//! can only improve.

use crate::bandwidth;
use crate::error::{Error, Result};
use crate::model::{PortPlacement, Scenario};
use rayon::prelude::*;

/// Hard cap on enumerated lattice points per call.
pub const MAX_GRID_POINTS: u128 = 10_000_000;

/// The best feasible lattice point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBest {
    pub placement: PortPlacement,
    pub sum_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub grid_resolution: f64,
    /// `None` when no lattice point satisfies every rate floor.
    pub best: Option<OracleBest>,
    pub evaluated_points: u64,
    /// Share of lattice points where the allocation meets every floor.
    pub feasible_fraction: f64,
}

/// Lattice over `[lo, hi]`: anchored at `lo`, stepped by `resolution`, with
/// `hi` appended when the last step lands short. Halving the resolution
/// reproduces every point of the coarser lattice bit-for-bit.
pub fn axis_lattice(lo: f64, hi: f64, resolution: f64) -> Result<Vec<f64>> {
    if lo > hi {
        return Err(Error::EmptyInterval { lo, hi });
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::DomainViolation(format!(
            "grid resolution must be positive and finite, got {resolution}"
        )));
    }
    // The epsilon absorbs representation error in (hi - lo) / resolution so
    // an on-lattice upper bound is not dropped.
    let steps = ((hi - lo) / resolution + 1e-9).floor() as u64;
    let mut points = Vec::with_capacity(steps as usize + 2);
    for i in 0..=steps {
        points.push((lo + i as f64 * resolution).min(hi));
    }
    if *points.last().unwrap() < hi - 1e-9 * resolution {
        points.push(hi);
    }
    Ok(points)
}

struct GridScan {
    /// `(flat_index, sum_rate)` of the best feasible point so far.
    best: Option<(usize, f64)>,
    feasible: u64,
}

impl GridScan {
    fn empty() -> Self {
        GridScan { best: None, feasible: 0 }
    }

    fn observe(mut self, idx: usize, sum_rate: f64, feasible: bool) -> Self {
        if feasible {
            self.feasible += 1;
            let better = match self.best {
                None => true,
                Some((bi, br)) => sum_rate > br || (sum_rate == br && idx < bi),
            };
            if better {
                self.best = Some((idx, sum_rate));
            }
        }
        self
    }

    /// Associative merge; ties go to the lower flat index, so the reduction
    /// is deterministic under any parallel split.
    fn merge(self, other: Self) -> Self {
        let feasible = self.feasible + other.feasible;
        let best = match (self.best, other.best) {
            (None, b) => b,
            (a, None) => a,
            (Some((ai, ar)), Some((bi, br))) => {
                if ar > br || (ar == br && ai <= bi) {
                    Some((ai, ar))
                } else {
                    Some((bi, br))
                }
            }
        };
        GridScan { best, feasible }
    }
}

fn scan_lattice<F>(s: &Scenario, total: usize, placement_at: F) -> GridScan
where
    F: Fn(usize) -> PortPlacement + Sync + Send,
{
    (0..total)
        .into_par_iter()
        .fold(GridScan::empty, |acc, idx| {
            let eval = bandwidth::evaluate_placement(s, &placement_at(idx));
            acc.observe(idx, eval.allocation.sum_rate, eval.feasible)
        })
        .reduce(GridScan::empty, GridScan::merge)
}

fn finish(
    s: &Scenario,
    resolution: f64,
    total: usize,
    scanned: GridScan,
    placement_at: impl Fn(usize) -> PortPlacement,
) -> OracleResult {
    let best = scanned.best.map(|(idx, _)| {
        let placement = placement_at(idx);
        // Recompute at the winner so the stored value matches a fresh
        // evaluation bit-for-bit.
        let sum_rate = bandwidth::allocate(s, &placement).sum_rate;
        OracleBest { placement, sum_rate }
    });
    OracleResult {
        grid_resolution: resolution,
        best,
        evaluated_points: total as u64,
        feasible_fraction: scanned.feasible as f64 / total as f64,
    }
}

/// Exhaustive search over `(y1, z1)` with port B pinned at `(y2, z2)`.
pub fn grid_2d(s: &Scenario, y2: f64, z2: f64, resolution: f64) -> Result<OracleResult> {
    s.validate()?;
    let ys = axis_lattice(s.y_bounds[0], s.y_bounds[1], resolution)?;
    let zs = axis_lattice(s.z_bounds[0], s.z_bounds[1], resolution)?;
    let points = ys.len() as u128 * zs.len() as u128;
    if points > MAX_GRID_POINTS {
        let ratio = (points as f64 / MAX_GRID_POINTS as f64).sqrt();
        return Err(Error::GridTooLarge {
            points,
            max: MAX_GRID_POINTS,
            suggested: resolution * ratio * 1.01,
        });
    }
    let total = points as usize;
    let at = |idx: usize| PortPlacement::new(ys[idx / zs.len()], zs[idx % zs.len()], y2, z2);
    let scanned = scan_lattice(s, total, at);
    Ok(finish(s, resolution, total, scanned, at))
}

/// Exhaustive joint search over all four coordinates. Quantifies what the
/// closed-form port-B stage gives up relative to a joint optimization.
pub fn grid_4d(s: &Scenario, resolution: f64) -> Result<OracleResult> {
    s.validate()?;
    let ys = axis_lattice(s.y_bounds[0], s.y_bounds[1], resolution)?;
    let zs = axis_lattice(s.z_bounds[0], s.z_bounds[1], resolution)?;
    let (ny, nz) = (ys.len() as u128, zs.len() as u128);
    let points = ny * nz * ny * nz;
    if points > MAX_GRID_POINTS {
        let ratio = (points as f64 / MAX_GRID_POINTS as f64).powf(0.25);
        return Err(Error::GridTooLarge {
            points,
            max: MAX_GRID_POINTS,
            suggested: resolution * ratio * 1.01,
        });
    }
    let total = points as usize;
    // Flat order (y1, z1, y2, z2) lexicographic, so index ties resolve in
    // that coordinate order.
    let at = |idx: usize| {
        let (ny, nz) = (ys.len(), zs.len());
        let iz2 = idx % nz;
        let iy2 = (idx / nz) % ny;
        let iz1 = (idx / (nz * ny)) % nz;
        let iy1 = idx / (nz * ny * nz);
        PortPlacement::new(ys[iy1], zs[iz1], ys[iy2], zs[iz2])
    };
    let scanned = scan_lattice(s, total, at);
    Ok(finish(s, resolution, total, scanned, at))
}

// --------------------------------------------------------------------------
// Tests
// --------------------------------------------------------------------------
