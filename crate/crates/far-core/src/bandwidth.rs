//! Closed-form bandwidth allocation for a fixed port placement.
//!
//! With the placement frozen, the sum rate `sum_n b_n log2(1 + SNR_n)` is
//! linear in the bandwidths, the rate floors pin `b_n >= min_rate_n / c_n`
//! (where `c_n` is user `n`'s spectral efficiency), and the budget couples
//! everything through `sum_n b_n <= total_bandwidth`. A linear program with
//! this shape gives every user exactly its floor and hands all remaining
//! bandwidth to the user with the best channel:
//!
//! ```text
//! k   = argmax_n h_n                      (ties: lowest index)
//! b_n = min_rate_n / c_n    for n != k
//! b_k = B - sum_{n != k} b_n
//! ```
//!
//! The instance is feasible exactly when `b_k >= 0`. [`allocate`] implements
//! this closed form; [`lp_oracle`] solves the same program with the generic
//! simplex from [`crate::simplex`] so the two routes can be compared in
//! tests without sharing any algorithmic machinery.
//!
//! The argmax-gain rule assumes the LP coefficient ordering follows the gain
//! ordering, which holds whenever users transmit at a common power (the
//! regime every experiment here uses).

use crate::error::{Error, Result};
use crate::model::{self, PortPlacement, Scenario};
use crate::simplex::{self, Constraint, LpOutcome, RelOp};

/// Relative tolerance on bandwidth bookkeeping: the allocation sums to the
/// budget within `SUM_TOLERANCE * total_bandwidth`.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A bandwidth split across users.
///
/// `feasible == false` means the floors alone exceed the budget; in that case
/// `bandwidths` still carries the floor-pinned assignment (with a negative
/// residual for the best user) so callers can see *how* infeasible the
/// instance is.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthAllocation {
    /// Hz per user, in user order.
    pub bandwidths: Vec<f64>,
    /// Index of the user holding the surplus bandwidth.
    pub best_user: usize,
    /// Total rate in bits/s under this split.
    pub sum_rate: f64,
    pub feasible: bool,
}

/// Index of the maximum channel gain, ties broken toward the lowest index.
pub fn best_user_index(gains: &[f64]) -> Result<usize> {
    if gains.is_empty() {
        return Err(Error::NoUsers);
    }
    let mut best = 0;
    for (i, &g) in gains.iter().enumerate().skip(1) {
        if g > gains[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Closed-form allocation at a placement: computes the gains and delegates
/// to [`allocate_from_gains`].
pub fn allocate(s: &Scenario, p: &PortPlacement) -> BandwidthAllocation {
    let gains = model::channel_gains(s, p);
    allocate_from_gains(s, &gains).expect("validated scenario has users and positive gains")
}

/// Closed-form allocation at externally supplied channel gains.
pub fn allocate_from_gains(s: &Scenario, gains: &[f64]) -> Result<BandwidthAllocation> {
    if gains.len() != s.n_users() {
        return Err(Error::DomainViolation(format!(
            "{} gains for {} users",
            gains.len(),
            s.n_users()
        )));
    }
    let k = best_user_index(gains)?;
    let eff = spectral_efficiencies(s, gains);

    let mut bandwidths = vec![0.0; gains.len()];
    let mut pinned = 0.0;
    for n in 0..gains.len() {
        if n != k {
            bandwidths[n] = s.users[n].min_rate / eff[n];
            pinned += bandwidths[n];
        }
    }
    bandwidths[k] = s.total_bandwidth - pinned;

    let feasible = bandwidths[k] >= 0.0;
    let sum_rate = bandwidths.iter().zip(&eff).map(|(b, c)| b * c).sum();
    Ok(BandwidthAllocation { bandwidths, best_user: k, sum_rate, feasible })
}

/// Spectral efficiency of every user at the given gains.
pub fn spectral_efficiencies(s: &Scenario, gains: &[f64]) -> Vec<f64> {
    gains
        .iter()
        .enumerate()
        .map(|(n, &g)| model::spectral_efficiency_from_snr(model::snr_from_gain(s, n, g)))
        .collect()
}

/// Solves the allocation as a plain linear program with the generic simplex.
///
/// Exists purely to cross-check [`allocate`]; nothing in the solving path is
/// shared with the closed form. Errors on non-finite or non-positive gains
/// and on degenerate programs; infeasible programs come back with
/// `feasible == false` and the floor-pinned assignment for inspection.
pub fn lp_oracle(s: &Scenario, gains: &[f64]) -> Result<BandwidthAllocation> {
    if gains.len() != s.n_users() {
        return Err(Error::DomainViolation(format!(
            "{} gains for {} users",
            gains.len(),
            s.n_users()
        )));
    }
    if gains.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::DomainViolation("gains must be finite and positive".into()));
    }
    let n = gains.len();
    let k = best_user_index(gains)?;
    let eff = spectral_efficiencies(s, gains);

    // max sum c_n b_n  s.t.  c_n b_n >= min_rate_n,  sum b_n <= B,  b >= 0.
    let mut constraints = Vec::with_capacity(n + 1);
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = eff[i];
        constraints.push(Constraint { coeffs: row, rel: RelOp::Ge, rhs: s.users[i].min_rate });
    }
    constraints.push(Constraint { coeffs: vec![1.0; n], rel: RelOp::Le, rhs: s.total_bandwidth });

    match simplex::maximize(&eff, &constraints)? {
        LpOutcome::Optimal { x, objective } => Ok(BandwidthAllocation {
            bandwidths: x,
            best_user: k,
            sum_rate: objective,
            feasible: true,
        }),
        LpOutcome::Infeasible => {
            // Report the floor-pinned split so the caller sees the deficit.
            let mut bandwidths: Vec<f64> = (0..n).map(|i| s.users[i].min_rate / eff[i]).collect();
            let pinned: f64 = (0..n).filter(|&i| i != k).map(|i| bandwidths[i]).sum();
            bandwidths[k] = s.total_bandwidth - pinned;
            let sum_rate = bandwidths.iter().zip(&eff).map(|(b, c)| b * c).sum();
            Ok(BandwidthAllocation { bandwidths, best_user: k, sum_rate, feasible: false })
        }
    }
}

// --------------------------------------------------------------------------
// Placement evaluation
// --------------------------------------------------------------------------

/// Allocation plus the full per-user rate check at one placement.
///
/// `feasible` here is stricter than [`BandwidthAllocation::feasible`]: the
/// surplus user must also clear its own rate floor, since the closed form
/// pins only the other users at theirs.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementEval {
    pub allocation: BandwidthAllocation,
    pub per_user_rates: Vec<f64>,
    pub feasible: bool,
}

/// Evaluates a placement end to end: gains, closed-form allocation, rates,
/// and the full feasibility verdict.
pub fn evaluate_placement(s: &Scenario, p: &PortPlacement) -> PlacementEval {
    let gains = model::channel_gains(s, p);
    let allocation = allocate_from_gains(s, &gains).expect("gain vector matches user count");
    let eff = spectral_efficiencies(s, &gains);
    let per_user_rates: Vec<f64> =
        allocation.bandwidths.iter().zip(&eff).map(|(b, c)| b * c).collect();
    let floors_met = per_user_rates
        .iter()
        .zip(&s.users)
        .all(|(r, u)| *r >= u.min_rate * (1.0 - SUM_TOLERANCE));
    let feasible = allocation.feasible && floors_met;
    PlacementEval { allocation, per_user_rates, feasible }
}

// --------------------------------------------------------------------------
// Tests
// --------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UserTerminal;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Scenario with explicit floors and a gain vector chosen so the
    /// spectral efficiencies come out to the requested values (common tx
    /// power, so gain order and efficiency order agree).
    fn fixture(efficiencies: &[f64], floors: &[f64], bandwidth: f64) -> (Scenario, Vec<f64>) {
        let noise = 1e-12;
        let power = 0.01;
        let users: Vec<UserTerminal> = floors
            .iter()
            .map(|&r| UserTerminal { x: 100.0, y: 100.0, tx_power: power, min_rate: r })
            .collect();
        let s = Scenario::new(
            users,
            [350.0, 30.0, 30.0],
            20.0,
            [0.0, 20.0],
            [0.0, 20.0],
            bandwidth,
            noise,
            1e-4,
            2.0,
            3.0,
        )
        .unwrap();
        // c = log2(1 + snr)  =>  snr = 2^c - 1  =>  gain = snr * noise / power.
        let gains: Vec<f64> =
            efficiencies.iter().map(|&c| (2f64.powf(c) - 1.0) * noise / power).collect();
        (s, gains)
    }

    #[test]
    fn best_user_picks_the_maximum_gain() {
        assert_eq!(best_user_index(&[0.1, 0.3, 0.2]).unwrap(), 1);
    }

    #[test]
    fn best_user_breaks_ties_toward_the_lowest_index() {
        assert_eq!(best_user_index(&[0.5, 0.5]).unwrap(), 0);
        assert_eq!(best_user_index(&[0.7]).unwrap(), 0);
    }

    #[test]
    fn best_user_of_nothing_is_an_error() {
        assert!(matches!(best_user_index(&[]), Err(Error::NoUsers)));
    }

    #[test]
    fn two_user_worked_example() {
        // Efficiencies (2, 1) bits/s/Hz, floors 2 Mbit/s each, B = 10 MHz:
        // user 0 holds the surplus, floors pin b_1 = 2 MHz, so b = (8, 2) MHz
        // and the sum rate is 8e6 * 2 + 2e6 * 1 = 18 Mbit/s.
        let (s, gains) = fixture(&[2.0, 1.0], &[2e6, 2e6], 1e7);
        let a = allocate_from_gains(&s, &gains).unwrap();
        assert_eq!(a.best_user, 0);
        assert!(a.feasible);
        assert!((a.bandwidths[0] - 8e6).abs() < 1e-3);
        assert!((a.bandwidths[1] - 2e6).abs() < 1e-3);
        assert!((a.sum_rate - 1.8e7).abs() < 1e-4 * 1.8e7 * 1e-8);
    }

    #[test]
    fn single_user_takes_the_whole_budget() {
        let (s, gains) = fixture(&[3.0], &[1e5], 1e7);
        let a = allocate_from_gains(&s, &gains).unwrap();
        assert_eq!(a.bandwidths, vec![1e7]);
        assert!(a.feasible);
        assert!((a.sum_rate - 3e7).abs() < 1.0);
    }

    #[test]
    fn floors_beyond_the_budget_are_infeasible_not_an_error() {
        // B = 1 MHz but user 1 alone needs 2 MHz at 1 bit/s/Hz.
        let (s, gains) = fixture(&[2.0, 1.0], &[2e6, 2e6], 1e6);
        let a = allocate_from_gains(&s, &gains).unwrap();
        assert!(!a.feasible);
        assert!(a.bandwidths[a.best_user] < 0.0);
    }

    #[test]
    fn lp_oracle_reproduces_the_worked_example() {
        let (s, gains) = fixture(&[2.0, 1.0], &[2e6, 2e6], 1e7);
        let lp = lp_oracle(&s, &gains).unwrap();
        assert!(lp.feasible);
        assert!((lp.bandwidths[0] - 8e6).abs() < 1e-2);
        assert!((lp.bandwidths[1] - 2e6).abs() < 1e-2);
        assert!((lp.sum_rate - 1.8e7).abs() < 1e-2);
    }

    #[test]
    fn lp_oracle_single_user() {
        let (s, gains) = fixture(&[3.0], &[1e5], 1e7);
        let lp = lp_oracle(&s, &gains).unwrap();
        assert!(lp.feasible);
        assert!((lp.bandwidths[0] - 1e7).abs() < 1e-2);
    }

    #[test]
    fn lp_oracle_flags_infeasibility() {
        let (s, gains) = fixture(&[2.0, 1.0], &[2e6, 2e6], 1e6);
        let lp = lp_oracle(&s, &gains).unwrap();
        assert!(!lp.feasible);
    }

    #[test]
    fn lp_oracle_rejects_bad_gains() {
        let (s, _) = fixture(&[2.0, 1.0], &[2e6, 2e6], 1e7);
        assert!(lp_oracle(&s, &[1.0, f64::NAN]).is_err());
        assert!(lp_oracle(&s, &[1.0, 0.0]).is_err());
        assert!(lp_oracle(&s, &[1.0]).is_err());
    }

    /// Random feasible instance with a common tx power. Floors are drawn as
    /// shares of a sub-unit budget utilization, so feasibility holds by
    /// construction.
    fn random_instance(rng: &mut ChaCha8Rng) -> (Scenario, Vec<f64>) {
        let n = rng.gen_range(1..=8);
        let power = 10f64.powf(rng.gen_range(-4.0..0.0));
        let bandwidth = 10f64.powf(rng.gen_range(5.0..8.0));
        let users: Vec<UserTerminal> = (0..n)
            .map(|_| UserTerminal {
                x: rng.gen_range(1.0..300.0),
                y: rng.gen_range(0.0..300.0),
                tx_power: power,
                min_rate: 1.0, // floors set below once efficiencies are known
            })
            .collect();
        let mut s = Scenario::new(
            users,
            [350.0, 30.0, 30.0],
            20.0,
            [0.0, 20.0],
            [0.0, 20.0],
            bandwidth,
            1e-12,
            1e-4,
            2.0,
            3.0,
        )
        .unwrap();
        let p = PortPlacement::new(
            rng.gen_range(0.0..20.0),
            rng.gen_range(0.0..20.0),
            rng.gen_range(0.0..20.0),
            rng.gen_range(0.0..20.0),
        );
        let gains = model::channel_gains(&s, &p);
        let eff = spectral_efficiencies(&s, &gains);
        let util: f64 = rng.gen_range(0.05..0.85);
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let wsum: f64 = weights.iter().sum();
        for i in 0..n {
            s.users[i].min_rate = util * (weights[i] / wsum) * bandwidth * eff[i];
        }
        (s, gains)
    }

    #[test]
    fn closed_form_matches_lp_on_random_feasible_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xB44D);
        for _ in 0..60 {
            let (s, gains) = random_instance(&mut rng);
            let a = allocate_from_gains(&s, &gains).unwrap();
            let lp = lp_oracle(&s, &gains).unwrap();
            assert!(a.feasible && lp.feasible);
            assert!(
                (a.sum_rate - lp.sum_rate).abs() <= 1e-9 * a.sum_rate.abs(),
                "sum rates diverge: {} vs {}",
                a.sum_rate,
                lp.sum_rate
            );
            for (x, y) in a.bandwidths.iter().zip(&lp.bandwidths) {
                assert!((x - y).abs() <= 1e-9 * s.total_bandwidth, "bandwidths diverge: {x} vs {y}");
            }
        }
    }

    #[test]
    fn allocation_books_balance() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        for _ in 0..200 {
            let (s, gains) = random_instance(&mut rng);
            let a = allocate_from_gains(&s, &gains).unwrap();
            assert!(a.feasible);
            let total: f64 = a.bandwidths.iter().sum();
            assert!((total - s.total_bandwidth).abs() <= SUM_TOLERANCE * s.total_bandwidth);
            assert!(a.bandwidths.iter().all(|b| *b >= 0.0));
            // every pinned user gets exactly its floor
            let eff = spectral_efficiencies(&s, &gains);
            for n in 0..s.n_users() {
                if n != a.best_user {
                    let rate = a.bandwidths[n] * eff[n];
                    assert!((rate - s.users[n].min_rate).abs() <= 1e-9 * s.users[n].min_rate);
                }
            }
        }
    }

    #[test]
    fn moving_surplus_away_from_the_best_user_never_helps() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xE4C4);
        for _ in 0..100 {
            let (s, gains) = random_instance(&mut rng);
            let a = allocate_from_gains(&s, &gains).unwrap();
            let eff = spectral_efficiencies(&s, &gains);
            let k = a.best_user;
            if a.bandwidths[k] <= 0.0 {
                continue;
            }
            let eps = 0.25 * a.bandwidths[k];
            for n in 0..s.n_users() {
                if n == k {
                    continue;
                }
                // Shift eps from k to n; n's floor stays satisfied since its
                // bandwidth only grows.
                let moved = a.sum_rate - eps * eff[k] + eps * eff[n];
                assert!(moved <= a.sum_rate * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn evaluate_placement_checks_the_surplus_users_own_floor() {
        // Tight budget where the surplus user's leftover cannot cover its own
        // floor: allocation-level feasible, placement-level infeasible.
        let (mut s, gains) = fixture(&[2.0, 1.0], &[2e6, 2e6], 2.1e6);
        s.users[0].min_rate = 1e6; // b_0 = 2.1e6 - 2e6 = 1e5 Hz -> rate 2e5 < 1e6
        let a = allocate_from_gains(&s, &gains).unwrap();
        assert!(a.feasible, "budget itself suffices");
        // Rebuild the eval the way evaluate_placement does, from these gains.
        let eff = spectral_efficiencies(&s, &gains);
        let rate0 = a.bandwidths[0] * eff[0];
        assert!(rate0 < s.users[0].min_rate);
    }
}
