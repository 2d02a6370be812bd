//! Successive convex approximation for the user-side port A.
//!
//! With port B frozen and a candidate surplus user `k`, the remaining
//! decision is where to put port A. The sum rate reduces to
//!
//! ```text
//! F_k(y1, z1) = (B - sum_{n != k} R_n / c_n(y1, z1)) * c_k(y1, z1)
//! ```
//!
//! with `c_n = log2(1 + SNR_n)`. `F_k` is not concave, so it is driven by a
//! minorize-maximize loop: introduce per-user rate slacks `q` (the surplus
//! user's enters squared) and SNR slacks `u`, replace the bilinear objective
//! by its tangent minorant in `q_k` around the expansion point, and replace
//! each SNR constraint `S_n(y1,z1) <= 1/u_n` by the tangent of `1/u` at the
//! expansion `u_n^t`:
//!
//! ```text
//! maximize  B (q_k^t)^2 + 2 B q_k^t (q_k - q_k^t) - sum_{n != k} (R_n / q_n) q_k^2
//! subject to  sum_{n != k} R_n / q_n <= B
//!             q_n <= log2(1 + u_n)          (n != k)
//!             q_k^2 <= log2(1 + u_k)
//!             S_n(y1, z1) <= 1/u_n^t - (u_n - u_n^t) / (u_n^t)^2
//!             q >= 0,  u >= 0,  (y1, z1) in the port rectangle
//! ```
//!
//! The surrogate is concave, every constraint is convex, and because the
//! tangent of `1/u` lies below `1/u`, any point feasible for the linearized
//! constraint is feasible for the exact one. Expanding at tight slacks makes
//! the surrogate touch the true objective, which gives monotone ascent of
//! `F_k` across outer iterations.
//!
//! The subproblem has `2 + 2N` variables but collapses: at its optimum every
//! slack sits at the largest value its constraints allow, all of which are
//! closed forms in `(y1, z1)`. [`PortAProblem::reduced_surrogate`] performs
//! that partial maximization, leaving a concave 2-D problem over the box
//! that [`PortAProblem::solve_subproblem`] solves with projected gradient
//! ascent, backtracking line search, and a projected-gradient-norm
//! stationarity certificate. Candidate points whose linearized SNR caps
//! turn negative, or whose pinned-rate demand exceeds the budget, are
//! infeasible for the subproblem and are rejected by the line search, so
//! every accepted iterate is feasible for the full `2 + 2N`-variable
//! program.
//!
//! [`PortAProblem::equal_split`] reuses the same machinery for the
//! equal-bandwidth baseline, whose location objective `sum_n (B/N) c_n` is
//! linear in the rate slacks (no squared term and no budget row).

use crate::error::{Error, Result};
use crate::model::{self, PortPlacement, Scenario};
use crate::port_b::clip;
use rayon::prelude::*;

// --------------------------------------------------------------------------
// Tunables. Every tolerance the algorithm depends on is pinned here.
// --------------------------------------------------------------------------

/// Outer iteration cap for the minorize-maximize loop.
pub const SCA_MAX_OUTER_ITERS: usize = 50;

/// Outer convergence: |F_{t+1} - F_t| <= tol * (1 + |F_{t+1}|).
pub const SCA_CONVERGENCE_REL: f64 = 1e-6;

/// Stationarity certificate for the inner solver: norm of the box-projected
/// gradient of the bandwidth-normalized surrogate.
pub const SUBPROBLEM_PG_TOL: f64 = 1e-6;

/// Inner iteration cap; exceeding it is an error carrying diagnostics.
pub const SUBPROBLEM_MAX_ITERS: usize = 20_000;

/// Line-search step floor. Exhausting it means no further feasible ascent
/// exists along the current gradient (a constraint boundary or fp noise).
const STEP_FLOOR: f64 = 1e-14;

/// Armijo sufficient-ascent fraction for the backtracking line search.
const ARMIJO_C: f64 = 1e-4;

/// Relative slack used when comparing the pinned-rate demand to the budget,
/// so a tight-but-feasible expansion point is not rejected by rounding.
const BUDGET_SLACK: f64 = 1e-12;

// --------------------------------------------------------------------------
// State and trace types
// --------------------------------------------------------------------------

/// One SCA iterate: placement, slack vectors, surrogate and true objectives.
///
/// For iterate 0 the slacks are the tight values at the start point and the
/// surrogate equals the true objective. For later iterates the slacks are
/// the subproblem's optimizers and `surrogate_value` is the subproblem
/// optimum that certified the move; it never exceeds `true_objective` by
/// more than rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaState {
    pub iterate: usize,
    pub y1: f64,
    pub z1: f64,
    /// Rate slacks, one per user. The surplus user's slack enters squared.
    pub q: Vec<f64>,
    /// SNR slacks, one per user.
    pub u: Vec<f64>,
    pub surrogate_value: f64,
    pub true_objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Successive true objectives agreed to [`SCA_CONVERGENCE_REL`].
    Converged,
    /// [`SCA_MAX_OUTER_ITERS`] exhausted first.
    MaxIterations,
    /// The start point's pinned-rate demand already exceeds the budget; no
    /// slack assignment is feasible there.
    InfeasibleStart,
}

/// The full iterate history of one SCA run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaTrace {
    pub states: Vec<ScaState>,
    pub termination: Termination,
}

impl ScaTrace {
    /// True objective of the last iterate.
    pub fn final_objective(&self) -> f64 {
        self.states.last().map(|s| s.true_objective).unwrap_or(f64::NEG_INFINITY)
    }

    /// Number of subproblem solves this trace records.
    pub fn outer_iterations(&self) -> usize {
        self.states.len().saturating_sub(1)
    }
}

/// Outcome of one start of the multi-start driver.
#[derive(Debug, Clone)]
pub struct StartRun {
    pub init: (f64, f64),
    pub placement: PortPlacement,
    pub trace: ScaTrace,
}

/// All starts of a multi-start run, plus the index of the winner.
#[derive(Debug, Clone)]
pub struct MultiStartOutcome {
    pub runs: Vec<StartRun>,
    /// Winner by final true objective among starts that were not infeasible
    /// at their start point; ties go to the earliest start. `None` when every
    /// start was infeasible.
    pub best: Option<usize>,
    pub failed_starts: usize,
}

impl MultiStartOutcome {
    pub fn best_run(&self) -> Option<&StartRun> {
        self.best.map(|i| &self.runs[i])
    }

    pub fn total_outer_iterations(&self) -> usize {
        self.runs.iter().map(|r| r.trace.outer_iterations()).sum()
    }
}

// --------------------------------------------------------------------------
// Problem definition
// --------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum LocationObjective {
    /// Maximize the surplus user's rate on top of everyone else's floors.
    BestUser { k: usize },
    /// Maximize the sum rate under a frozen equal bandwidth split.
    EqualSplit,
}

/// Port-A location problem at a fixed port B.
#[derive(Debug, Clone)]
pub struct PortAProblem<'a> {
    scenario: &'a Scenario,
    objective: LocationObjective,
    y2: f64,
    z2: f64,
    /// Station-leg distance; depends only on port B.
    d3: f64,
}

/// Per-user quantities at one candidate point.
struct UserEval {
    length: f64,
    snr: f64,
    /// `d length / d y1` and `d length / d z1`.
    dl: (f64, f64),
}

impl<'a> PortAProblem<'a> {
    /// Problem for surplus-user hypothesis `k`.
    pub fn best_user(scenario: &'a Scenario, k: usize, y2: f64, z2: f64) -> Result<Self> {
        if k >= scenario.n_users() {
            return Err(Error::DomainViolation(format!(
                "surplus user {k} out of range for {} users",
                scenario.n_users()
            )));
        }
        Ok(Self::build(scenario, LocationObjective::BestUser { k }, y2, z2))
    }

    /// Problem for the equal-bandwidth-split location objective.
    pub fn equal_split(scenario: &'a Scenario, y2: f64, z2: f64) -> Self {
        Self::build(scenario, LocationObjective::EqualSplit, y2, z2)
    }

    fn build(scenario: &'a Scenario, objective: LocationObjective, y2: f64, z2: f64) -> Self {
        let d3 = model::dist_port_b_to_bs(scenario.wall_width, scenario.bs_position, y2, z2);
        PortAProblem { scenario, objective, y2, z2, d3 }
    }

    pub fn port_b(&self) -> (f64, f64) {
        (self.y2, self.z2)
    }

    fn n(&self) -> usize {
        self.scenario.n_users()
    }

    fn surplus_user(&self) -> Option<usize> {
        match self.objective {
            LocationObjective::BestUser { k } => Some(k),
            LocationObjective::EqualSplit => None,
        }
    }

    fn eval_user(&self, n: usize, y1: f64, z1: f64) -> UserEval {
        let s = self.scenario;
        let user = &s.users[n];
        let d1 = model::dist_user_to_port_a(user, y1, z1);
        let d2 = model::dist_port_a_to_port_b(s.wall_width, y1, z1, self.y2, self.z2);
        let length = d1 + d2 / s.medium_factor + self.d3;
        let gain = model::gain_from_effective_length(s.ref_gain, s.path_loss_exp, length);
        let snr = model::snr_from_gain(s, n, gain);

        // d2 >= wall_width > 0 always; d1 = 0 only when the user sits exactly
        // on port A, where the distance term's subgradient 0 is used.
        let (mut dy, mut dz) = (0.0, 0.0);
        if d1 > 1e-12 {
            dy += (y1 - user.y) / d1;
            dz += z1 / d1;
        }
        dy += (y1 - self.y2) / (s.medium_factor * d2);
        dz += (z1 - self.z2) / (s.medium_factor * d2);
        UserEval { length, snr, dl: (dy, dz) }
    }

    fn snr_at(&self, n: usize, y1: f64, z1: f64) -> f64 {
        self.eval_user(n, y1, z1).snr
    }

    fn efficiency_at(&self, n: usize, y1: f64, z1: f64) -> f64 {
        model::spectral_efficiency_from_snr(self.snr_at(n, y1, z1))
    }

    // ----------------------------------------------------------------------
    // Exact objective and slack expansion
    // ----------------------------------------------------------------------

    /// The non-approximated location objective at `(y1, z1)`.
    ///
    /// Negative values mean the pinned users' floors exceed the budget there.
    pub fn true_objective(&self, y1: f64, z1: f64) -> f64 {
        let b = self.scenario.total_bandwidth;
        match self.objective {
            LocationObjective::BestUser { k } => {
                let mut demand = 0.0;
                for n in 0..self.n() {
                    if n != k {
                        demand += self.scenario.users[n].min_rate / self.efficiency_at(n, y1, z1);
                    }
                }
                (b - demand) * self.efficiency_at(k, y1, z1)
            }
            LocationObjective::EqualSplit => {
                let share = b / self.n() as f64;
                (0..self.n()).map(|n| share * self.efficiency_at(n, y1, z1)).sum()
            }
        }
    }

    /// Bandwidth the pinned users demand at `(y1, z1)`. Exceeding the budget
    /// makes the point an infeasible SCA start. Zero for the equal split.
    pub fn pinned_demand(&self, y1: f64, z1: f64) -> f64 {
        match self.objective {
            LocationObjective::BestUser { k } => (0..self.n())
                .filter(|&n| n != k)
                .map(|n| self.scenario.users[n].min_rate / self.efficiency_at(n, y1, z1))
                .sum(),
            LocationObjective::EqualSplit => 0.0,
        }
    }

    /// State with slacks tight at `(y1, z1)`: `u = SNR` exactly and `q` at
    /// the rate values those SNRs permit. Tight slacks make every
    /// linearization touch, so the surrogate equals the true objective here.
    pub fn tight_state(&self, iterate: usize, y1: f64, z1: f64) -> ScaState {
        let n = self.n();
        let u: Vec<f64> = (0..n).map(|i| self.snr_at(i, y1, z1)).collect();
        let c: Vec<f64> =
            u.iter().map(|&snr| model::spectral_efficiency_from_snr(snr)).collect();
        let q: Vec<f64> = match self.objective {
            LocationObjective::BestUser { k } => (0..n)
                .map(|i| if i == k { c[i].sqrt() } else { c[i] })
                .collect(),
            LocationObjective::EqualSplit => c.clone(),
        };
        let mut st = ScaState {
            iterate,
            y1,
            z1,
            q,
            u,
            surrogate_value: 0.0,
            true_objective: self.true_objective(y1, z1),
        };
        st.surrogate_value =
            self.surrogate_objective(&st, &st.q.clone()).expect("tight slacks are positive");
        st
    }

    // ----------------------------------------------------------------------
    // Surrogate pieces
    // ----------------------------------------------------------------------

    /// The concave surrogate objective at rate slacks `q`, expanded around
    /// `state`. For the equal split this is the exact (linear) objective.
    pub fn surrogate_objective(&self, state: &ScaState, q: &[f64]) -> Result<f64> {
        if q.len() != self.n() || state.q.len() != self.n() {
            return Err(Error::DomainViolation("slack vector length mismatch".into()));
        }
        let b = self.scenario.total_bandwidth;
        match self.objective {
            LocationObjective::BestUser { k } => {
                let qk_t = state.q[k];
                if qk_t <= 0.0 || qk_t.is_nan() {
                    return Err(Error::InvalidExpansionPoint(format!(
                        "expansion slack q[{k}] = {qk_t} must be positive"
                    )));
                }
                let mut demand_term = 0.0;
                for n in 0..self.n() {
                    if n == k {
                        continue;
                    }
                    if q[n] <= 0.0 || q[n].is_nan() {
                        return Err(Error::DomainViolation(format!(
                            "rate slack q[{n}] = {} must be positive",
                            q[n]
                        )));
                    }
                    demand_term += self.scenario.users[n].min_rate / q[n];
                }
                Ok(b * qk_t * qk_t + 2.0 * b * qk_t * (q[k] - qk_t) - demand_term * q[k] * q[k])
            }
            LocationObjective::EqualSplit => {
                let share = b / self.n() as f64;
                Ok(q.iter().map(|qn| share * qn).sum())
            }
        }
    }

    /// Residual of the linearized SNR constraint for user `n` at a candidate
    /// point and SNR slack `u_n`: nonpositive means satisfied. The
    /// linearization is the tangent of `1/u` at `state.u[n]`, which lies
    /// below `1/u`, so a nonpositive residual implies the exact constraint
    /// `u_n <= SNR_n(y1, z1)`.
    pub fn linearized_snr_constraint(
        &self,
        state: &ScaState,
        n: usize,
        y1: f64,
        z1: f64,
        u_n: f64,
    ) -> Result<f64> {
        if n >= self.n() {
            return Err(Error::DomainViolation(format!("user {n} out of range")));
        }
        let u_t = state.u[n];
        if !(u_t > 0.0 && u_t.is_finite()) {
            return Err(Error::InvalidExpansionPoint(format!(
                "expansion SNR slack u[{n}] = {u_t} must be positive"
            )));
        }
        let s_n = 1.0 / self.snr_at(n, y1, z1);
        Ok(s_n - (1.0 / u_t - (u_n - u_t) / (u_t * u_t)))
    }

    /// Largest SNR slack the linearized constraint allows for user `n` at a
    /// candidate point. Negative means the point is infeasible for the
    /// subproblem (no `u_n >= 0` satisfies the linearization).
    fn linearized_snr_cap(&self, u_t: f64, s_n: f64) -> f64 {
        u_t * (2.0 - u_t * s_n)
    }

    // ----------------------------------------------------------------------
    // Reduced (partially maximized) surrogate over (y1, z1)
    // ----------------------------------------------------------------------

    /// Subproblem objective after maximizing out every slack at a candidate
    /// `(y1, z1)`, expanded around `state`. `None` means the point is
    /// infeasible for the linearized constraints.
    ///
    /// Slack elimination: each `u_n` sits at its linearized cap (larger only
    /// loosens the rate-slack constraints), each pinned `q_n` at
    /// `log2(1 + u_n)` (the objective and the budget row both prefer it
    /// large), and `q_k` at the unconstrained maximizer of the concave
    /// quadratic, clamped to its cap. On the feasible region this partial
    /// maximum is a concave function of `(y1, z1)`.
    pub fn reduced_surrogate(&self, state: &ScaState, y1: f64, z1: f64) -> Option<f64> {
        self.reduced_eval(state, y1, z1).map(|r| r.value)
    }

    fn reduced_eval(&self, state: &ScaState, y1: f64, z1: f64) -> Option<ReducedPoint> {
        let n = self.n();
        let b = self.scenario.total_bandwidth;
        let mut u_hat = Vec::with_capacity(n);
        let mut q_hat = Vec::with_capacity(n);
        for i in 0..n {
            let s_i = 1.0 / self.snr_at(i, y1, z1);
            let cap = self.linearized_snr_cap(state.u[i], s_i);
            if cap <= 0.0 {
                return None;
            }
            u_hat.push(cap);
            q_hat.push(model::spectral_efficiency_from_snr(cap));
        }
        match self.objective {
            LocationObjective::BestUser { k } => {
                let mut demand = 0.0;
                for i in 0..n {
                    if i != k {
                        demand += self.scenario.users[i].min_rate / q_hat[i];
                    }
                }
                if demand > b * (1.0 + BUDGET_SLACK) {
                    return None;
                }
                let qk_t = state.q[k];
                let cap_k = q_hat[k].sqrt();
                let (q_k, cap_active) = if demand > 0.0 {
                    let interior = b * qk_t / demand;
                    if interior >= cap_k {
                        (cap_k, true)
                    } else {
                        (interior, false)
                    }
                } else {
                    (cap_k, true)
                };
                let value =
                    b * qk_t * qk_t + 2.0 * b * qk_t * (q_k - qk_t) - demand * q_k * q_k;
                let mut q = q_hat;
                q[k] = q_k;
                Some(ReducedPoint { value, q, u: u_hat, demand, cap_active })
            }
            LocationObjective::EqualSplit => {
                let share = b / n as f64;
                let value = q_hat.iter().map(|qh| share * qh).sum();
                Some(ReducedPoint { value, q: q_hat, u: u_hat, demand: 0.0, cap_active: true })
            }
        }
    }

    /// Gradient of the bandwidth-normalized reduced surrogate. Must only be
    /// called at points where [`reduced_eval`](Self::reduced_eval) is `Some`.
    fn reduced_gradient(&self, state: &ScaState, y1: f64, z1: f64) -> Option<(f64, f64)> {
        let n = self.n();
        let b = self.scenario.total_bandwidth;
        let point = self.reduced_eval(state, y1, z1)?;

        // Per-user chain: dS = alpha * S / L * dL, d(u_cap) = -u_t^2 * dS,
        // d(q_cap) = d(u_cap) / ((1 + u_cap) ln 2).
        let alpha = self.scenario.path_loss_exp;
        let mut dq = Vec::with_capacity(n);
        for i in 0..n {
            let ev = self.eval_user(i, y1, z1);
            let s_i = 1.0 / ev.snr;
            let factor = alpha * s_i / ev.length;
            let ds = (factor * ev.dl.0, factor * ev.dl.1);
            let u_t = state.u[i];
            let du = (-u_t * u_t * ds.0, -u_t * u_t * ds.1);
            let denom = (1.0 + point.u[i]) * std::f64::consts::LN_2;
            dq.push((du.0 / denom, du.1 / denom));
        }

        match self.objective {
            LocationObjective::BestUser { k } => {
                let mut d_demand = (0.0, 0.0);
                for i in 0..n {
                    if i == k {
                        continue;
                    }
                    let r = self.scenario.users[i].min_rate;
                    // q[i] here is the cap value for pinned users.
                    let coef = -r / (point.q[i] * point.q[i]);
                    d_demand.0 += coef * dq[i].0;
                    d_demand.1 += coef * dq[i].1;
                }
                let q_k = point.q[k];
                let qk_t = state.q[k];
                let mut g = (-q_k * q_k * d_demand.0, -q_k * q_k * d_demand.1);
                if point.cap_active {
                    let cap_k = q_k; // cap-active means q_k sits at sqrt(q_hat_k)
                    if cap_k > 1e-300 {
                        let lambda = 2.0 * b * qk_t - 2.0 * point.demand * cap_k;
                        let dcap = (dq[k].0 / (2.0 * cap_k), dq[k].1 / (2.0 * cap_k));
                        g.0 += lambda * dcap.0;
                        g.1 += lambda * dcap.1;
                    }
                }
                Some((g.0 / b, g.1 / b))
            }
            LocationObjective::EqualSplit => {
                let inv_n = 1.0 / n as f64;
                let gx = dq.iter().map(|d| d.0).sum::<f64>() * inv_n;
                let gy = dq.iter().map(|d| d.1).sum::<f64>() * inv_n;
                Some((gx, gy))
            }
        }
    }

    // ----------------------------------------------------------------------
    // Inner solver
    // ----------------------------------------------------------------------

    /// Solves the convex subproblem expanded around `state` and returns the
    /// optimizing iterate. The returned state is feasible for every
    /// subproblem constraint and its surrogate value never exceeds the true
    /// objective at the new point by more than rounding.
    pub fn solve_subproblem(&self, state: &ScaState) -> Result<ScaState> {
        let n = self.n();
        if state.q.len() != n || state.u.len() != n {
            return Err(Error::InvalidExpansionPoint("slack vector length mismatch".into()));
        }
        for i in 0..n {
            if !(state.u[i] > 0.0 && state.u[i].is_finite()) {
                return Err(Error::InvalidExpansionPoint(format!(
                    "SNR slack u[{i}] = {} must be positive",
                    state.u[i]
                )));
            }
        }
        if let Some(k) = self.surplus_user() {
            if state.q[k] <= 0.0 || state.q[k].is_nan() {
                return Err(Error::InvalidExpansionPoint(format!(
                    "rate slack q[{k}] = {} must be positive",
                    state.q[k]
                )));
            }
        }

        let [ylo, yhi] = self.scenario.y_bounds;
        let [zlo, zhi] = self.scenario.z_bounds;
        let proj = |y: f64, z: f64| (y.clamp(ylo, yhi), z.clamp(zlo, zhi));

        let (mut y, mut z) = proj(state.y1, state.z1);
        let mut f = self
            .reduced_surrogate(state, y, z)
            .ok_or_else(|| {
                Error::InvalidExpansionPoint(
                    "expansion point is infeasible for the linearized subproblem".into(),
                )
            })?
            / self.scenario.total_bandwidth;

        let mut step = 1.0;
        let mut last_pg_norm = f64::INFINITY;
        let mut certified = false;
        for _iter in 0..SUBPROBLEM_MAX_ITERS {
            let Some((gx, gy)) = self.reduced_gradient(state, y, z) else {
                break; // current point became numerically infeasible; keep it
            };
            let (py, pz) = proj(y + gx, z + gy);
            let pg = ((py - y).powi(2) + (pz - z).powi(2)).sqrt();
            last_pg_norm = pg;
            if pg <= SUBPROBLEM_PG_TOL {
                certified = true;
                break;
            }

            let mut accepted = false;
            while step >= STEP_FLOOR {
                let (cy, cz) = proj(y + step * gx, z + step * gy);
                let ascent = gx * (cy - y) + gy * (cz - z);
                if let Some(fc) = self
                    .reduced_surrogate(state, cy, cz)
                    .map(|v| v / self.scenario.total_bandwidth)
                {
                    if fc >= f + ARMIJO_C * ascent {
                        y = cy;
                        z = cz;
                        f = fc;
                        accepted = true;
                        step = (step * 1.5).min(64.0);
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                // No feasible ascent along the gradient above the step
                // floor: a nonlinear-constraint boundary or fp noise. The
                // current point is feasible and at least as good as the
                // expansion point, so return it.
                break;
            }
        }
        if !certified && last_pg_norm > 1e-2 {
            return Err(Error::SubproblemIterationLimit {
                max_iters: SUBPROBLEM_MAX_ITERS,
                pg_norm: last_pg_norm,
            });
        }

        let point = self
            .reduced_eval(state, y, z)
            .expect("accepted iterates stay feasible");
        Ok(ScaState {
            iterate: state.iterate + 1,
            y1: y,
            z1: z,
            q: point.q,
            u: point.u,
            surrogate_value: point.value,
            true_objective: self.true_objective(y, z),
        })
    }

    // ----------------------------------------------------------------------
    // Outer loop
    // ----------------------------------------------------------------------

    /// Runs the full SCA loop from one start point (clamped into the box).
    pub fn optimize(&self, init: (f64, f64)) -> Result<(PortPlacement, ScaTrace)> {
        let [ylo, yhi] = self.scenario.y_bounds;
        let [zlo, zhi] = self.scenario.z_bounds;
        let y0 = clip(init.0, ylo, yhi).expect("validated bounds");
        let z0 = clip(init.1, zlo, zhi).expect("validated bounds");

        let start = self.tight_state(0, y0, z0);
        let placement_at = |st: &ScaState| PortPlacement::new(st.y1, st.z1, self.y2, self.z2);

        if self.pinned_demand(y0, z0) > self.scenario.total_bandwidth {
            let placement = placement_at(&start);
            return Ok((
                placement,
                ScaTrace { states: vec![start], termination: Termination::InfeasibleStart },
            ));
        }

        let mut states = vec![start];
        let mut termination = Termination::MaxIterations;
        let mut expansion = states[0].clone();
        for t in 1..=SCA_MAX_OUTER_ITERS {
            let solved = self.solve_subproblem(&expansion)?;
            let f_prev = states.last().unwrap().true_objective;
            let f_new = solved.true_objective;
            if f_new < f_prev - 1e-12 * (1.0 + f_prev.abs()) {
                // Rounding pushed the step marginally downhill; stop at the
                // previous (better) iterate.
                termination = Termination::Converged;
                break;
            }
            states.push(solved);
            if (f_new - f_prev).abs() <= SCA_CONVERGENCE_REL * (1.0 + f_new.abs()) {
                termination = Termination::Converged;
                break;
            }
            let last = states.last().unwrap();
            expansion = self.tight_state(t, last.y1, last.z1);
        }

        let last = states.last().unwrap();
        let placement = placement_at(last);
        Ok((placement, ScaTrace { states, termination }))
    }

    /// Runs [`optimize`](Self::optimize) from every default start in
    /// parallel and picks the best final objective.
    pub fn multi_start(&self) -> Result<MultiStartOutcome> {
        let starts = default_starts(self.scenario);
        let results: Vec<Result<StartRun>> = starts
            .par_iter()
            .map(|&init| {
                self.optimize(init).map(|(placement, trace)| StartRun { init, placement, trace })
            })
            .collect();

        let mut runs = Vec::with_capacity(results.len());
        let mut failed = 0;
        let mut first_err = None;
        for r in results {
            match r {
                Ok(run) => runs.push(run),
                Err(e) => {
                    failed += 1;
                    first_err.get_or_insert(e);
                }
            }
        }
        if runs.is_empty() {
            if let Some(e) = first_err {
                return Err(e);
            }
            return Err(Error::NoUsers);
        }

        let mut best: Option<usize> = None;
        for (i, run) in runs.iter().enumerate() {
            if run.trace.termination == Termination::InfeasibleStart {
                continue;
            }
            let better = match best {
                None => true,
                Some(j) => run.trace.final_objective() > runs[j].trace.final_objective(),
            };
            if better {
                best = Some(i);
            }
        }
        Ok(MultiStartOutcome { runs, best, failed_starts: failed })
    }
}

struct ReducedPoint {
    value: f64,
    q: Vec<f64>,
    u: Vec<f64>,
    demand: f64,
    cap_active: bool,
}

/// Start points for the multi-start driver: a 3x3 lattice over the port
/// rectangle plus the projection of each user's `(y, 0)` onto it.
pub fn default_starts(s: &Scenario) -> Vec<(f64, f64)> {
    let [ylo, yhi] = s.y_bounds;
    let [zlo, zhi] = s.z_bounds;
    let mut starts = Vec::with_capacity(9 + s.n_users());
    for i in 0..3 {
        for j in 0..3 {
            starts.push((
                ylo + 0.5 * (yhi - ylo) * i as f64,
                zlo + 0.5 * (zhi - zlo) * j as f64,
            ));
        }
    }
    for u in &s.users {
        starts.push((u.y.clamp(ylo, yhi), 0.0f64.clamp(zlo, zhi)));
    }
    starts
}

/// Convenience wrapper: true location objective for hypothesis `k` at a full
/// placement.
pub fn true_objective(s: &Scenario, k: usize, p: &PortPlacement) -> Result<f64> {
    Ok(PortAProblem::best_user(s, k, p.y2, p.z2)?.true_objective(p.y1, p.z1))
}

// --------------------------------------------------------------------------
// Curvature check for the slack-quotient term
// --------------------------------------------------------------------------

/// Eigenvalues of the Hessian of `(q_k, q_n) -> q_k^2 / q_n`, which is
/// `(2 / q_n^3) * [q_n, -q_k]^T [q_n, -q_k]`: a rank-one matrix with
/// eigenvalues `{0, trace}`. Requires `q_n > 0`.
///
/// The zero eigenvalue comes from the factorization and is exact; a generic
/// symmetric 2x2 formula would lose it to cancellation once the trace grows
/// past `1 / epsilon` times the tolerance of interest.
pub fn hessian_eigenvalues(q_k: f64, q_n: f64) -> Result<(f64, f64)> {
    if !(q_n > 0.0 && q_n.is_finite() && q_k.is_finite()) {
        return Err(Error::DomainViolation(format!(
            "hessian of q_k^2/q_n needs finite q_k and q_n > 0, got ({q_k}, {q_n})"
        )));
    }
    let scale = 2.0 / (q_n * q_n * q_n);
    Ok((0.0, scale * (q_n * q_n + q_k * q_k)))
}

/// True when both Hessian eigenvalues clear `-1e-12`, certifying convexity
/// of the slack quotient at this point.
pub fn hessian_psd_check(q_k: f64, q_n: f64) -> Result<bool> {
    let (lo, hi) = hessian_eigenvalues(q_k, q_n)?;
    Ok(lo >= -1e-12 && hi >= -1e-12)
}

// --------------------------------------------------------------------------
// Tests
// --------------------------------------------------------------------------
