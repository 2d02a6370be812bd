//! A small dense two-phase simplex solver.
//!
//! This exists as an *independent verification route* for the closed-form
//! bandwidth allocator: it knows nothing about users, gains, or rate floors,
//! it just maximizes a linear objective over `{x >= 0 : A x (<=|>=|=) b}`
//! with a textbook tableau. Problem sizes here are tiny (tens of variables),
//! so clarity wins over sparsity tricks. Bland's rule keeps it cycle-free
//! and deterministic.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Le,
    Ge,
    Eq,
}

/// One constraint row: `coeffs . x  (rel)  rhs`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: RelOp,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
}

const EPS: f64 = 1e-9;

/// Maximizes `objective . x` over `x >= 0` subject to the constraints.
///
/// Returns `LpOutcome::Infeasible` when no point satisfies the constraints,
/// and an error for unbounded or numerically degenerate programs.
pub fn maximize(objective: &[f64], constraints: &[Constraint]) -> Result<LpOutcome> {
    let n = objective.len();
    for (i, c) in constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(Error::LinearProgram(format!(
                "constraint {i} has {} coefficients, expected {n}",
                c.coeffs.len()
            )));
        }
        if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearProgram(format!("constraint {i} has non-finite entries")));
        }
    }
    if objective.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearProgram("objective has non-finite entries".into()));
    }

    let m = constraints.len();

    // Normalize every row to nonnegative rhs, then count the extra columns:
    // a slack for <=, a surplus for >=, an artificial for >= and =.
    let mut rows: Vec<(Vec<f64>, RelOp, f64)> = constraints
        .iter()
        .map(|c| {
            if c.rhs < 0.0 {
                let flipped = match c.rel {
                    RelOp::Le => RelOp::Ge,
                    RelOp::Ge => RelOp::Le,
                    RelOp::Eq => RelOp::Eq,
                };
                (c.coeffs.iter().map(|v| -v).collect(), flipped, -c.rhs)
            } else {
                (c.coeffs.clone(), c.rel, c.rhs)
            }
        })
        .collect();

    let n_slack = rows.iter().filter(|r| r.1 != RelOp::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != RelOp::Le).count();
    let total = n + n_slack + n_art;

    // Tableau: one row per constraint, columns [x | slack/surplus | artificial | rhs].
    let mut t = vec![vec![0.0; total + 1]; m];
    let mut basis = vec![usize::MAX; m];
    let mut si = n; // next slack column
    let mut ai = n + n_slack; // next artificial column
    for (r, (coeffs, rel, rhs)) in rows.drain(..).enumerate() {
        t[r][..n].copy_from_slice(&coeffs);
        t[r][total] = rhs;
        match rel {
            RelOp::Le => {
                t[r][si] = 1.0;
                basis[r] = si;
                si += 1;
            }
            RelOp::Ge => {
                t[r][si] = -1.0;
                si += 1;
                t[r][ai] = 1.0;
                basis[r] = ai;
                ai += 1;
            }
            RelOp::Eq => {
                t[r][ai] = 1.0;
                basis[r] = ai;
                ai += 1;
            }
        }
    }

    let scale = 1.0
        + constraints
            .iter()
            .flat_map(|c| c.coeffs.iter().chain(std::iter::once(&c.rhs)))
            .fold(0.0f64, |a, v| a.max(v.abs()));

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        let mut cost = vec![0.0; total];
        for col in (n + n_slack)..total {
            cost[col] = -1.0;
        }
        let value = run_simplex(&mut t, &mut basis, &cost, total)?;
        if value < -EPS * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // Pivot any artificial still in the basis out onto a real column.
        for r in 0..m {
            if basis[r] >= n + n_slack {
                if let Some(col) = (0..n + n_slack).find(|&c| t[r][c].abs() > EPS) {
                    pivot(&mut t, &mut basis, r, col);
                } // else the row is all-zero: redundant, leave it.
            }
        }
        // Freeze artificial columns so phase 2 cannot re-enter them.
        for row in t.iter_mut() {
            for col in (n + n_slack)..total {
                row[col] = 0.0;
            }
        }
    }

    // Phase 2: maximize the real objective.
    let mut cost = vec![0.0; total];
    cost[..n].copy_from_slice(objective);
    run_simplex(&mut t, &mut basis, &cost, total)?;

    let mut x = vec![0.0; n];
    for (r, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = t[r][total];
        }
    }
    let objective_value = x.iter().zip(objective).map(|(xi, ci)| xi * ci).sum();
    Ok(LpOutcome::Optimal { x, objective: objective_value })
}

/// Runs the simplex iterations on a tableau that already has an identity
/// basis, maximizing `cost`. Returns the objective value of the basic
/// solution. Bland's rule: smallest eligible column, then smallest row.
fn run_simplex(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], total: usize) -> Result<f64> {
    let m = t.len();
    let rhs_col = total;
    let max_iters = 50 * (total + m + 1);

    for _ in 0..max_iters {
        // Reduced costs: cost[j] - cost_B . column_j.
        let mut entering = None;
        for j in 0..total {
            let mut red = cost[j];
            for r in 0..m {
                let cb = if basis[r] < total { cost[basis[r]] } else { 0.0 };
                red -= cb * t[r][j];
            }
            if red > EPS {
                entering = Some(j);
                break; // Bland: first improving column.
            }
        }
        let Some(j) = entering else {
            let mut v = 0.0;
            for r in 0..m {
                let cb = if basis[r] < total { cost[basis[r]] } else { 0.0 };
                v += cb * t[r][rhs_col];
            }
            return Ok(v);
        };

        // Ratio test.
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            if t[r][j] > EPS {
                let ratio = t[r][rhs_col] / t[r][j];
                match leave {
                    None => leave = Some((r, ratio)),
                    Some((br, bratio)) => {
                        if ratio < bratio - EPS || (ratio < bratio + EPS && basis[r] < basis[br]) {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((r, _)) = leave else {
            return Err(Error::LinearProgram("objective is unbounded".into()));
        };
        pivot(t, basis, r, j);
    }
    Err(Error::LinearProgram("iteration limit reached (degenerate input?)".into()))
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let piv = t[row][col];
    for v in t[row].iter_mut() {
        *v /= piv;
    }
    for r in 0..t.len() {
        if r != row && t[r][col].abs() > 0.0 {
            let factor = t[r][col];
            let (pr, cur) = if r < row {
                let (a, b) = t.split_at_mut(row);
                (&b[0], &mut a[r])
            } else {
                let (a, b) = t.split_at_mut(r);
                (&a[row], &mut b[0])
            };
            for (cv, pv) in cur.iter_mut().zip(pr.iter()) {
                *cv -= factor * pv;
            }
        }
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn le(coeffs: &[f64], rhs: f64) -> Constraint {
        Constraint { coeffs: coeffs.to_vec(), rel: RelOp::Le, rhs }
    }
    fn ge(coeffs: &[f64], rhs: f64) -> Constraint {
        Constraint { coeffs: coeffs.to_vec(), rel: RelOp::Ge, rhs }
    }

    #[test]
    fn solves_a_textbook_two_variable_program() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
        let out = maximize(
            &[3.0, 5.0],
            &[le(&[1.0, 0.0], 4.0), le(&[0.0, 2.0], 12.0), le(&[3.0, 2.0], 18.0)],
        )
        .unwrap();
        match out {
            LpOutcome::Optimal { x, objective } => {
                assert!((x[0] - 2.0).abs() < 1e-9);
                assert!((x[1] - 6.0).abs() < 1e-9);
                assert!((objective - 36.0).abs() < 1e-9);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn handles_ge_rows_via_phase_one() {
        // max x + y s.t. x + y <= 10, x >= 3, y >= 2 -> objective 10.
        let out = maximize(
            &[1.0, 1.0],
            &[le(&[1.0, 1.0], 10.0), ge(&[1.0, 0.0], 3.0), ge(&[0.0, 1.0], 2.0)],
        )
        .unwrap();
        match out {
            LpOutcome::Optimal { objective, .. } => assert!((objective - 10.0).abs() < 1e-9),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        let out = maximize(&[1.0], &[le(&[1.0], 1.0), ge(&[1.0], 2.0)]).unwrap();
        assert_eq!(out, LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unboundedness() {
        let err = maximize(&[1.0, 0.0], &[ge(&[1.0, 1.0], 1.0)]).unwrap_err();
        assert!(err.to_string().contains("unbounded"), "got: {err}");
    }

    #[test]
    fn equality_rows_are_respected() {
        // max x + 2y s.t. x + y = 4, y <= 3 -> (1, 3), 7.
        let out = maximize(
            &[1.0, 2.0],
            &[
                Constraint { coeffs: vec![1.0, 1.0], rel: RelOp::Eq, rhs: 4.0 },
                le(&[0.0, 1.0], 3.0),
            ],
        )
        .unwrap();
        match out {
            LpOutcome::Optimal { x, objective } => {
                assert!((x[0] - 1.0).abs() < 1e-9);
                assert!((x[1] - 3.0).abs() < 1e-9);
                assert!((objective - 7.0).abs() < 1e-9);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_rows_are_normalized() {
        // -x <= -2  is  x >= 2; max -x -> x = 2.
        let out = maximize(&[-1.0], &[le(&[-1.0], -2.0)]).unwrap();
        match out {
            LpOutcome::Optimal { x, .. } => assert!((x[0] - 2.0).abs() < 1e-9),
            other => panic!("expected optimal, got {other:?}"),
        }
    }
}
