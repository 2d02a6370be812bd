//! Power sweeps: run every scheme at every transmit power and emit one
//! comma-separated table.
//!
//! The table layout is part of the tool's contract: a fixed header row,
//! floats at 12 significant digits, rows in (power, scheme) order with the
//! scheme order pinned, and configuration captured in leading `#` comments.
//! Nothing machine-specific (paths, timestamps, durations) appears in the
//! output, so identical inputs yield byte-identical tables.

use crate::{dbm_to_watts, CliError, CliResult};
use far_core::model::Scenario;
use far_core::solver::{self, EqualBandwidthLocation, Scheme, SolveReport};
use rayon::prelude::*;

/// Canonical scheme order for parsing, deduplication, and row emission.
pub const SCHEME_ORDER: [Scheme; 4] =
    [Scheme::Proposed, Scheme::FixedLocation, Scheme::EqualBandwidth, Scheme::Oracle];

/// Fixed header row of every sweep table.
pub const TABLE_HEADER: &str =
    "power_w,scheme,sum_rate_bps,feasible,chosen_k,y1_m,z1_m,y2_m,z2_m,iterations";

/// One sweep request: which uniform per-user powers to apply and which
/// schemes to run at each.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub powers_w: Vec<f64>,
    pub schemes: Vec<Scheme>,
    /// Port-A lattice step for the oracle scheme.
    pub oracle_resolution: f64,
    pub equal_location: EqualBandwidthLocation,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            powers_w: default_powers_w(),
            schemes: vec![Scheme::Proposed, Scheme::FixedLocation, Scheme::EqualBandwidth],
            oracle_resolution: 0.1,
            equal_location: EqualBandwidthLocation::Optimized,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> CliResult<()> {
        if self.powers_w.is_empty() {
            return Err(CliError::Validation("power list is empty".to_string()));
        }
        for &p in &self.powers_w {
            if !(p > 0.0 && p.is_finite()) {
                return Err(CliError::Validation(format!(
                    "transmit power must be positive and finite, got {p} W"
                )));
            }
        }
        if self.schemes.is_empty() {
            return Err(CliError::Validation("scheme list is empty".to_string()));
        }
        if !(self.oracle_resolution > 0.0 && self.oracle_resolution.is_finite()) {
            return Err(CliError::Validation(format!(
                "oracle resolution must be positive, got {}",
                self.oracle_resolution
            )));
        }
        Ok(())
    }
}

/// Default sweep grid: -10 dBm to 30 dBm in 5 dB steps.
pub fn default_powers_w() -> Vec<f64> {
    (0..=8).map(|i| dbm_to_watts(-10.0 + 5.0 * i as f64)).collect()
}

/// Parses a power argument: either a comma list (`1e-3,0.01` or
/// `-10dbm,0dbm,10dbm`) or an inclusive range `lo..hi:step` with an
/// optional shared `dbm`/`w` suffix on the step (`-10..30:5dbm`). Bare
/// numbers are watts.
pub fn parse_powers(arg: &str) -> CliResult<Vec<f64>> {
    let arg = arg.trim();
    if arg.is_empty() {
        return Err(CliError::Validation("power list is empty".to_string()));
    }
    if let Some((range, step)) = arg.split_once(':') {
        let (lo, hi) = range.split_once("..").ok_or_else(|| {
            CliError::Validation(format!("power range must look like lo..hi:step, got {arg}"))
        })?;
        let (step, dbm) = strip_unit(step)?;
        let lo = parse_plain(lo)?;
        let hi = parse_plain(hi)?;
        if step <= 0.0 || step.is_nan() {
            return Err(CliError::Validation(format!("power step must be positive, got {step}")));
        }
        if hi < lo {
            return Err(CliError::Validation(format!("power range is empty: {lo}..{hi}")));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        let values = (0..=n).map(|i| lo + i as f64 * step);
        return Ok(if dbm {
            values.map(dbm_to_watts).collect()
        } else {
            values.collect()
        });
    }
    arg.split(',')
        .map(|tok| {
            let (v, dbm) = strip_unit(tok)?;
            Ok(if dbm { dbm_to_watts(v) } else { v })
        })
        .collect()
}

fn strip_unit(tok: &str) -> CliResult<(f64, bool)> {
    let t = tok.trim();
    let lower = t.to_ascii_lowercase();
    if let Some(num) = lower.strip_suffix("dbm") {
        return Ok((parse_plain(num)?, true));
    }
    if let Some(num) = lower.strip_suffix('w') {
        return Ok((parse_plain(num)?, false));
    }
    Ok((parse_plain(t)?, false))
}

fn parse_plain(tok: &str) -> CliResult<f64> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Validation(format!("cannot parse number: {tok:?}")))
}

/// Parses a comma list of scheme labels into canonical order, deduplicated.
pub fn parse_schemes(arg: &str) -> CliResult<Vec<Scheme>> {
    let mut requested = [false; 4];
    for tok in arg.split(',') {
        let tok = tok.trim();
        let idx = SCHEME_ORDER
            .iter()
            .position(|s| s.label() == tok)
            .ok_or_else(|| {
                CliError::Validation(format!(
                    "unknown scheme {tok:?}; expected one of proposed, fixed-location, equal-bandwidth, oracle"
                ))
            })?;
        requested[idx] = true;
    }
    let schemes: Vec<Scheme> = SCHEME_ORDER
        .iter()
        .copied()
        .zip(requested)
        .filter_map(|(s, on)| on.then_some(s))
        .collect();
    if schemes.is_empty() {
        return Err(CliError::Validation("scheme list is empty".to_string()));
    }
    Ok(schemes)
}

fn run_scheme(s: &Scenario, scheme: Scheme, spec: &SweepSpec) -> CliResult<SolveReport> {
    let report = match scheme {
        Scheme::Proposed => solver::solve(s)?,
        Scheme::FixedLocation => solver::fixed_location_baseline(s)?,
        Scheme::EqualBandwidth => {
            solver::equal_bandwidth_baseline_with(s, spec.equal_location)?
        }
        Scheme::Oracle => solver::oracle_report(s, spec.oracle_resolution)?,
    };
    Ok(report)
}

fn fmt_float(v: f64) -> String {
    format!("{v:.11e}")
}

fn table_row(power_w: f64, scheme: Scheme, r: &SolveReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        fmt_float(power_w),
        scheme.label(),
        fmt_float(r.sum_rate),
        r.feasible,
        r.chosen_k + 1,
        fmt_float(r.placement.y1),
        fmt_float(r.placement.z1),
        fmt_float(r.placement.y2),
        fmt_float(r.placement.z2),
        r.outer_iterations_total,
    )
}

/// Runs the full sweep and renders the table. `notes` are the
/// defaults-applied notes from scenario loading; they are echoed into the
/// header comments so the table is self-describing.
pub fn run_sweep(scenario: &Scenario, spec: &SweepSpec, notes: &[String]) -> CliResult<String> {
    spec.validate()?;
    scenario.validate().map_err(CliError::from)?;

    // Cells are independent; parallelize over powers and keep (power,
    // scheme) order by collecting into the preallocated row order.
    let cells: Vec<CliResult<Vec<(Scheme, SolveReport)>>> = spec
        .powers_w
        .par_iter()
        .map(|&p| {
            let mut tuned = scenario.clone();
            for u in tuned.users.iter_mut() {
                u.tx_power = p;
            }
            spec.schemes
                .iter()
                .map(|&scheme| run_scheme(&tuned, scheme, spec).map(|r| (scheme, r)))
                .collect()
        })
        .collect();

    let mut out = String::new();
    out.push_str("# far sweep v1\n");
    out.push_str(&format!(
        "# schemes: {}\n",
        spec.schemes.iter().map(|s| s.label()).collect::<Vec<_>>().join(",")
    ));
    out.push_str(&format!(
        "# powers_w: {}\n",
        spec.powers_w.iter().map(|&p| fmt_float(p)).collect::<Vec<_>>().join(",")
    ));
    if spec.schemes.contains(&Scheme::Oracle) {
        out.push_str(&format!("# oracle_resolution_m: {}\n", spec.oracle_resolution));
    }
    if spec.schemes.contains(&Scheme::EqualBandwidth) {
        let label = match spec.equal_location {
            EqualBandwidthLocation::Optimized => "optimized",
            EqualBandwidthLocation::Center => "center",
        };
        out.push_str(&format!("# equal_bandwidth_location: {label}\n"));
    }
    for note in notes {
        out.push_str(&format!("# scenario default: {note}\n"));
    }
    out.push_str(TABLE_HEADER);
    out.push('\n');

    let mut proposed_vs_fixed: Option<f64> = None;
    for (&power, cell) in spec.powers_w.iter().zip(cells) {
        let cell = cell?;
        for (scheme, report) in &cell {
            out.push_str(&table_row(power, *scheme, report));
            out.push('\n');
        }
        let find = |want: Scheme| cell.iter().find(|(s, _)| *s == want).map(|(_, r)| r);
        if let (Some(p), Some(f)) = (find(Scheme::Proposed), find(Scheme::FixedLocation)) {
            if p.feasible && f.feasible && f.sum_rate > 0.0 {
                let ratio = p.sum_rate / f.sum_rate;
                proposed_vs_fixed =
                    Some(proposed_vs_fixed.map_or(ratio, |best| best.max(ratio)));
            }
        }
    }
    match proposed_vs_fixed {
        Some(ratio) => out.push_str(&format!(
            "# max proposed/fixed sum-rate ratio: {ratio:.6}\n"
        )),
        None if spec.schemes.contains(&Scheme::Proposed)
            && spec.schemes.contains(&Scheme::FixedLocation) =>
        {
            out.push_str("# max proposed/fixed sum-rate ratio: n/a (no power where both feasible)\n")
        }
        None => {}
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::gen_scenario;

    #[test]
    fn default_powers_span_minus_ten_to_thirty_dbm() {
        let p = default_powers_w();
        assert_eq!(p.len(), 9);
        assert!((p[0] - 1e-4).abs() < 1e-15);
        assert!((p[8] - 1.0).abs() < 1e-12);
        assert!(p.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn parse_powers_accepts_watt_lists() {
        let p = parse_powers("0.001,0.01,0.1").unwrap();
        assert_eq!(p, vec![0.001, 0.01, 0.1]);
        let q = parse_powers("1w,0.5W").unwrap();
        assert_eq!(q, vec![1.0, 0.5]);
    }

    #[test]
    fn parse_powers_accepts_dbm_lists_and_ranges() {
        let p = parse_powers("0dbm,10dbm").unwrap();
        assert!((p[0] - 1e-3).abs() < 1e-15);
        assert!((p[1] - 1e-2).abs() < 1e-15);
        let r = parse_powers("-10..30:5dbm").unwrap();
        assert_eq!(r.len(), 9);
        assert!((r[0] - 1e-4).abs() < 1e-15);
        assert!((r[8] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parse_powers_rejects_garbage() {
        assert!(parse_powers("").is_err());
        assert!(parse_powers("fast").is_err());
        assert!(parse_powers("1..0:1").is_err());
        assert!(parse_powers("0..1:0").is_err());
        assert!(parse_powers("0..1").is_err());
    }

    #[test]
    fn parse_schemes_canonicalizes_order_and_dedupes() {
        let s = parse_schemes("oracle,proposed,proposed,fixed-location").unwrap();
        assert_eq!(s, vec![Scheme::Proposed, Scheme::FixedLocation, Scheme::Oracle]);
        assert!(parse_schemes("bogus").is_err());
    }

    #[test]
    fn sweep_rejects_invalid_specs() {
        let s = gen_scenario(3, 2).unwrap();
        let mut spec = SweepSpec::default();
        spec.powers_w.clear();
        assert!(run_sweep(&s, &spec, &[]).is_err());
        let spec = SweepSpec { schemes: vec![], ..SweepSpec::default() };
        assert!(run_sweep(&s, &spec, &[]).is_err());
        let spec = SweepSpec { powers_w: vec![-1.0], ..SweepSpec::default() };
        assert!(run_sweep(&s, &spec, &[]).is_err());
    }

    #[test]
    fn sweep_table_has_the_documented_shape() {
        let s = gen_scenario(3, 3).unwrap();
        let spec = SweepSpec {
            powers_w: vec![0.001, 0.01],
            schemes: vec![Scheme::Proposed, Scheme::FixedLocation],
            ..SweepSpec::default()
        };
        let table = run_sweep(&s, &spec, &["example note".to_string()]).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        let header_idx = lines.iter().position(|l| *l == TABLE_HEADER).unwrap();
        assert!(lines[..header_idx].iter().all(|l| l.starts_with('#')));
        assert!(lines.iter().any(|l| l.contains("example note")));
        let rows: Vec<&str> =
            lines[header_idx + 1..].iter().filter(|l| !l.starts_with('#')).copied().collect();
        assert_eq!(rows.len(), 4); // |powers| x |schemes|
        assert!(rows[0].starts_with("1.00000000000e-3,proposed,"));
        assert!(rows[1].starts_with("1.00000000000e-3,fixed-location,"));
        assert!(rows[2].starts_with("1.00000000000e-2,proposed,"));
        assert!(lines.last().unwrap().starts_with("# max proposed/fixed sum-rate ratio:"));
    }

    #[test]
    fn sweep_tables_are_byte_deterministic() {
        let s = gen_scenario(11, 3).unwrap();
        let spec = SweepSpec {
            powers_w: vec![0.01, 0.1],
            schemes: vec![Scheme::Proposed, Scheme::EqualBandwidth],
            ..SweepSpec::default()
        };
        let a = run_sweep(&s, &spec, &[]).unwrap();
        let b = run_sweep(&s, &spec, &[]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn proposed_rows_are_monotone_in_power() {
        let s = gen_scenario(5, 3).unwrap();
        let spec = SweepSpec {
            powers_w: vec![1e-4, 1e-3, 1e-2, 1e-1],
            schemes: vec![Scheme::Proposed],
            ..SweepSpec::default()
        };
        let table = run_sweep(&s, &spec, &[]).unwrap();
        let rates: Vec<f64> = table
            .lines()
            .filter(|l| l.contains(",proposed,"))
            .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
            .collect();
        assert_eq!(rates.len(), 4);
        assert!(rates.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)));
    }
}
