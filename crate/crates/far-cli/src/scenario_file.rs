//! Scenario file format: flat TOML with explicit unit suffixes.
//!
//! Radio quantities accept either a linear or a decibel key (for example
//! `noise_power_w` or `noise_power_dbm`), never both. Omitted radio
//! parameters fall back to documented defaults and every applied default is
//! returned as a note, so run outputs are self-describing about what the
//! file did not pin down.
//!
//! [`write_scenario`] always emits the canonical explicit form with linear
//! units; since Rust prints floats in shortest round-trip form, a
//! write/load cycle reproduces the `Scenario` bit for bit.

use crate::{db_to_linear, dbm_to_watts, CliError, CliResult};
use far_core::model::{Scenario, UserTerminal};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Default path-loss exponent (free-space-like line of sight).
pub const DEFAULT_PATH_LOSS_EXP: f64 = 2.0;
/// Default reference gain at 1 m: -40 dB.
pub const DEFAULT_REF_GAIN: f64 = 1e-4;
/// Default noise power: -90 dBm.
pub const DEFAULT_NOISE_POWER_W: f64 = 1e-12;
/// Default in-wall propagation speedup factor.
pub const DEFAULT_MEDIUM_FACTOR: f64 = 3.0;
/// Default per-user minimum rate in bits per second.
pub const DEFAULT_MIN_RATE_BPS: f64 = 1e5;

/// A parsed scenario plus the defaults that were applied to produce it.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    /// Human-readable notes, one per applied default, in a fixed order.
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    bs_position_m: [f64; 3],
    wall_width_m: f64,
    port_y_bounds_m: [f64; 2],
    port_z_bounds_m: [f64; 2],
    total_bandwidth_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_power_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ref_gain: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ref_gain_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path_loss_exp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    medium_factor: Option<f64>,
    users: Vec<UserRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UserRecord {
    x_m: f64,
    y_m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tx_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tx_power_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_rate_bps: Option<f64>,
}

/// Resolves a linear/decibel key pair: at most one may be present.
fn pick_unit(
    what: &str,
    linear: Option<f64>,
    decibel: Option<f64>,
    convert: impl Fn(f64) -> f64,
) -> CliResult<Option<f64>> {
    match (linear, decibel) {
        (Some(_), Some(_)) => Err(CliError::Validation(format!(
            "{what}: both the linear and the decibel key are set; keep exactly one"
        ))),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(db)) => Ok(Some(convert(db))),
        (None, None) => Ok(None),
    }
}

/// Parses scenario text, applying documented defaults for omitted keys.
pub fn parse_scenario_str(text: &str) -> CliResult<LoadedScenario> {
    let file: ScenarioFile = toml::from_str(text)
        .map_err(|e| CliError::Validation(format!("scenario parse: {e}")))?;
    let mut notes = Vec::new();

    let noise_power =
        match pick_unit("noise_power", file.noise_power_w, file.noise_power_dbm, dbm_to_watts)? {
            Some(v) => v,
            None => {
                notes.push("noise_power defaulted to 1e-12 W (-90 dBm)".to_string());
                DEFAULT_NOISE_POWER_W
            }
        };
    let ref_gain = match pick_unit("ref_gain", file.ref_gain, file.ref_gain_db, db_to_linear)? {
        Some(v) => v,
        None => {
            notes.push("ref_gain defaulted to 1e-4 (-40 dB)".to_string());
            DEFAULT_REF_GAIN
        }
    };
    let path_loss_exp = file.path_loss_exp.unwrap_or_else(|| {
        notes.push("path_loss_exp defaulted to 2".to_string());
        DEFAULT_PATH_LOSS_EXP
    });
    let medium_factor = file.medium_factor.unwrap_or_else(|| {
        notes.push("medium_factor defaulted to 3".to_string());
        DEFAULT_MEDIUM_FACTOR
    });

    let mut users = Vec::with_capacity(file.users.len());
    let mut defaulted_floors = 0usize;
    for (i, u) in file.users.iter().enumerate() {
        let tx_power =
            pick_unit("tx_power", u.tx_power_w, u.tx_power_dbm, dbm_to_watts)?.ok_or_else(
                || {
                    CliError::Validation(format!(
                        "users[{i}]: tx_power_w or tx_power_dbm is required"
                    ))
                },
            )?;
        let min_rate = match u.min_rate_bps {
            Some(v) => v,
            None => {
                defaulted_floors += 1;
                DEFAULT_MIN_RATE_BPS
            }
        };
        users.push(UserTerminal { x: u.x_m, y: u.y_m, tx_power, min_rate });
    }
    if defaulted_floors > 0 {
        notes.push(format!(
            "min_rate defaulted to 1e5 bit/s for {defaulted_floors} user(s)"
        ));
    }

    let scenario = Scenario::new(
        users,
        file.bs_position_m,
        file.wall_width_m,
        file.port_y_bounds_m,
        file.port_z_bounds_m,
        file.total_bandwidth_hz,
        noise_power,
        ref_gain,
        path_loss_exp,
        medium_factor,
    )
    .map_err(CliError::from)?;
    Ok(LoadedScenario { scenario, notes })
}

/// Reads and parses a scenario file.
pub fn load_scenario(path: &Path) -> CliResult<LoadedScenario> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Validation(format!("cannot read {}: {e}", path.display()))
    })?;
    parse_scenario_str(&text)
}

/// Canonical explicit serialization: every radio parameter written in
/// linear units with full round-trip precision.
pub fn write_scenario(s: &Scenario) -> String {
    let file = ScenarioFile {
        bs_position_m: s.bs_position,
        wall_width_m: s.wall_width,
        port_y_bounds_m: s.y_bounds,
        port_z_bounds_m: s.z_bounds,
        total_bandwidth_hz: s.total_bandwidth,
        noise_power_w: Some(s.noise_power),
        noise_power_dbm: None,
        ref_gain: Some(s.ref_gain),
        ref_gain_db: None,
        path_loss_exp: Some(s.path_loss_exp),
        medium_factor: Some(s.medium_factor),
        users: s
            .users
            .iter()
            .map(|u| UserRecord {
                x_m: u.x,
                y_m: u.y,
                tx_power_w: Some(u.tx_power),
                tx_power_dbm: None,
                min_rate_bps: Some(u.min_rate),
            })
            .collect(),
    };
    toml::to_string(&file).expect("scenario serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
bs_position_m = [350.0, 30.0, 30.0]
wall_width_m = 20.0
port_y_bounds_m = [0.0, 20.0]
port_z_bounds_m = [0.0, 20.0]
total_bandwidth_hz = 1e7

[[users]]
x_m = 100.0
y_m = 150.0
tx_power_dbm = 10.0
"#;

    #[test]
    fn minimal_file_gets_every_documented_default() {
        let loaded = parse_scenario_str(MINIMAL).unwrap();
        let s = &loaded.scenario;
        assert_eq!(s.noise_power, 1e-12);
        assert_eq!(s.ref_gain, 1e-4);
        assert_eq!(s.path_loss_exp, 2.0);
        assert_eq!(s.medium_factor, 3.0);
        assert_eq!(s.users[0].min_rate, 1e5);
        assert!((s.users[0].tx_power - 0.01).abs() < 1e-15);
        assert_eq!(loaded.notes.len(), 5);
        assert!(loaded.notes.iter().any(|n| n.contains("path_loss_exp defaulted to 2")));
    }

    #[test]
    fn explicit_file_generates_no_notes() {
        let text = r#"
bs_position_m = [350.0, 30.0, 30.0]
wall_width_m = 20.0
port_y_bounds_m = [0.0, 20.0]
port_z_bounds_m = [0.0, 20.0]
total_bandwidth_hz = 1e7
noise_power_w = 1e-12
ref_gain = 1e-4
path_loss_exp = 2.0
medium_factor = 3.0

[[users]]
x_m = 100.0
y_m = 150.0
tx_power_w = 0.01
min_rate_bps = 1e5
"#;
        let loaded = parse_scenario_str(text).unwrap();
        assert!(loaded.notes.is_empty());
    }

    #[test]
    fn decibel_keys_convert_to_linear() {
        let text = r#"
bs_position_m = [350.0, 30.0, 30.0]
wall_width_m = 20.0
port_y_bounds_m = [0.0, 20.0]
port_z_bounds_m = [0.0, 20.0]
total_bandwidth_hz = 1e7
noise_power_dbm = -90.0
ref_gain_db = -40.0

[[users]]
x_m = 100.0
y_m = 150.0
tx_power_dbm = 0.0
"#;
        let s = parse_scenario_str(text).unwrap().scenario;
        assert!((s.noise_power - 1e-12).abs() < 1e-24);
        assert!((s.ref_gain - 1e-4).abs() < 1e-16);
        assert!((s.users[0].tx_power - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn conflicting_unit_keys_are_rejected() {
        let text = MINIMAL.replace(
            "total_bandwidth_hz = 1e7",
            "total_bandwidth_hz = 1e7\nnoise_power_w = 1e-12\nnoise_power_dbm = -90.0",
        );
        let err = parse_scenario_str(&text).unwrap_err();
        assert!(matches!(err, CliError::Validation(ref m) if m.contains("noise_power")));
    }

    #[test]
    fn missing_tx_power_is_rejected_with_the_user_index() {
        let text = MINIMAL.replace("tx_power_dbm = 10.0", "min_rate_bps = 1e5");
        let err = parse_scenario_str(&text).unwrap_err();
        assert!(matches!(err, CliError::Validation(ref m) if m.contains("users[0]")));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("wall_width_m", "wall_thickness_m");
        let err = parse_scenario_str(&text).unwrap_err();
        assert!(matches!(err, CliError::Validation(ref m) if m.contains("wall_thickness_m")));
    }

    #[test]
    fn invariant_violations_name_the_field() {
        let text = MINIMAL.replace(
            "total_bandwidth_hz = 1e7",
            "total_bandwidth_hz = 1e7\nmedium_factor = 0.5",
        );
        let err = parse_scenario_str(&text).unwrap_err();
        assert!(
            matches!(err, CliError::Validation(ref m) if m.contains("medium_factor")),
            "got {err}"
        );
    }

    #[test]
    fn malformed_toml_reports_a_parse_error() {
        let err = parse_scenario_str("users = [[[").unwrap_err();
        assert!(matches!(err, CliError::Validation(ref m) if m.contains("parse")));
    }

    #[test]
    fn write_then_load_reproduces_the_scenario_exactly() {
        let loaded = parse_scenario_str(MINIMAL).unwrap().scenario;
        let text = write_scenario(&loaded);
        let reloaded = parse_scenario_str(&text).unwrap();
        assert_eq!(reloaded.scenario, loaded);
        assert!(reloaded.notes.is_empty(), "canonical form must be explicit");
        // A second cycle is byte-stable.
        assert_eq!(write_scenario(&reloaded.scenario), text);
    }

    #[test]
    fn awkward_float_values_survive_the_round_trip() {
        let mut s = parse_scenario_str(MINIMAL).unwrap().scenario;
        s.users[0].tx_power = 0.1 + 0.2; // 0.30000000000000004
        s.ref_gain = f64::MIN_POSITIVE;
        s.total_bandwidth = 9_999_999.999_999_998;
        let reloaded = parse_scenario_str(&write_scenario(&s)).unwrap().scenario;
        assert_eq!(reloaded, s);
    }
}
