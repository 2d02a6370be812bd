//! `far`: solve, sweep, oracle-check, and generate relay placement
//! scenarios.
//!
//! Exit codes: 0 success, 1 validation error (bad flags or files), 2
//! structurally valid but infeasible scenario, 3 internal solver failure.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use far_cli::scenario_file::{load_scenario, LoadedScenario};
use far_cli::sweep::{parse_powers, parse_schemes, SweepSpec};
use far_cli::{generate, sweep, CliError, CliResult};
use far_core::model::Scenario;
use far_core::solver::{self, EqualBandwidthLocation, SolveReport};
use far_core::{oracle, port_b};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "far",
    version,
    about = "Joint port-placement and bandwidth-allocation experiments for a fluid-antenna relay uplink"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum EqualLocationArg {
    #[default]
    Optimized,
    Center,
}

impl From<EqualLocationArg> for EqualBandwidthLocation {
    fn from(v: EqualLocationArg) -> Self {
        match v {
            EqualLocationArg::Optimized => EqualBandwidthLocation::Optimized,
            EqualLocationArg::Center => EqualBandwidthLocation::Center,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full solver on one scenario and print the report.
    Solve {
        /// Scenario file (TOML).
        scenario: PathBuf,
    },
    /// Run schemes across a transmit-power sweep and write a CSV table.
    Sweep {
        /// Scenario file (TOML); per-user powers are overridden by the sweep.
        scenario: PathBuf,
        /// Powers: comma list (`1e-3,0.01`, `0dbm,10dbm`) or range
        /// (`-10..30:5dbm`). Bare numbers are watts. Default -10..30:5dbm.
        #[arg(long)]
        powers: Option<String>,
        /// Comma list drawn from: proposed, fixed-location, equal-bandwidth,
        /// oracle. Default: proposed,fixed-location,equal-bandwidth.
        #[arg(long)]
        schemes: Option<String>,
        /// Output table path.
        #[arg(long)]
        out: PathBuf,
        /// Port-A lattice step for the oracle scheme, meters.
        #[arg(long, default_value_t = 0.1)]
        oracle_resolution: f64,
        /// Placement policy for the equal-bandwidth scheme.
        #[arg(long, value_enum, default_value_t)]
        equal_location: EqualLocationArg,
    },
    /// Exhaustive grid search, for cross-checking the solver.
    Oracle {
        /// Scenario file (TOML).
        scenario: PathBuf,
        /// Lattice step in meters.
        #[arg(long)]
        resolution: f64,
        /// Search all four coordinates jointly instead of fixing port B.
        #[arg(long)]
        joint4d: bool,
    },
    /// Generate a deterministic random scenario file.
    Gen {
        /// Seed for the versioned generator.
        seed: u64,
        /// Number of users to draw.
        n_users: usize,
        /// Output scenario path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outcomes; everything else is
            // input validation.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("far: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.cmd {
        Cmd::Solve { scenario } => {
            let LoadedScenario { scenario, notes } = load_scenario(&scenario)?;
            let report = solver::solve(&scenario)?;
            print_report(&scenario, &report, &notes);
            if !report.feasible {
                return Err(CliError::Infeasible(
                    "no placement and allocation meets every rate floor".to_string(),
                ));
            }
            Ok(())
        }
        Cmd::Sweep { scenario, powers, schemes, out, oracle_resolution, equal_location } => {
            let LoadedScenario { scenario, notes } = load_scenario(&scenario)?;
            let mut spec = SweepSpec {
                oracle_resolution,
                equal_location: equal_location.into(),
                ..SweepSpec::default()
            };
            if let Some(arg) = powers {
                spec.powers_w = parse_powers(&arg)?;
            }
            if let Some(arg) = schemes {
                spec.schemes = parse_schemes(&arg)?;
            }
            let table = sweep::run_sweep(&scenario, &spec, &notes)?;
            std::fs::write(&out, &table)?;
            println!("wrote {} rows to {}", spec.powers_w.len() * spec.schemes.len(), out.display());
            Ok(())
        }
        Cmd::Oracle { scenario, resolution, joint4d } => {
            let LoadedScenario { scenario, notes } = load_scenario(&scenario)?;
            run_oracle(&scenario, resolution, joint4d, &notes)
        }
        Cmd::Gen { seed, n_users, out } => {
            let text = generate::gen_scenario_text(seed, n_users)?;
            std::fs::write(&out, &text)?;
            println!("wrote scenario (seed {seed}, {n_users} users) to {}", out.display());
            Ok(())
        }
    }
}

fn print_notes(notes: &[String]) {
    for note in notes {
        println!("note: {note}");
    }
}

fn print_report(scenario: &Scenario, r: &SolveReport, notes: &[String]) {
    println!("scheme: {}", r.scheme.label());
    print_notes(notes);
    println!("feasible: {}", r.feasible);
    if r.best_user_below_floor {
        println!("warning: surplus user's own rate lands below its floor");
    }
    println!(
        "placement_m: y1={:.6} z1={:.6} y2={:.6} z2={:.6}",
        r.placement.y1, r.placement.z1, r.placement.y2, r.placement.z2
    );
    println!("chosen_user: {} (1-based)", r.chosen_k + 1);
    println!("sum_rate_bps: {:.11e}", r.sum_rate);
    for (n, (b, rate)) in r.allocation.bandwidths.iter().zip(&r.per_user_rates).enumerate() {
        println!(
            "user {}: x={:.3} y={:.3} bandwidth_hz={:.11e} rate_bps={:.11e} floor_bps={:.11e}",
            n + 1,
            scenario.users[n].x,
            scenario.users[n].y,
            b,
            rate,
            scenario.users[n].min_rate
        );
    }
    println!("outer_iterations: {}", r.outer_iterations_total);
    println!("runtime_ms: {:.3}", r.runtime_ms);
}

fn run_oracle(scenario: &Scenario, resolution: f64, joint4d: bool, notes: &[String]) -> CliResult<()> {
    let result = if joint4d {
        oracle::grid_4d(scenario, resolution)?
    } else {
        let (y2, z2) = port_b::optimal_port_b(scenario)?;
        oracle::grid_2d(scenario, y2, z2, resolution)?
    };
    println!("mode: {}", if joint4d { "grid-4d" } else { "grid-2d" });
    print_notes(notes);
    println!("resolution_m: {}", result.grid_resolution);
    println!("evaluated_points: {}", result.evaluated_points);
    println!("feasible_fraction: {:.6}", result.feasible_fraction);
    let Some(best) = result.best else {
        return Err(CliError::Infeasible(
            "no lattice point meets every rate floor".to_string(),
        ));
    };
    println!(
        "best_placement_m: y1={:.6} z1={:.6} y2={:.6} z2={:.6}",
        best.placement.y1, best.placement.z1, best.placement.y2, best.placement.z2
    );
    println!("best_sum_rate_bps: {:.11e}", best.sum_rate);

    let report = solver::solve(scenario)?;
    println!("solver_sum_rate_bps: {:.11e}", report.sum_rate);
    println!(
        "solver_minus_grid_relative: {:.6e}",
        (report.sum_rate - best.sum_rate) / best.sum_rate
    );
    Ok(())
}
