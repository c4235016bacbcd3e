//! Acceptance gate: one test per criterion, each printing a single
//! `ACCEPTANCE <n> <name>: PASS|FAIL` line (visible under
//! `--nocapture`) followed by the individual measured-vs-bound checks.

use std::time::{Duration, Instant};

use headway_core::model::{ControlParams, InitialConditionSpec, LeaderSpec, SectorClass};
use headway_core::integrator::simulate;
use headway_core::suites::{
    all_passed, density_suite, oracle_suite, resonance_suite, saddle_suite, spectrum_suite,
    theorem1_suite, theorem2_suite, theorem3_suite, theorem4_suite, theorem5_suite, CheckResult,
    DEFAULT_SEED,
};
use headway_core::sweep::{run_sweep, write_sweep_csv, CellLabel, ClassifyThresholds, SweepGrid, SweepTemplate};

fn report(idx: usize, name: &str, checks: &[CheckResult]) {
    let ok = all_passed(checks);
    println!("ACCEPTANCE {idx} {name}: {}", if ok { "PASS" } else { "FAIL" });
    for c in checks {
        println!("  {c}");
    }
    assert!(ok, "criterion {idx} ({name}) failed:\n{checks:#?}");
}

fn assert_runtime(idx: usize, elapsed: Duration, limit: Duration) {
    assert!(
        elapsed <= limit,
        "criterion {idx} took {elapsed:.2?}, over its {limit:.2?} budget"
    );
}

#[test]
fn criterion_01_oracle_equivalence() {
    let start = Instant::now();
    let checks = oracle_suite(DEFAULT_SEED).expect("suite runs");
    let elapsed = start.elapsed();
    report(1, "oracle equivalence", &checks);
    assert_runtime(1, elapsed, Duration::from_secs(30));
}

#[test]
fn criterion_02_overdamped_corridor() {
    let start = Instant::now();
    let checks = theorem1_suite().expect("suite runs");
    let elapsed = start.elapsed();
    report(2, "overdamped gap corridor", &checks);
    assert_runtime(2, elapsed, Duration::from_secs(60));
}

#[test]
fn criterion_03_velocity_contraction() {
    let checks = theorem2_suite().expect("suite runs");
    report(3, "velocity-deviation contraction", &checks);
}

#[test]
fn criterion_04_maneuver_corridor() {
    let checks = theorem3_suite().expect("suite runs");
    report(4, "maneuvering-leader gap corridor", &checks);
}

#[test]
fn criterion_05_restricted_corridor() {
    let mut checks = theorem4_suite().expect("suite runs");
    checks.extend(theorem5_suite().expect("suite runs"));
    report(5, "restricted-band summable-data corridor", &checks);
}

#[test]
fn criterion_06_density_law() {
    let checks = density_suite().expect("suite runs");
    report(6, "mean-length relaxation law", &checks);
}

#[test]
fn criterion_07_resonance() {
    let checks = resonance_suite().expect("suite runs");
    report(7, "undamped resonance", &checks);
}

#[test]
fn criterion_08_spectrum_dichotomy() {
    let checks = spectrum_suite().expect("suite runs");
    report(8, "spectrum positive-real dichotomy", &checks);
}

#[test]
fn criterion_09_saddle_asymptotics() {
    let start = Instant::now();
    let checks = saddle_suite().expect("suite runs");
    let elapsed = start.elapsed();
    report(9, "saddle-ray asymptotics", &checks);
    assert_runtime(9, elapsed, Duration::from_secs(300));
}

#[test]
fn criterion_10_phase_sweep() {
    let grid = SweepGrid::default_grid();
    let template = SweepTemplate::default();
    let thresholds = ClassifyThresholds::default();
    let cells = run_sweep(&grid, &template, &thresholds, Some(1)).expect("sweep runs");
    let cells_par = run_sweep(&grid, &template, &thresholds, Some(3)).expect("sweep runs");

    let mut csv_seq = Vec::new();
    write_sweep_csv(&cells, &mut csv_seq).unwrap();
    let mut csv_par = Vec::new();
    write_sweep_csv(&cells_par, &mut csv_par).unwrap();

    let false_unstable = cells
        .iter()
        .filter(|c| {
            c.analytic_sector == SectorClass::Stable && c.empirical_label == CellLabel::Unstable
        })
        .count();
    let in_scope: Vec<_> = cells.iter().filter(|c| c.alpha < 1.3 * c.omega).collect();
    let caught = in_scope.iter().filter(|c| c.empirical_label == CellLabel::Unstable).count();
    let recall = caught as f64 / in_scope.len() as f64;

    let checks = vec![
        CheckResult {
            name: "worker counts 1 and 3 give byte-identical CSV".into(),
            passed: csv_seq == csv_par,
            measured: f64::from(csv_seq == csv_par),
            bound: 1.0,
        },
        CheckResult {
            name: "no stable-sector cell labelled unstable".into(),
            passed: false_unstable == 0,
            measured: false_unstable as f64,
            bound: 0.0,
        },
        CheckResult {
            name: format!(
                "unstable recall below alpha = 1.3 omega ({caught}/{})",
                in_scope.len()
            ),
            passed: recall >= 0.9,
            measured: recall,
            bound: 0.9,
        },
    ];
    report(10, "phase sweep against analytic sectors", &checks);
}

#[test]
fn criterion_11_kick_collapse() {
    let p = ControlParams::new(1.0, 1.0, 1.0).unwrap();
    let leader = LeaderSpec::ConstantVelocity { v: 1.0 };
    let spec = InitialConditionSpec::SingleVelocityKick { n: 300, v: 1.0, epsilon: 0.01 };
    let mut minima = Vec::new();
    for horizon in [150.0, 300.0, 600.0] {
        let record = simulate(&spec, &p, &leader, horizon, 0.02, 10).expect("simulates");
        minima.push(record.gap_min.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    let checks = vec![
        CheckResult {
            name: format!("running min strictly decreases: {:.3e} > {:.3e}", minima[0], minima[1]),
            passed: minima[1] < minima[0],
            measured: minima[1],
            bound: minima[0],
        },
        CheckResult {
            name: format!("running min strictly decreases: {:.3e} > {:.3e}", minima[1], minima[2]),
            passed: minima[2] < minima[1],
            measured: minima[2],
            bound: minima[1],
        },
        CheckResult {
            name: "running min negative by horizon 600".into(),
            passed: minima[2] < 0.0,
            measured: minima[2],
            bound: 0.0,
        },
    ];
    report(11, "kick-induced gap collapse under horizon doubling", &checks);
}
