//! End-to-end tests for the `headway` binary: exit codes, help text,
//! and byte-level determinism of the outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_headway"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).expect("write config");
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited without a code")
}

const SIM_CONFIG: &str = "\
alpha = 3.0
omega = 1.0
d = 1.0
n_cars = 5
leader.kind = constant
leader.v = 1.0
ic.kind = perturbed
ic.theta = 0.1
ic.beta = 0.05
horizon = 10.0
dt = 0.01
sample_stride = 10
";

#[test]
fn help_lists_every_config_key_and_exit_code() {
    let out = bin().arg("--help").output().expect("run --help");
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let keys = [
        "alpha",
        "omega",
        "d",
        "n_cars",
        "leader.kind",
        "leader.v",
        "leader.amplitude",
        "leader.omega0",
        "ic.kind",
        "ic.theta",
        "ic.beta",
        "ic.epsilon",
        "ic.rho",
        "horizon",
        "dt",
        "sample_stride",
        "spectrum.box",
        "spectrum.resolution",
        "saddle.mu",
        "saddle.k_min",
        "saddle.k_max",
        "sweep.alpha_min",
        "sweep.alpha_max",
        "sweep.alpha_steps",
        "sweep.omega_min",
        "sweep.omega_max",
        "sweep.omega_steps",
        "sweep.slope_pos",
        "sweep.slope_neg",
        "sweep.k_lo",
        "sweep.k_hi",
    ];
    for key in keys {
        assert!(text.contains(key), "--help must document config key `{key}`");
    }
    for line in ["Exit codes:", "  0  ", "  1  ", "  2  ", "  3  "] {
        assert!(text.contains(line), "--help must document `{line}`");
    }
    for sub in ["simulate", "verify", "spectrum", "saddle", "sweep", "density"] {
        assert!(text.contains(sub), "--help must list the `{sub}` subcommand");
    }
}

#[test]
fn simulate_writes_deterministic_outputs() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = write_config(dir.path(), "sim.cfg", SIM_CONFIG);

    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out_path = dir.path().join(name);
        let out = bin()
            .args(["simulate", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out_path)
            .output()
            .expect("run simulate");
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
        let csv = fs::read(&out_path).expect("read trajectory");
        let report = fs::read(out_path.with_extension("report.json")).expect("read report");
        outputs.push((csv, report, stdout(&out)));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "trajectory CSV must be byte-identical");
    assert_eq!(outputs[0].1, outputs[1].1, "report JSON must be byte-identical");

    let header = String::from_utf8_lossy(&outputs[0].0).lines().next().unwrap().to_owned();
    assert_eq!(header, "t,k,r,v,q");
    assert!(outputs[0].2.contains("i_hat"), "summary must include the report");
}

#[test]
fn missing_required_key_exits_2_with_the_key_name() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = write_config(dir.path(), "bad.cfg", "alpha = 3.0\nomega = 1.0\n");
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .expect("run simulate");
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("missing required key"), "stderr: {}", stderr(&out));
}

#[test]
fn malformed_config_exits_2_and_cites_the_line() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = write_config(dir.path(), "bad.cfg", "alpha = 3.0\nnot a key value\n");
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .expect("run simulate");
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "stderr: {}", stderr(&out));
}

#[test]
fn inadmissible_parameters_exit_3() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = write_config(
        dir.path(),
        "neg.cfg",
        "alpha = -1.0\nomega = 1.0\nd = 1.0\nn_cars = 2\nleader.kind = constant\n\
         leader.v = 1.0\nic.kind = equilibrium\nhorizon = 1.0\ndt = 0.01\n",
    );
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .expect("run simulate");
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("alpha"), "stderr: {}", stderr(&out));
}

#[test]
fn unreadable_config_exits_2() {
    let out = bin()
        .args(["simulate", "--config", "/nonexistent/nowhere.cfg", "--out", "/tmp/x.csv"])
        .output()
        .expect("run simulate");
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_unknown_suite_exits_2_and_lists_the_suites() {
    let out = bin().args(["verify", "nosuch"]).output().expect("run verify");
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("unknown suite"), "stderr: {err}");
    assert!(err.contains("theorem1") && err.contains("oracle"), "stderr: {err}");
}

#[test]
fn verify_resonance_passes_and_prints_the_seed() {
    let out = bin().args(["verify", "resonance"]).output().expect("run verify");
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("seed 1729"), "default seed must be printed: {text}");
    assert!(text.contains("[PASS]"), "stdout: {text}");
    assert!(!text.contains("[FAIL]"), "stdout: {text}");
}

#[test]
fn verify_accepts_an_explicit_seed() {
    let out = bin()
        .args(["verify", "spectrum", "--seed", "7"])
        .output()
        .expect("run verify");
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("seed 7"), "stdout: {}", stdout(&out));
}

#[test]
fn spectrum_scan_separates_inside_from_outside() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = write_config(
        dir.path(),
        "spec.cfg",
        "alpha = 1.0\nomega = 1.0\nspectrum.resolution = 0.25\n",
    );
    let out_path = dir.path().join("spec.csv");
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_path)
        .output()
        .expect("run spectrum");
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let text = fs::read_to_string(&out_path).expect("read grid");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("re,im,inside"));
    let (mut inside, mut outside) = (0usize, 0usize);
    for line in lines {
        match line.rsplit(',').next() {
            Some("1") => inside += 1,
            Some("0") => outside += 1,
            other => panic!("bad inside flag {other:?} in {line}"),
        }
    }
    assert!(inside > 0, "the scan must find interior points");
    assert!(outside > inside, "most of the window lies outside the region");
    // The origin solves z^2 + alpha z + omega^2 = omega^2 exactly, so it is
    // always on the region boundary and must count as inside.
    assert!(
        text.lines().any(|l| l.starts_with("0.0000000000000000e0,0.0000000000000000e0,1")),
        "origin row missing or not inside"
    );
}

#[test]
fn saddle_compares_prediction_with_simulation() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = write_config(
        dir.path(),
        "saddle.cfg",
        "alpha = 1.0\nomega = 1.0\nd = 1.0\nn_cars = 60\nleader.kind = constant\n\
         leader.v = 1.0\nic.kind = kick\nic.epsilon = 0.001\nhorizon = 60.0\ndt = 0.02\n\
         sample_stride = 5\nsaddle.mu = 2.0\nsaddle.k_min = 10\nsaddle.k_max = 25\n",
    );
    let out_path = dir.path().join("saddle.csv");
    let out = bin()
        .args(["saddle", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_path)
        .output()
        .expect("run saddle");
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let text = fs::read_to_string(&out_path).expect("read comparison");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,predicted,simulated"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 16, "one row per k in [10, 25]");
    assert!(rows[0].starts_with("10,"));
    assert!(rows[15].starts_with("25,"));
}

#[test]
fn saddle_without_a_kick_exits_3() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = write_config(
        dir.path(),
        "saddle.cfg",
        "alpha = 1.0\nomega = 1.0\nd = 1.0\nn_cars = 10\nleader.kind = constant\n\
         leader.v = 1.0\nic.kind = equilibrium\nhorizon = 20.0\ndt = 0.02\n",
    );
    let out = bin()
        .args(["saddle", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .expect("run saddle");
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("kick"), "stderr: {}", stderr(&out));
}

#[test]
fn sweep_labels_match_the_analytic_sectors_and_ignore_worker_count() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = write_config(
        dir.path(),
        "sweep.cfg",
        "sweep.alpha_min = 1.0\nsweep.alpha_max = 3.0\nsweep.alpha_steps = 2\n\
         sweep.omega_min = 1.0\nsweep.omega_max = 1.0\nsweep.omega_steps = 1\n",
    );

    let mut csvs = Vec::new();
    for workers in ["1", "3"] {
        let out_path = dir.path().join(format!("sweep{workers}.csv"));
        let out = bin()
            .args(["sweep", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out_path)
            .args(["--workers", workers])
            .output()
            .expect("run sweep");
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
        csvs.push(fs::read(&out_path).expect("read sweep csv"));
    }
    assert_eq!(csvs[0], csvs[1], "sweep CSV must not depend on the worker count");

    let text = String::from_utf8_lossy(&csvs[0]).into_owned();
    let labels: Vec<(f64, &str)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let fields: Vec<&str> = l.split(',').collect();
            (fields[0].parse::<f64>().expect("alpha field"), fields[6])
        })
        .collect();
    assert_eq!(labels.len(), 2);
    for (alpha, label) in labels {
        if alpha > 2.0 {
            assert_eq!(label, "stable", "alpha = {alpha} lies in the overdamped sector");
        } else {
            assert_eq!(label, "unstable", "alpha = {alpha} lies below the oscillatory bound");
        }
    }
}

#[test]
fn density_tracks_the_relaxation_law() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = write_config(
        dir.path(),
        "dens.cfg",
        "alpha = 2.0\nomega = 1.0\nd = 1.0\nn_cars = 50\nleader.kind = constant\n\
         leader.v = 1.0\nic.kind = gap_perturbed\nic.theta = 0.0\nic.beta = 0.02\n\
         horizon = 10.0\ndt = 0.005\nsample_stride = 20\n",
    );
    let out_path = dir.path().join("dens.csv");
    let out = bin()
        .args(["density", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_path)
        .output()
        .expect("run density");
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let text = fs::read_to_string(&out_path).expect("read series");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,l_n,l_law,abs_err"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 101, "one row per sample");
    // The law is exact at t = 0 by construction.
    assert!(rows[0].ends_with("0.0000000000000000e0"), "row: {}", rows[0]);
}
