//! Command-line driver for the chain laboratory.
//!
//! Every subcommand is a pure function of its inputs: the same config file
//! and flags produce byte-identical output files and stdout, so runs can be
//! diffed across machines and worker counts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use headway_core::error::Error;
use headway_core::integrator::{simulate, TrajectoryRecord};
use headway_core::metrics::gap_extrema;
use headway_core::model::InitialConditionSpec;
use headway_core::oracle::mean_length_law;
use headway_core::scenario::{
    saddle_from_config, scenario_from_config, spectrum_from_config, sweep_from_config, RawConfig,
    Scenario,
};
use headway_core::spectral::{asymptotic_envelope, in_spectrum, saddle_analysis};
use headway_core::suites::{run_suite, DEFAULT_SEED, SUITE_NAMES};
use headway_core::sweep::{run_sweep, CellLabel};
use headway_core::Complex64;

const AFTER_HELP: &str = "\
Config files are flat `key = value` lines; `#` starts a comment. Keys:
  alpha, omega, d         control gain, control frequency, rest gap (all > 0)
  n_cars                  cars behind the leader (>= 1)
  leader.kind             constant | sinusoid | bounded
  leader.v                leader cruise speed
  leader.amplitude        leader wobble amplitude (sinusoid / bounded kinds)
  leader.omega0           leader wobble frequency (sinusoid / bounded kinds)
  ic.kind                 equilibrium | perturbed | gap_perturbed | summable | kick
  ic.theta                initial position spread, relative to the lattice
  ic.beta                 initial velocity spread, relative to the cruise speed
  ic.epsilon              kick amplitude (kick kind)
  ic.rho                  geometric decay rate (summable kind; default 0.5)
  horizon, dt             integration span and step (dt <= 0.1 / max(alpha, omega))
  sample_stride           record every n-th step (default 1)
  spectrum.box            half-width of the spectrum scan box (default 2 * omega)
  spectrum.resolution     spectrum scan spacing (default omega / 100)
  saddle.mu               ray slope t = mu * k (default 2 / alpha)
  saddle.k_min            first ray index reported (default 10)
  saddle.k_max            last ray index reported (default set by horizon and n_cars)
  sweep.alpha_min, sweep.alpha_max, sweep.alpha_steps
  sweep.omega_min, sweep.omega_max, sweep.omega_steps
                          sweep grid (defaults 0.2..4.0 x 20 by 0.2..2.0 x 20)
  sweep.slope_pos, sweep.slope_neg
                          ray-slope classification thresholds (defaults +/- 0.02)
  sweep.k_lo, sweep.k_hi  ray-fit index range (defaults 5, 60)

Exit codes:
  0  success; for `verify`, every check passed
  1  `verify` ran and at least one check failed
  2  config file unreadable or malformed (bad syntax, unknown or duplicate or
     missing keys; messages cite the line), or unknown verify suite
  3  config is well-formed but describes an inadmissible run (the message
     names the violated requirement), or an output file cannot be written
";

#[derive(Parser)]
#[command(
    name = "headway",
    version,
    about = "Numerical laboratory for a one-way vehicle chain with local linear control",
    after_help = AFTER_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario; write the trajectory CSV and a stability report.
    Simulate {
        /// Scenario config file.
        #[arg(long)]
        config: PathBuf,
        /// Trajectory CSV path; the report goes next to it as `.report.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named verification suite and print one line per check.
    Verify {
        /// One of: theorem1, theorem2, theorem3, theorem4, theorem5,
        /// density, resonance, spectrum, saddle, oracle.
        suite: String,
        /// Seed for the suites that draw random scenarios (always printed).
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Scan the complex plane for the closed-loop spectrum region.
    Spectrum {
        /// Config file with `alpha`, `omega`, and optional `spectrum.*` keys.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (`re,im,inside`).
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare simulated ray deviations against the saddle-point envelope.
    Saddle {
        /// Scenario config with a kick initial condition and `saddle.*` keys.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (`k,predicted,simulated`).
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify a grid of `(alpha, omega)` cells by simulated behavior.
    Sweep {
        /// Config file with optional `sweep.*` and template keys.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (one row per cell).
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores). The output does not depend
        /// on this.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Track the mean headway against the relaxation law.
    Density {
        /// Scenario config file.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (`t,l_n,l_law,abs_err`).
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure carrying the process exit code.
struct Fail {
    code: u8,
    message: String,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = if e.is_config_error() { 2 } else { 3 };
        Fail { code, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, Fail>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: &Command) -> CliResult<u8> {
    match cmd {
        Command::Simulate { config, out } => cmd_simulate(config, out),
        Command::Verify { suite, seed } => cmd_verify(suite, *seed),
        Command::Spectrum { config, out } => cmd_spectrum(config, out),
        Command::Saddle { config, out } => cmd_saddle(config, out),
        Command::Sweep { config, out, workers } => cmd_sweep(config, out, *workers),
        Command::Density { config, out } => cmd_density(config, out),
    }
}

fn read_config(path: &Path) -> CliResult<RawConfig> {
    let text = fs::read_to_string(path).map_err(|e| Fail {
        code: 2,
        message: format!("cannot read config {}: {e}", path.display()),
    })?;
    Ok(RawConfig::parse(&text)?)
}

fn create_out(path: &Path) -> CliResult<BufWriter<File>> {
    let file = File::create(path).map_err(|e| Fail {
        code: 3,
        message: format!("cannot create {}: {e}", path.display()),
    })?;
    Ok(BufWriter::new(file))
}

fn write_failed(path: &Path, e: std::io::Error) -> Fail {
    Fail { code: 3, message: format!("cannot write {}: {e}", path.display()) }
}

fn run_scenario(sc: &Scenario) -> CliResult<TrajectoryRecord> {
    Ok(simulate(&sc.ic, &sc.params, &sc.leader, sc.horizon, sc.dt, sc.stride)?)
}

fn cmd_simulate(config: &Path, out: &Path) -> CliResult<u8> {
    let sc = scenario_from_config(&read_config(config)?)?;
    let record = run_scenario(&sc)?;

    let mut w = create_out(out)?;
    record.write_csv(&mut w).map_err(|e| write_failed(out, e))?;
    w.flush().map_err(|e| write_failed(out, e))?;

    let report = gap_extrema(&record);
    let report_path = out.with_extension("report.json");
    fs::write(&report_path, format!("{}\n", report.to_json()))
        .map_err(|e| write_failed(&report_path, e))?;

    println!(
        "simulated {} cars over horizon {} ({} samples)",
        record.n_cars,
        sc.horizon,
        record.n_samples()
    );
    println!("trajectory: {}", out.display());
    println!("report: {} {}", report_path.display(), report.to_json());
    Ok(0)
}

fn cmd_verify(suite: &str, seed: u64) -> CliResult<u8> {
    if !SUITE_NAMES.contains(&suite) {
        return Err(Fail {
            code: 2,
            message: format!("unknown suite `{suite}`; known suites: {}", SUITE_NAMES.join(", ")),
        });
    }
    println!("suite {suite} (seed {seed})");
    let checks = run_suite(suite, seed)?;
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        println!("{suite}: all {} checks passed", checks.len());
        Ok(0)
    } else {
        println!("{suite}: {failed} of {} checks FAILED", checks.len());
        Ok(1)
    }
}

fn cmd_spectrum(config: &Path, out: &Path) -> CliResult<u8> {
    let sc = spectrum_from_config(&read_config(config)?)?;
    let (alpha, res, half) = (sc.params.alpha, sc.resolution, sc.box_size);

    // Cover [-alpha - box, box] x [-box, box]: the region boundary always
    // lies inside this window, whatever the sector.
    let re_lo = -alpha - half;
    let re_steps = (((half - re_lo) / res).round() as usize).max(1);
    let im_steps = (((2.0 * half) / res).round() as usize).max(1);

    let mut w = create_out(out)?;
    let mut rows = 0usize;
    let mut inside_count = 0usize;
    writeln!(w, "re,im,inside").map_err(|e| write_failed(out, e))?;
    for i in 0..=re_steps {
        let re = re_lo + i as f64 * res;
        for j in 0..=im_steps {
            let im = -half + j as f64 * res;
            let inside = in_spectrum(Complex64::new(re, im), &sc.params);
            inside_count += usize::from(inside);
            writeln!(w, "{re:.16e},{im:.16e},{}", u8::from(inside))
                .map_err(|e| write_failed(out, e))?;
            rows += 1;
        }
    }
    w.flush().map_err(|e| write_failed(out, e))?;

    println!(
        "scanned {rows} points at resolution {res} ({inside_count} inside the spectrum region)"
    );
    println!("grid: {}", out.display());
    Ok(0)
}

fn cmd_saddle(config: &Path, out: &Path) -> CliResult<u8> {
    let conf = saddle_from_config(&read_config(config)?)?;
    let sc = &conf.scenario;
    let epsilon = match sc.ic {
        InitialConditionSpec::SingleVelocityKick { epsilon, .. } => epsilon,
        _ => {
            return Err(Error::InvalidParams(
                "saddle runs need `ic.kind = kick` so the envelope amplitude is defined".into(),
            )
            .into())
        }
    };
    let data = saddle_analysis(conf.mu, &sc.params, epsilon)?;
    let record = run_scenario(sc)?;
    if record.n_samples() < 2 {
        return Err(Error::InsufficientData(
            "saddle comparison needs at least two samples".into(),
        )
        .into());
    }
    let spacing = record.sample_time(1) - record.sample_time(0);

    let mut w = create_out(out)?;
    writeln!(w, "k,predicted,simulated").map_err(|e| write_failed(out, e))?;
    for k in conf.k_lo..=conf.k_hi {
        let s = ((conf.mu * k as f64 / spacing).round() as usize).min(record.n_samples() - 1);
        let predicted = asymptotic_envelope(k, &data);
        let simulated = record.deviation(s, k + 1).ok_or_else(|| Fail {
            code: 3,
            message: "trajectory record carries no deviations".into(),
        })?;
        writeln!(w, "{k},{predicted:.16e},{simulated:.16e}").map_err(|e| write_failed(out, e))?;
    }
    w.flush().map_err(|e| write_failed(out, e))?;

    println!(
        "ray mu {} over k in [{}, {}]: growth rate {:.6e}, phase step {:.6e}",
        conf.mu, conf.k_lo, conf.k_hi, data.f, data.omega_inc
    );
    println!("comparison: {}", out.display());
    Ok(0)
}

fn cmd_sweep(config: &Path, out: &Path, workers: Option<usize>) -> CliResult<u8> {
    let conf = sweep_from_config(&read_config(config)?)?;
    let cells = run_sweep(&conf.grid, &conf.template, &conf.thresholds, workers)?;

    let mut w = create_out(out)?;
    headway_core::sweep::write_sweep_csv(&cells, &mut w).map_err(|e| write_failed(out, e))?;
    w.flush().map_err(|e| write_failed(out, e))?;

    let count = |l: CellLabel| cells.iter().filter(|c| c.empirical_label == l).count();
    println!(
        "swept {} cells: {} stable, {} unstable, {} inconclusive",
        cells.len(),
        count(CellLabel::Stable),
        count(CellLabel::Unstable),
        count(CellLabel::Inconclusive)
    );
    println!("phase diagram: {}", out.display());
    Ok(0)
}

fn cmd_density(config: &Path, out: &Path) -> CliResult<u8> {
    let sc = scenario_from_config(&read_config(config)?)?;
    let record = run_scenario(&sc)?;
    let n = record.n_cars;

    let mean_gap = |s: usize| (1..=n).map(|k| record.gap(s, k)).sum::<f64>() / n as f64;
    let (_, leader_v0, _) = sc.leader.kinematics(0.0);
    let l0 = mean_gap(0);
    let l0_dot = (leader_v0 - record.velocity(0, n)) / n as f64;

    let mut w = create_out(out)?;
    writeln!(w, "t,l_n,l_law,abs_err").map_err(|e| write_failed(out, e))?;
    let mut worst = 0.0f64;
    for s in 0..record.n_samples() {
        let t = record.sample_time(s);
        let l_n = mean_gap(s);
        let l_law = mean_length_law(l0, l0_dot, sc.params.alpha, t)?;
        let err = (l_n - l_law).abs();
        worst = worst.max(err);
        writeln!(w, "{t:.16e},{l_n:.16e},{l_law:.16e},{err:.16e}")
            .map_err(|e| write_failed(out, e))?;
    }
    w.flush().map_err(|e| write_failed(out, e))?;

    println!(
        "tracked mean headway for {n} cars: initial {l0:.6e}, rate {l0_dot:.6e}, max law error {worst:.6e}"
    );
    println!("series: {}", out.display());
    Ok(0)
}
