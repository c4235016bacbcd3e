//! Grid sweep over the `(alpha, omega)` control plane: each cell runs one
//! kicked chain, measures gap extrema and ray growth, and labels the cell
//! empirically for comparison against the analytic sector.

use crate::error::{Error, Result};
use crate::integrator::simulate;
use crate::integrator::TrajectoryRecord;
use crate::metrics::{gap_extrema, ray_envelope, ray_growth_fit, StabilityReport};
use crate::model::{ControlParams, InitialConditionSpec, LeaderSpec, SectorClass};
use crate::spectral::{margin_theorem1, margin_theorem4, saddle_analysis};
use rayon::prelude::*;

/// Rectangular grid of control parameters. With `steps == 1` the single
/// value is the lower end of the range.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_steps: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_steps: usize,
}

impl SweepGrid {
    pub fn new(
        alpha_min: f64,
        alpha_max: f64,
        alpha_steps: usize,
        omega_min: f64,
        omega_max: f64,
        omega_steps: usize,
    ) -> Result<Self> {
        for (name, lo, hi, steps) in [
            ("alpha", alpha_min, alpha_max, alpha_steps),
            ("omega", omega_min, omega_max, omega_steps),
        ] {
            if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || hi < lo {
                return Err(Error::InvalidParams(format!(
                    "{name} range must satisfy 0 < min <= max, got [{lo}, {hi}]"
                )));
            }
            if steps == 0 || (steps == 1 && hi > lo) {
                return Err(Error::InvalidParams(format!(
                    "{name} needs at least 1 step (and min == max when steps == 1)"
                )));
            }
        }
        Ok(SweepGrid { alpha_min, alpha_max, alpha_steps, omega_min, omega_max, omega_steps })
    }

    /// 20 x 20 grid covering alpha in [0.2, 4] and omega in [0.2, 2],
    /// straddling all three sectors.
    pub fn default_grid() -> Self {
        SweepGrid::new(0.2, 4.0, 20, 0.2, 2.0, 20).expect("default grid is valid")
    }

    fn axis(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
        if steps == 1 {
            return vec![lo];
        }
        let span = hi - lo;
        (0..steps).map(|i| lo + span * i as f64 / (steps - 1) as f64).collect()
    }

    pub fn alpha_values(&self) -> Vec<f64> {
        Self::axis(self.alpha_min, self.alpha_max, self.alpha_steps)
    }

    pub fn omega_values(&self) -> Vec<f64> {
        Self::axis(self.omega_min, self.omega_max, self.omega_steps)
    }

    pub fn n_cells(&self) -> usize {
        self.alpha_steps * self.omega_steps
    }
}

/// One scenario shape reused for every cell: a chain at equilibrium whose
/// first car gets a velocity kick of size `kick_epsilon`, so every cell
/// probes the same disturbance.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTemplate {
    pub d: f64,
    pub v: f64,
    pub kick_epsilon: f64,
    pub n_cars: usize,
    pub horizon: f64,
    pub dt: f64,
    pub stride: usize,
    /// Ray-fit index range; the fit uses cars `k+1` for `k` in `[k_lo, k_hi]`.
    pub k_lo: usize,
    pub k_hi: usize,
}

impl Default for SweepTemplate {
    fn default() -> Self {
        SweepTemplate {
            d: 1.0,
            v: 1.0,
            kick_epsilon: 1e-3,
            n_cars: 70,
            horizon: 400.0,
            dt: 0.02,
            stride: 5,
            k_lo: 20,
            k_hi: 60,
        }
    }
}

impl SweepTemplate {
    fn validate(&self) -> Result<()> {
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::InvalidParams(format!("template d must be positive, got {}", self.d)));
        }
        if !(self.v.is_finite() && self.v >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "template v must be non-negative, got {}",
                self.v
            )));
        }
        if !(self.kick_epsilon.is_finite() && self.kick_epsilon >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "kick size must be non-negative, got {}",
                self.kick_epsilon
            )));
        }
        if self.k_lo < 1 || self.k_hi < self.k_lo + 9 {
            return Err(Error::InvalidParams(format!(
                "ray index range [{}, {}] must start at 1 or later and span at least 10 indices",
                self.k_lo, self.k_hi
            )));
        }
        if self.n_cars <= self.k_hi {
            return Err(Error::InvalidParams(format!(
                "template needs at least {} cars for ray index {}, got {}",
                self.k_hi + 1,
                self.k_hi,
                self.n_cars
            )));
        }
        Ok(())
    }

    /// Ray slope (time per index) for the growth fit: `1.5 / tau` where the
    /// oscillation rate `tau = sqrt(omega^2 - alpha^2/4)` exists, clamped so
    /// the whole fit range stays inside the horizon; plain `horizon / k_hi`
    /// in the overdamped sector.
    fn fit_mu(&self, params: &ControlParams) -> f64 {
        let clamp = self.horizon / self.k_hi as f64;
        let tau_sq = params.omega * params.omega - 0.25 * params.alpha * params.alpha;
        if tau_sq > 0.0 {
            (1.5 / tau_sq.sqrt()).min(clamp)
        } else {
            clamp
        }
    }
}

/// Empirical verdict for one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellLabel {
    Stable,
    Unstable,
    Inconclusive,
}

impl CellLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CellLabel::Stable => "stable",
            CellLabel::Unstable => "unstable",
            CellLabel::Inconclusive => "inconclusive",
        }
    }
}

/// Dead-band thresholds for the slope classifier; slopes between the two
/// bounds are not trusted either way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyThresholds {
    pub slope_pos: f64,
    pub slope_neg: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        ClassifyThresholds { slope_pos: 0.02, slope_neg: -0.02 }
    }
}

/// One grid point's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub alpha: f64,
    pub omega: f64,
    pub analytic_sector: SectorClass,
    pub i_hat: f64,
    pub s_hat: f64,
    pub growth_slope: f64,
    pub empirical_label: CellLabel,
    /// Sector-specific analytic margin: the sup-norm contraction factor in
    /// the overdamped sector, the summable-data factor in the restricted
    /// band, and the ray growth exponent `f(mu)` in the unstable sector.
    /// NaN when no margin applies (e.g. zero reference speed).
    pub margin: f64,
    /// Reason a cell could not be fully evaluated, if any.
    pub note: Option<String>,
}

/// Label a cell from its gap report and fitted growth slope: a collision or
/// a clearly positive slope means unstable; a clearly negative slope with
/// all gaps positive means stable; anything else is inconclusive. A NaN
/// slope fails both slope tests, so only a collision can then decide.
pub fn classify_cell(
    report: &StabilityReport,
    slope: f64,
    thresholds: &ClassifyThresholds,
) -> CellLabel {
    if report.i_hat < 0.0 || slope > thresholds.slope_pos {
        CellLabel::Unstable
    } else if slope < thresholds.slope_neg && report.i_hat > 0.0 {
        CellLabel::Stable
    } else {
        CellLabel::Inconclusive
    }
}

fn cell_margin(params: &ControlParams, template: &SweepTemplate, mu: f64) -> f64 {
    let kick = template.kick_epsilon;
    let v = template.v;
    let margin = match params.sector() {
        // sup-norm data: theta = 0, beta v = kick.
        SectorClass::Stable if v > 0.0 => {
            margin_theorem1(0.0, kick / v, 0.0, params, v).map(|m| m.margin)
        }
        // summable data: the kick is the entire velocity-deviation sum.
        SectorClass::Restricted if v > 0.0 => {
            margin_theorem4(0.0, kick / v, 0.0, params, v).map(|m| m.margin)
        }
        SectorClass::Unstable => saddle_analysis(mu, params, 1.0).map(|s| s.f),
        _ => Err(Error::InvalidParams("no margin defined".into())),
    };
    margin.unwrap_or(f64::NAN)
}

/// Growth slope along the fit ray, guarded against the rounding-noise
/// floor of the deviation samples.
///
/// Deviations are differences of positions of size up to
/// `v * horizon + n * a`, so once the kick's influence decays a few
/// orders below `eps * scale` the ray samples are pure rounding noise,
/// whose flat profile would masquerade as weak growth under the
/// `sqrt(k)`-corrected fit. The fit therefore stops at the last
/// above-floor index, and a ray that never clears the floor for the ten
/// points the fit needs reports `-inf`: decay beyond measurement.
fn fit_ray_slope(
    record: &TrajectoryRecord,
    params: &ControlParams,
    template: &SweepTemplate,
    mu: f64,
) -> (f64, Option<String>) {
    let a = params.equilibrium_spacing(template.v);
    let position_scale = (template.v * template.horizon + template.n_cars as f64 * a).max(1.0);
    let floor = 1e6 * f64::EPSILON * position_scale;
    let envelope = match ray_envelope(record, mu, template.k_lo, template.k_hi) {
        Ok((_, env)) => env,
        Err(e) => return (f64::NAN, Some(format!("ray fit failed: {e}"))),
    };
    let last_above = envelope.iter().rposition(|&e| e >= floor);
    let fit_hi = match last_above {
        Some(offset) if offset + 1 >= 10 => template.k_lo + offset,
        _ => {
            return (
                f64::NEG_INFINITY,
                Some("ray amplitude at the rounding-noise floor; decay beyond measurement".into()),
            )
        }
    };
    match ray_growth_fit(record, mu, template.k_lo, fit_hi) {
        Ok(fit) => (fit.slope, None),
        Err(e) => (f64::NAN, Some(format!("ray fit failed: {e}"))),
    }
}

fn evaluate_cell(
    alpha: f64,
    omega: f64,
    template: &SweepTemplate,
    thresholds: &ClassifyThresholds,
) -> SweepCell {
    let nan = f64::NAN;
    let params = match ControlParams::new(alpha, omega, template.d) {
        Ok(p) => p,
        Err(e) => {
            return SweepCell {
                alpha,
                omega,
                analytic_sector: SectorClass::Unstable,
                i_hat: nan,
                s_hat: nan,
                growth_slope: nan,
                empirical_label: CellLabel::Inconclusive,
                margin: nan,
                note: Some(format!("invalid cell parameters: {e}")),
            }
        }
    };
    let sector = params.sector();
    let mu = template.fit_mu(&params);
    let margin = cell_margin(&params, template, mu);
    let spec = InitialConditionSpec::SingleVelocityKick {
        n: template.n_cars,
        v: template.v,
        epsilon: template.kick_epsilon,
    };
    let leader = LeaderSpec::ConstantVelocity { v: template.v };
    let record = match simulate(&spec, &params, &leader, template.horizon, template.dt, template.stride)
    {
        Ok(r) => r,
        Err(e) => {
            return SweepCell {
                alpha,
                omega,
                analytic_sector: sector,
                i_hat: nan,
                s_hat: nan,
                growth_slope: nan,
                empirical_label: CellLabel::Inconclusive,
                margin,
                note: Some(format!("simulation failed: {e}")),
            }
        }
    };
    let report = gap_extrema(&record);
    let (slope, mut note) = fit_ray_slope(&record, &params, template, mu);
    // A run whose gaps never leave the numerical-noise band around the
    // lattice spacing is the stationary fixed point; the slope of pure
    // rounding noise carries no information, so label it directly.
    let a = params.equilibrium_spacing(template.v);
    let label = if report.s_hat - report.i_hat <= 1e-9 * a.max(1.0) && report.i_hat > 0.0 {
        CellLabel::Stable
    } else {
        classify_cell(&report, slope, thresholds)
    };
    if label == CellLabel::Inconclusive && note.is_none() && slope.is_nan() {
        note = Some("growth slope unavailable".into());
    }
    SweepCell {
        alpha,
        omega,
        analytic_sector: sector,
        i_hat: report.i_hat,
        s_hat: report.s_hat,
        growth_slope: slope,
        empirical_label: label,
        margin,
        note,
    }
}

/// Evaluate every grid cell independently and return them in row-major
/// order (outer loop alpha, inner loop omega). Per-cell failures are
/// recorded in the cell's note and label it inconclusive; they never abort
/// the sweep. With `workers = Some(w)` the cells run on a private pool of
/// `w` threads; the output is identical for every worker count.
pub fn run_sweep(
    grid: &SweepGrid,
    template: &SweepTemplate,
    thresholds: &ClassifyThresholds,
    workers: Option<usize>,
) -> Result<Vec<SweepCell>> {
    template.validate()?;
    if !(thresholds.slope_pos > 0.0) || !(thresholds.slope_neg < 0.0) {
        return Err(Error::InvalidParams(format!(
            "thresholds must straddle zero, got ({}, {})",
            thresholds.slope_neg, thresholds.slope_pos
        )));
    }
    let alphas = grid.alpha_values();
    let omegas = grid.omega_values();
    let points: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| omegas.iter().map(move |&w| (a, w)))
        .collect();
    let work = || {
        points
            .par_iter()
            .map(|&(a, w)| evaluate_cell(a, w, template, thresholds))
            .collect::<Vec<_>>()
    };
    match workers {
        None => Ok(work()),
        Some(w) => {
            if w == 0 {
                return Err(Error::InvalidParams("worker count must be at least 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidParams(format!("could not build worker pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

/// Write cells as CSV with a fixed header and 17-significant-digit floats;
/// output bytes depend only on the cell values.
pub fn write_sweep_csv<W: std::io::Write>(cells: &[SweepCell], mut w: W) -> std::io::Result<()> {
    writeln!(w, "alpha,omega,sector,i_hat,s_hat,slope,label,margin")?;
    for c in cells {
        writeln!(
            w,
            "{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            c.alpha,
            c.omega,
            c.analytic_sector.as_str(),
            c.i_hat,
            c.s_hat,
            c.growth_slope,
            c.empirical_label.as_str(),
            c.margin
        )?;
    }
    Ok(())
}
