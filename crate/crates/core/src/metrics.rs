//! Observables extracted from sampled trajectories: gap corridors, mean
//! chain length, velocity deviations, and ray-growth estimates.

use crate::error::{Error, Result};
use crate::integrator::TrajectoryRecord;

/// Finite-window stability summary of one run. `i_hat`/`s_hat` estimate the
/// all-time infimum/supremum of the gaps over the recorded horizon; no
/// extrapolation beyond the horizon is claimed.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Minimum gap over all cars and samples.
    pub i_hat: f64,
    /// Maximum gap over all cars and samples.
    pub s_hat: f64,
    /// First time a gap crossed zero (interpolated between samples), with
    /// the car index; present exactly when `i_hat < 0`.
    pub first_collision: Option<(f64, usize)>,
    /// `sup |v_k(t) - v|` when the record carries a reference velocity.
    pub velocity_deviation: Option<f64>,
    /// Last recorded sample time.
    pub horizon: f64,
    /// Number of follower cars covered.
    pub n_cars: usize,
}

impl StabilityReport {
    /// Serialize with a fixed field order and floats at 17 significant
    /// digits, so identical runs produce identical bytes.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{");
        out.push_str(&format!("\"i_hat\":{:.16e},", self.i_hat));
        out.push_str(&format!("\"s_hat\":{:.16e},", self.s_hat));
        match self.first_collision {
            Some((t, car)) => {
                out.push_str(&format!("\"first_collision\":{{\"t\":{t:.16e},\"car\":{car}}},"))
            }
            None => out.push_str("\"first_collision\":null,"),
        }
        match self.velocity_deviation {
            Some(dv) => out.push_str(&format!("\"velocity_deviation\":{dv:.16e},")),
            None => out.push_str("\"velocity_deviation\":null,"),
        }
        out.push_str(&format!("\"horizon\":{:.16e},", self.horizon));
        out.push_str(&format!("\"n_cars\":{}", self.n_cars));
        out.push('}');
        out
    }
}

/// Gap extrema and collision summary of a record.
pub fn gap_extrema(record: &TrajectoryRecord) -> StabilityReport {
    let i_hat = record.gap_min.iter().copied().fold(f64::INFINITY, f64::min);
    let s_hat = record.gap_max.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut first_collision = record.first_negative_gap;
    if first_collision.is_none() && i_hat < 0.0 {
        // A gap was already non-positive at a sample without a strict
        // sign change between samples; report the first such sample.
        'scan: for s in 0..record.n_samples() {
            for k in 1..=record.n_cars {
                if record.gap(s, k) < 0.0 {
                    first_collision = Some((record.sample_time(s), k));
                    break 'scan;
                }
            }
        }
    }
    StabilityReport {
        i_hat,
        s_hat,
        first_collision,
        velocity_deviation: record.reference_velocity.map(|v| velocity_deviation(record, v)),
        horizon: record.horizon(),
        n_cars: record.n_cars,
    }
}

/// Mean chain length per car at the sample nearest to `t`: the average of
/// all gaps, `(z_0 - z_N) / N`.
pub fn mean_length(record: &TrajectoryRecord, t: f64) -> f64 {
    let n_samples = record.n_samples();
    let spacing = if n_samples > 1 { record.sample_time(1) - record.sample_time(0) } else { 1.0 };
    let s = ((t / spacing).round() as usize).min(n_samples - 1);
    let n = record.n_cars;
    let sum: f64 = (1..=n).map(|k| record.gap(s, k)).sum();
    sum / n as f64
}

/// Largest deviation of any follower's velocity from `v` over the record.
pub fn velocity_deviation(record: &TrajectoryRecord, v: f64) -> f64 {
    record
        .velocities
        .iter()
        .map(|vk| (vk - v).abs())
        .fold(0.0, f64::max)
}

/// Least-squares estimate of the per-index growth of deviations along the
/// ray `t = mu k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayFit {
    /// Per-index exponential rate of the envelope.
    pub slope: f64,
    /// Fitted value at k = 0 (log amplitude).
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

/// Signed ray samples `q_{k+1}(mu k)` and their envelope values
/// `max_{|j - k| <= 2} |q_{j+1}(mu j)|` for `k` in `[k_lo, k_hi]`, from
/// the samples nearest the ray.
pub fn ray_envelope(
    record: &TrajectoryRecord,
    mu: f64,
    k_lo: usize,
    k_hi: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let devs = record.deviations.as_ref().ok_or_else(|| {
        Error::InvalidParams(
            "record carries no deviations; use an initial-condition family with a reference velocity"
                .into(),
        )
    })?;
    if k_lo < 1 || k_hi < k_lo {
        return Err(Error::OutOfRange(format!(
            "invalid ray index range [{k_lo}, {k_hi}]"
        )));
    }
    if k_hi - k_lo + 1 < 10 {
        return Err(Error::InsufficientData(format!(
            "ray fit needs at least 10 indices, got {}",
            k_hi - k_lo + 1
        )));
    }
    if record.n_samples() < 2 {
        return Err(Error::InsufficientData("record has fewer than 2 samples".into()));
    }
    let spacing = record.sample_time(1) - record.sample_time(0);
    let n = record.n_cars;
    let mut signed = Vec::with_capacity(k_hi - k_lo + 1);
    for k in k_lo..=k_hi {
        if k + 1 > n {
            return Err(Error::OutOfRange(format!(
                "ray index {k} requires car {} but the record has {n}",
                k + 1
            )));
        }
        let s = (mu * k as f64 / spacing).round() as usize;
        if s >= record.n_samples() {
            return Err(Error::OutOfRange(format!(
                "ray time {} exceeds the recorded horizon {}",
                mu * k as f64,
                record.horizon()
            )));
        }
        signed.push(devs[s * n + k]); // car k+1 has column index k
    }
    let m = signed.len();
    let mut envelope = Vec::with_capacity(m);
    for i in 0..m {
        let lo = i.saturating_sub(2);
        let hi = (i + 2).min(m - 1);
        let w = signed[lo..=hi].iter().fold(0.0f64, |acc, q| acc.max(q.abs()));
        envelope.push(w);
    }
    Ok((signed, envelope))
}

/// Fit `ln(envelope_k sqrt(k)) ~ slope * k + intercept` over
/// `k in [k_lo, k_hi]`, where the envelope is the window-5 local maximum of
/// `|q_{k+1}(mu k)|`. The slope estimates the ray's growth rate.
///
/// Envelope values are clamped below at 1e-280 so fully decayed rays
/// produce a finite, strongly negative slope instead of `-inf`.
pub fn ray_growth_fit(
    record: &TrajectoryRecord,
    mu: f64,
    k_lo: usize,
    k_hi: usize,
) -> Result<RayFit> {
    let (_, envelope) = ray_envelope(record, mu, k_lo, k_hi)?;
    let m = envelope.len();
    let ys: Vec<f64> = envelope
        .iter()
        .enumerate()
        .map(|(i, &e)| e.max(1e-280).ln() + 0.5 * ((k_lo + i) as f64).ln())
        .collect();
    let xs: Vec<f64> = (k_lo..=k_hi).map(|k| k as f64).collect();
    let mf = m as f64;
    let x_mean = xs.iter().sum::<f64>() / mf;
    let y_mean = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(RayFit { slope, intercept, residual: (ss / mf).sqrt() })
}

/// Estimate the per-index phase increment of the deviation oscillation
/// along the ray `t = mu k` from the spacing of its sign changes: with
/// crossings `c_1 < ... < c_M` (linearly interpolated in `k`), the
/// increment is `pi (M - 1) / (c_M - c_1)`.
pub fn ray_phase_increment(
    record: &TrajectoryRecord,
    mu: f64,
    k_lo: usize,
    k_hi: usize,
) -> Result<f64> {
    let (signed, _) = ray_envelope(record, mu, k_lo, k_hi)?;
    let mut crossings = Vec::new();
    for i in 0..signed.len() - 1 {
        let (a, b) = (signed[i], signed[i + 1]);
        if a * b < 0.0 {
            crossings.push((k_lo + i) as f64 + a / (a - b));
        }
    }
    if crossings.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "phase estimate needs at least 2 sign changes, got {}",
            crossings.len()
        )));
    }
    let first = crossings[0];
    let last = crossings[crossings.len() - 1];
    Ok(std::f64::consts::PI * (crossings.len() - 1) as f64 / (last - first))
}
