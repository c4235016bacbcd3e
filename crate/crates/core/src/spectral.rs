//! Stability margins, the spectrum of the chain operator, and the
//! saddle-point growth asymptotics along rays `t = mu k`.
//!
//! The margin functions package the sufficient conditions under which the
//! gap corridor `[lower, upper]` is guaranteed for all cars and all time:
//! three for the stable sector `alpha > 2 omega` (lattice perturbations,
//! velocity relaxation, and gap-only initial data) and two for the
//! restricted sector `sqrt(2) omega <= alpha <= 2 omega` (summable
//! perturbations). The spectrum functions characterise the closed set
//! `|z^2 + alpha z + omega^2| <= omega^2` reached by the infinite chain's
//! generator, and the saddle functions evaluate the oscillatory growth
//! envelope that makes the sector `alpha < sqrt(2) omega` unstable.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ControlParams, LeaderSpec, SectorClass};

/// A dimensionless stability margin together with the gap corridor it
/// guarantees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginReport {
    /// The margin value (the smallness quantity of the respective bound).
    pub margin: f64,
    /// Whether the smallness hypothesis of the bound is satisfied.
    pub hypothesis_ok: bool,
    /// Guaranteed infimum of all gaps over all time (may be non-positive
    /// when the hypothesis fails).
    pub lower: f64,
    /// Guaranteed supremum of all gaps over all time.
    pub upper: f64,
}

fn check_nonneg(value: f64, name: &str) -> Result<()> {
    if !(value.is_finite() && value >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "{name} must be finite and non-negative, got {value}"
        )));
    }
    Ok(())
}

/// The factor `sqrt(1 - (2 omega / alpha)^2)` that discounts perturbations
/// in the stable sector; errors unless `alpha > 2 omega`.
fn stable_sector_factor(params: &ControlParams) -> Result<f64> {
    if params.sector() != SectorClass::Stable {
        return Err(Error::SectorRequirement(format!(
            "requires alpha > 2 omega, got alpha = {}, omega = {}",
            params.alpha, params.omega
        )));
    }
    let ratio = 2.0 * params.omega / params.alpha;
    Ok((1.0 - ratio * ratio).sqrt())
}

fn require_restricted(params: &ControlParams) -> Result<()> {
    if params.sector() != SectorClass::Restricted {
        return Err(Error::SectorRequirement(format!(
            "requires sqrt(2) omega <= alpha <= 2 omega, got alpha = {}, omega = {}",
            params.alpha, params.omega
        )));
    }
    Ok(())
}

/// Margin for near-lattice initial data under a leader that stays within
/// `delta * a` of uniform motion at speed `v`.
///
/// Hypotheses: `|z_k(0) + k a| <= theta a`, `|z'_k(0) - v| <= beta v`, and
/// `sup_t |z_0(t) - v t| <= delta a` with `delta < 1/2`. Returns
/// `epsilon = 2 max{delta, (theta + 2 v beta / (alpha a)) / sqrt(1 - (2
/// omega / alpha)^2)}`; when `epsilon < 1` every gap stays within
/// `(1 +- epsilon) a`.
pub fn margin_theorem1(
    theta: f64,
    beta: f64,
    delta: f64,
    params: &ControlParams,
    v: f64,
) -> Result<MarginReport> {
    check_nonneg(theta, "theta")?;
    check_nonneg(beta, "beta")?;
    check_nonneg(delta, "delta")?;
    check_nonneg(v, "v")?;
    if delta >= 0.5 {
        return Err(Error::InvalidParams(format!(
            "delta must be < 1/2, got {delta}"
        )));
    }
    let factor = stable_sector_factor(params)?;
    let a = params.equilibrium_spacing(v);
    let epsilon = 2.0 * delta.max((theta + 2.0 * v * beta / (params.alpha * a)) / factor);
    Ok(MarginReport {
        margin: epsilon,
        hypothesis_ok: epsilon < 1.0,
        lower: (1.0 - epsilon) * a,
        upper: (1.0 + epsilon) * a,
    })
}

/// Margin for the velocity-relaxation bound: leader moving exactly at `v`,
/// near-lattice initial data as in `margin_theorem1`.
///
/// Returns `zeta`, the `delta = 0` case of `margin_theorem1` (the two agree
/// exactly). When `zeta < 1`, gaps stay within `(1 +- zeta) a`, every
/// deviation `z_k(t) - (v t - k a)` decays to zero, and additionally
/// `sup_t |z'_k(t) - v| <= sup_t |z'_0(t) - v|` for every car.
pub fn margin_theorem2_zeta(
    theta: f64,
    beta: f64,
    params: &ControlParams,
    v: f64,
) -> Result<MarginReport> {
    margin_theorem1(theta, beta, 0.0, params, v)
}

/// Margin for gap-only initial data: `(1 - theta) d <= r_k(0) <= (1 +
/// theta) d` and consecutive-velocity differences bounded by `beta_abs`
/// (an absolute speed, unlike the relative `beta` above).
///
/// The leader enters through `d* = (a_max + alpha v_max) / omega^2`; the
/// margin is `eta = max{d*/d, (theta + 2 beta_abs / (alpha d)) / sqrt(1 -
/// (2 omega / alpha)^2)}` and the corridor is `(1 +- eta) d`. The boundary
/// gain `alpha = 2 omega` is admitted only for `theta = beta_abs = 0`,
/// where the corridor `d +- d*` survives.
pub fn margin_theorem3(
    theta: f64,
    beta_abs: f64,
    params: &ControlParams,
    leader: &LeaderSpec,
) -> Result<MarginReport> {
    check_nonneg(theta, "theta")?;
    check_nonneg(beta_abs, "beta_abs")?;
    if theta >= 1.0 {
        return Err(Error::InvalidParams(format!("theta must be < 1, got {theta}")));
    }
    let d_star = params.d_star(leader);
    let on_boundary = params.alpha == 2.0 * params.omega;
    let eta = if on_boundary && theta == 0.0 && beta_abs == 0.0 {
        d_star / params.d
    } else {
        let factor = stable_sector_factor(params)?;
        (d_star / params.d)
            .max((theta + 2.0 * beta_abs / (params.alpha * params.d)) / factor)
    };
    Ok(MarginReport {
        margin: eta,
        hypothesis_ok: eta < 1.0,
        lower: (1.0 - eta) * params.d,
        upper: (1.0 + eta) * params.d,
    })
}

/// Margin for summable lattice perturbations in the restricted sector:
/// `sum_k |z_k(0) + k a| <= theta a`, `sum_k |z'_k(0) - v| <= beta v`, and
/// a leader whose deviation from `v t` has integral `sigma a / omega`.
///
/// Returns `eta = 2 (theta + beta v / (a omega) + sigma)`; gaps stay within
/// `(1 +- 2 eta) a`, and the lower bound is positive (no collisions) iff
/// `theta + beta v / (a omega) + sigma < 1/4`, i.e. `eta < 1/2`.
pub fn margin_theorem4(
    theta: f64,
    beta: f64,
    sigma: f64,
    params: &ControlParams,
    v: f64,
) -> Result<MarginReport> {
    check_nonneg(theta, "theta")?;
    check_nonneg(beta, "beta")?;
    check_nonneg(sigma, "sigma")?;
    check_nonneg(v, "v")?;
    require_restricted(params)?;
    let a = params.equilibrium_spacing(v);
    let eta = 2.0 * (theta + beta * v / (a * params.omega) + sigma);
    Ok(MarginReport {
        margin: eta,
        hypothesis_ok: eta < 0.5,
        lower: (1.0 - 2.0 * eta) * a,
        upper: (1.0 + 2.0 * eta) * a,
    })
}

/// Margin for summable gap perturbations in the restricted sector:
/// `sum_k |r_k(0) - d| <= theta d`, summable consecutive-velocity
/// differences with total `beta_abs`, and a leader whose combined
/// acceleration-plus-damped-velocity signal has integral `sigma d omega`.
///
/// Returns `eta = 2 (theta + beta_abs / (omega d) + sigma)`; gaps stay
/// within `d (1 +- eta)`, with a positive lower bound iff the inner sum is
/// below `1/2`.
pub fn margin_theorem5(
    theta: f64,
    beta_abs: f64,
    sigma: f64,
    params: &ControlParams,
) -> Result<MarginReport> {
    check_nonneg(theta, "theta")?;
    check_nonneg(beta_abs, "beta_abs")?;
    check_nonneg(sigma, "sigma")?;
    require_restricted(params)?;
    let eta = 2.0 * (theta + beta_abs / (params.omega * params.d) + sigma);
    Ok(MarginReport {
        margin: eta,
        hypothesis_ok: eta < 1.0,
        lower: (1.0 - eta) * params.d,
        upper: (1.0 + eta) * params.d,
    })
}

/// Membership in the spectrum of the infinite-chain generator: the closed
/// set `|z^2 + alpha z + omega^2| <= omega^2`.
pub fn in_spectrum(z: Complex64, params: &ControlParams) -> bool {
    let w2 = params.omega * params.omega;
    let g = z * z + params.alpha * z + w2;
    g.norm_sqr() <= w2 * w2
}

/// The quartic `h(a, b) = b^4 + A b^2 + B` whose non-positivity at
/// `z = a + i b` is equivalent to `in_spectrum`, with
/// `A = 2a^2 + 2 alpha a + alpha^2 - 2 omega^2` and
/// `B = a (a + alpha) (a^2 + alpha a + 2 omega^2)`.
pub fn spectrum_quartic(a: f64, b: f64, params: &ControlParams) -> f64 {
    let (al, w) = (params.alpha, params.omega);
    let qa = 2.0 * a * a + 2.0 * al * a + al * al - 2.0 * w * w;
    let qb = a * (a + al) * (a * a + al * a + 2.0 * w * w);
    let b2 = b * b;
    b2 * b2 + qa * b2 + qb
}

/// Grid scan for a spectrum point with positive real part over
/// `Re in (0, box], Im in [-box, box]` at the given resolution. Returns the
/// first hit in column-major order (ascending real part), or none — which
/// the sector dichotomy guarantees whenever `alpha >= sqrt(2) omega`.
pub fn spectrum_positive_real_witness(
    params: &ControlParams,
    box_size: f64,
    resolution: f64,
) -> Option<Complex64> {
    if !(resolution > 0.0 && box_size > 0.0) {
        return None;
    }
    let cols = (box_size / resolution).floor() as usize;
    let rows = (2.0 * box_size / resolution).floor() as usize;
    for i in 1..=cols {
        let re = i as f64 * resolution;
        for j in 0..=rows {
            let im = -box_size + j as f64 * resolution;
            let z = Complex64::new(re, im);
            if in_spectrum(z, params) {
                return Some(z);
            }
        }
    }
    None
}

/// The exponent function `S(z) = mu z - ln(z^2 + alpha z + omega^2) +
/// ln(omega^2)` governing growth along the ray `t = mu k`, with the
/// principal branch of the logarithm (arguments in `(-pi, pi]`).
pub fn s_function(z: Complex64, mu: f64, params: &ControlParams) -> Complex64 {
    let w2 = params.omega * params.omega;
    mu * z - (z * z + params.alpha * z + w2).ln() + w2.ln()
}

/// Saddle-point data for the deviation asymptotics along the ray `t = mu k`:
/// `q_{k+1}(mu k) ~ (c / sqrt(k)) e^{k f} sin(Omega k + phi0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleData {
    /// Ray slope (time per car index).
    pub mu: f64,
    /// `tau = sqrt(omega^2 - alpha^2/4)`.
    pub tau: f64,
    /// `nu = sqrt(mu^2 tau^2 - 1)`.
    pub nu: f64,
    /// Saddle points `-alpha/2 + 1/mu +- i nu / mu`.
    pub z_plus: Complex64,
    pub z_minus: Complex64,
    /// Exponential growth rate per index along the ray.
    pub f: f64,
    /// Phase offset `phi0 = arctan(nu)`.
    pub phi0: f64,
    /// Phase increment per index `Omega = nu - arctan(nu)`.
    pub omega_inc: f64,
    /// Signed amplitude prefactor, proportional to the velocity kick.
    pub c: f64,
    /// Second derivative of the exponent function at `z_plus`:
    /// `nu (nu + i) / tau^2`, of modulus `nu mu / tau`.
    pub spp_plus: Complex64,
}

/// Evaluate the saddle-point quantities for ray slope `mu` and a velocity
/// kick of size `epsilon` on the first car.
///
/// Requires `alpha < 2 omega` (so `tau` is real) and `mu tau > 1` (so the
/// two saddle points are genuinely complex).
pub fn saddle_analysis(mu: f64, params: &ControlParams, epsilon: f64) -> Result<SaddleData> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidParams(format!("mu must be positive, got {mu}")));
    }
    if !epsilon.is_finite() {
        return Err(Error::InvalidParams(format!("epsilon must be finite, got {epsilon}")));
    }
    let (al, w) = (params.alpha, params.omega);
    if al >= 2.0 * w {
        return Err(Error::SectorRequirement(format!(
            "saddle analysis requires alpha < 2 omega, got alpha = {al}, omega = {w}"
        )));
    }
    let tau = (w * w - al * al / 4.0).sqrt();
    if mu * tau <= 1.0 {
        return Err(Error::OutOfRange(format!(
            "ray slope must satisfy mu tau > 1, got mu tau = {}",
            mu * tau
        )));
    }
    let nu = (mu * mu * tau * tau - 1.0).sqrt();
    let re = -al / 2.0 + 1.0 / mu;
    let z_plus = Complex64::new(re, nu / mu);
    let z_minus = Complex64::new(re, -nu / mu);
    let f = -al * mu / 2.0 + 1.0 - (2.0 * tau / (mu * w * w)).ln();
    let phi0 = nu.atan();
    let omega_inc = nu - phi0;
    let c = epsilon * (2.0 * tau / (std::f64::consts::PI * nu * mu)).sqrt();
    let tau2 = tau * tau;
    let spp_plus = Complex64::new(nu * nu / tau2, nu / tau2);
    Ok(SaddleData { mu, tau, nu, z_plus, z_minus, f, phi0, omega_inc, c, spp_plus })
}

/// Growth rate at the critical ray slope `mu = 1/tau`, as a function of
/// `x = alpha / (2 omega)`: `h(x) = 1 - ln 2 - x / sqrt(1 - x^2) -
/// ln(1 - x^2)`, strictly decreasing on `[0, 1)` with `h(1/sqrt(2)) = 0` —
/// the growth rate changes sign exactly at `alpha = sqrt(2) omega`.
pub fn h_function(x: f64) -> Result<f64> {
    if !(x.is_finite() && (0.0..1.0).contains(&x)) {
        return Err(Error::OutOfRange(format!("h is defined on [0, 1), got {x}")));
    }
    let one_minus = 1.0 - x * x;
    Ok(1.0 - std::f64::consts::LN_2 - x / one_minus.sqrt() - one_minus.ln())
}

/// Predicted deviation of car `k + 1` at time `mu k`:
/// `(c / sqrt(k)) e^{k f} sin(Omega k + phi0)`. Requires `k >= 1`.
pub fn asymptotic_envelope(k: usize, data: &SaddleData) -> f64 {
    debug_assert!(k >= 1, "the ray asymptotics start at k = 1");
    let kf = k as f64;
    data.c / kf.sqrt() * (kf * data.f).exp() * (data.omega_inc * kf + data.phi0).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn p(alpha: f64, omega: f64, d: f64) -> ControlParams {
        ControlParams::new(alpha, omega, d).unwrap()
    }

    #[test]
    fn margin1_examples() {
        let params = p(4.0, 1.0, 1.0);
        let zero = margin_theorem1(0.0, 0.0, 0.0, &params, 1.0).unwrap();
        assert_eq!(zero.margin, 0.0);
        assert!(zero.hypothesis_ok);
        assert_eq!(zero.lower, 5.0);
        assert_eq!(zero.upper, 5.0);

        let leader_only = margin_theorem1(0.0, 0.0, 0.3, &params, 1.0).unwrap();
        assert_relative_eq!(leader_only.margin, 0.6, max_relative = 1e-15);

        let lattice = margin_theorem1(0.1, 0.0, 0.0, &params, 1.0).unwrap();
        assert_relative_eq!(lattice.margin, 0.2309401076758503, max_relative = 1e-14);
        assert!(lattice.hypothesis_ok);
        assert_relative_eq!(lattice.lower, 5.0 * (1.0 - 0.2309401076758503), max_relative = 1e-14);
    }

    #[test]
    fn margin1_rejects_bad_inputs() {
        let params = p(4.0, 1.0, 1.0);
        assert!(margin_theorem1(0.1, 0.0, 0.5, &params, 1.0).is_err());
        assert!(margin_theorem1(-0.1, 0.0, 0.0, &params, 1.0).is_err());
        let boundary = p(2.0, 1.0, 1.0);
        assert!(matches!(
            margin_theorem1(0.0, 0.0, 0.0, &boundary, 1.0),
            Err(Error::SectorRequirement(_))
        ));
    }

    #[test]
    fn margin2_matches_margin1_at_zero_delta() {
        let params = p(4.0, 1.0, 1.0);
        let zeta = margin_theorem2_zeta(0.0, 0.1, &params, 1.0).unwrap();
        // a = 5: zeta = 2 (2 * 1 * 0.1 / (4 * 5)) / sqrt(3)/2.
        assert_relative_eq!(zeta.margin, 0.02309401076758503, max_relative = 1e-14);
        for (theta, beta) in [(0.0, 0.0), (0.05, 0.2), (0.3, 0.1)] {
            let m1 = margin_theorem1(theta, beta, 0.0, &params, 1.0).unwrap();
            let m2 = margin_theorem2_zeta(theta, beta, &params, 1.0).unwrap();
            assert_eq!(m1, m2);
        }
    }

    #[test]
    fn margin3_examples() {
        let params = p(4.0, 1.0, 1.0);
        let still = margin_theorem3(0.0, 0.0, &params, &LeaderSpec::ConstantVelocity { v: 1.0 })
            .unwrap();
        assert_eq!(still.margin, 0.0);

        // Sinusoid at rest with amplitude 0.1, unit frequency: d* = 0.5.
        let wobble = LeaderSpec::Sinusoid { v: 0.0, amplitude: 0.1, omega0: 1.0 };
        let m = margin_theorem3(0.1, 0.0, &params, &wobble).unwrap();
        assert_relative_eq!(m.margin, 0.5, max_relative = 1e-14);
        assert!(m.hypothesis_ok);
        assert_relative_eq!(m.lower, 0.5, max_relative = 1e-14);
        assert_relative_eq!(m.upper, 1.5, max_relative = 1e-14);
    }

    #[test]
    fn margin3_boundary_gain() {
        let boundary = p(2.0, 1.0, 1.0);
        // d* = 6 for this leader; admitted at the boundary when the initial
        // data is exact, but the hypothesis is violated.
        let big = LeaderSpec::Sinusoid { v: 1.0, amplitude: 0.5, omega0: 2.0 };
        let m = margin_theorem3(0.0, 0.0, &boundary, &big).unwrap();
        assert_relative_eq!(m.margin, 6.0, max_relative = 1e-14);
        assert!(!m.hypothesis_ok);
        // Any perturbation disqualifies the boundary gain.
        assert!(margin_theorem3(0.1, 0.0, &boundary, &big).is_err());
        assert!(margin_theorem3(0.0, 0.1, &boundary, &big).is_err());
    }

    #[test]
    fn margin4_examples() {
        let params = p(1.5, 1.0, 1.0);
        let m = margin_theorem4(0.05, 0.05, 0.0, &params, 1.0).unwrap();
        assert_relative_eq!(m.margin, 0.14, max_relative = 1e-14);
        assert!(m.hypothesis_ok);
        // a = 2.5, corridor (1 +- 2 eta) a.
        assert_relative_eq!(m.lower, 1.8, max_relative = 1e-14);
        assert_relative_eq!(m.upper, 3.2, max_relative = 1e-14);
        assert_eq!(margin_theorem4(0.0, 0.0, 0.0, &params, 1.0).unwrap().margin, 0.0);
        assert!(margin_theorem4(0.05, 0.05, 0.0, &p(1.0, 1.0, 1.0), 1.0).is_err());
        assert!(margin_theorem4(0.05, 0.05, 0.0, &p(2.5, 1.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn margin5_examples() {
        let params = p(1.5, 1.0, 2.0);
        let m = margin_theorem5(0.1, 0.2, 0.05, &params).unwrap();
        assert_relative_eq!(m.margin, 0.5, max_relative = 1e-14);
        assert!(m.hypothesis_ok); // 0.25 < 1/2
        assert_relative_eq!(m.lower, 1.0, max_relative = 1e-14);
        assert_relative_eq!(m.upper, 3.0, max_relative = 1e-14);
    }

    #[test]
    fn spectrum_membership_examples() {
        let params = p(3.0, 1.0, 1.0);
        assert!(in_spectrum(Complex64::new(0.0, 0.0), &params));
        assert!(in_spectrum(Complex64::new(-3.0, 0.0), &params)); // z = -alpha
        assert!(!in_spectrum(Complex64::new(1.0, 0.0), &params));
    }

    #[test]
    fn quartic_agrees_with_membership() {
        let params = p(1.2, 1.0, 1.0);
        for (a, b) in [(0.0, 0.5), (0.1, 0.9), (-0.3, 0.2), (0.5, 0.0), (-1.2, 1.4)] {
            let inside = in_spectrum(Complex64::new(a, b), &params);
            let h = spectrum_quartic(a, b, &params);
            assert_eq!(inside, h <= 0.0, "mismatch at ({a}, {b}): h = {h}");
        }
    }

    #[test]
    fn witness_dichotomy_examples() {
        assert!(spectrum_positive_real_witness(&p(2.0, 1.0, 1.0), 1.0, 0.01).is_none());
        assert!(spectrum_positive_real_witness(&p(1.5, 1.0, 1.0), 1.0, 0.01).is_none());
        let w = spectrum_positive_real_witness(&p(0.5, 1.0, 1.0), 1.0, 0.01)
            .expect("witness must exist below the restricted sector");
        assert!(w.re > 0.0);
        assert!(in_spectrum(w, &p(0.5, 1.0, 1.0)));
        assert!(spectrum_quartic(w.re, w.im, &p(0.5, 1.0, 1.0)) <= 0.0);
    }

    #[test]
    fn saddle_frozen_example() {
        let params = p(0.0, 1.0, 1.0);
        let data = saddle_analysis(2.0, &params, 0.01).unwrap();
        assert_eq!(data.tau, 1.0);
        assert_eq!(data.nu, 3f64.sqrt());
        assert_eq!(data.f, 1.0);
        assert_relative_eq!(data.phi0, PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(data.omega_inc, 0.6848532563722796, max_relative = 1e-14);
        assert_eq!(data.z_plus.re, 0.5);
        assert_relative_eq!(data.z_plus.im, 0.8660254037844386, max_relative = 1e-15);
        assert_eq!(data.z_minus, data.z_plus.conj());
        assert_relative_eq!(data.c, 4.286913790524959e-3, max_relative = 1e-14);
        assert_relative_eq!(data.spp_plus.re, 3.0, max_relative = 1e-14);
        assert_relative_eq!(data.spp_plus.im, 3f64.sqrt(), max_relative = 1e-15);
        // |S''(z_plus)| = nu mu / tau.
        assert_relative_eq!(data.spp_plus.norm(), data.nu * data.mu / data.tau, max_relative = 1e-14);
    }

    #[test]
    fn saddle_rejects_bad_rays() {
        let params = p(1.0, 1.0, 1.0);
        // tau = sqrt(3)/2: mu = 1.0 gives mu tau < 1.
        assert!(matches!(saddle_analysis(1.0, &params, 0.01), Err(Error::OutOfRange(_))));
        assert!(saddle_analysis(2.0, &params, 0.01).is_ok());
        assert!(matches!(
            saddle_analysis(2.0, &p(2.0, 1.0, 1.0), 0.01),
            Err(Error::SectorRequirement(_))
        ));
    }

    #[test]
    fn saddle_roots_solve_the_ray_equation() {
        for (alpha, omega, mu) in [(0.0, 1.0, 2.0), (1.0, 1.0, 2.5), (1.3, 1.0, 1.9)] {
            let params = p(alpha, omega, 1.0);
            let data = saddle_analysis(mu, &params, 1.0).unwrap();
            for z in [data.z_plus, data.z_minus] {
                let residual = mu * z * z
                    + (alpha * mu - 2.0) * z
                    + Complex64::new(omega * omega * mu - alpha, 0.0);
                assert!(residual.norm() < 1e-10, "residual {residual} at ({alpha}, {mu})");
            }
        }
    }

    #[test]
    fn growth_rate_is_real_part_of_exponent_at_saddle() {
        for (alpha, omega, mu) in [(0.0, 1.0, 2.0), (1.0, 1.0, 3.0), (0.4, 0.9, 2.2)] {
            let params = p(alpha, omega, 1.0);
            let data = saddle_analysis(mu, &params, 1.0).unwrap();
            let s = s_function(data.z_plus, mu, &params);
            assert_abs_diff_eq!(data.f, s.re, epsilon = 1e-12);
            assert_abs_diff_eq!(data.omega_inc, s.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn h_function_values() {
        assert_relative_eq!(h_function(0.0).unwrap(), 0.3068528194400547, max_relative = 1e-15);
        assert_abs_diff_eq!(
            h_function(std::f64::consts::FRAC_1_SQRT_2).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert!(h_function(1.0).is_err());
        assert!(h_function(-0.1).is_err());
        assert!(h_function(1.5).is_err());
    }

    #[test]
    fn h_matches_growth_rate_at_critical_ray() {
        // f(1/tau) with x = alpha / (2 omega) equals h(x); compare just
        // above the critical slope where the analysis is defined.
        for alpha in [0.2, 0.8, 1.2] {
            let params = p(alpha, 1.0, 1.0);
            let tau = (1.0 - alpha * alpha / 4.0).sqrt();
            let data = saddle_analysis(1.0 / tau * (1.0 + 1e-9), &params, 1.0).unwrap();
            let h = h_function(alpha / 2.0).unwrap();
            assert_abs_diff_eq!(data.f, h, epsilon = 1e-6);
        }
    }

    #[test]
    fn envelope_composition_and_decay() {
        let params = p(0.0, 1.0, 1.0);
        let data = saddle_analysis(2.0, &params, 0.01).unwrap();
        let k = 10;
        let expected = data.c / (k as f64).sqrt()
            * (k as f64 * data.f).exp()
            * (data.omega_inc * k as f64 + data.phi0).sin();
        assert_eq!(asymptotic_envelope(k, &data), expected);
        assert!((25.0..35.0).contains(&expected), "got {expected}");

        // Decaying regime: large mu in the restricted-adjacent gains.
        let damped = saddle_analysis(6.0, &p(1.0, 1.0, 1.0), 0.01).unwrap();
        assert!(damped.f < 0.0);
        for k in 1..40usize {
            let bound = damped.c.abs() / (k as f64).sqrt() * (k as f64 * damped.f).exp();
            assert!(asymptotic_envelope(k, &damped).abs() <= bound * (1.0 + 1e-12));
        }
    }
}
