//! Independent reference solutions used to cross-check the integrator and
//! the closed-form predictions.
//!
//! The centrepiece is a variation-of-constants solver for the gap
//! deviations `x_k = r_k - d`, which satisfy the driven-oscillator cascade
//!
//! ```text
//! x''_k + alpha x'_k + omega^2 x_k = omega^2 x_{k-1},
//! x_0(t) = (z''_0 + alpha z'_0) / omega^2.
//! ```
//!
//! Each stage is solved exactly up to quadrature: homogeneous part from the
//! characteristic roots, plus a convolution of the previous stage with the
//! impulse response, evaluated by composite Simpson quadrature with the
//! exponential kernel folded into the weights (so the scheme is O(n) per
//! stage and never forms a growing exponential). This path shares no code
//! with the Runge-Kutta integrator, which makes their agreement a genuine
//! two-sided check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{build_initial_state, ControlParams, InitialConditionSpec, LeaderSpec};

/// Damping classification of the characteristic polynomial
/// `G(lambda) = lambda^2 + alpha lambda + omega^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingRegime {
    /// `alpha > 2 omega`: two distinct real roots split by `2 gamma`.
    Overdamped { gamma: f64 },
    /// `alpha = 2 omega`: double root at `-alpha/2`.
    Critical,
    /// `alpha < 2 omega`: complex pair oscillating at frequency `tau`.
    Underdamped { tau: f64 },
}

/// Characteristic roots `lambda_+- = -alpha/2 +- sqrt(alpha^2/4 - omega^2)`
/// of `G`, with their damping classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub regime: DampingRegime,
}

impl KernelParams {
    pub fn new(params: &ControlParams) -> Self {
        let half = params.alpha / 2.0;
        let disc = half * half - params.omega * params.omega;
        if disc > 0.0 {
            let gamma = disc.sqrt();
            KernelParams {
                lambda_plus: Complex64::new(-half + gamma, 0.0),
                lambda_minus: Complex64::new(-half - gamma, 0.0),
                regime: DampingRegime::Overdamped { gamma },
            }
        } else if disc == 0.0 {
            KernelParams {
                lambda_plus: Complex64::new(-half, 0.0),
                lambda_minus: Complex64::new(-half, 0.0),
                regime: DampingRegime::Critical,
            }
        } else {
            let tau = (-disc).sqrt();
            KernelParams {
                lambda_plus: Complex64::new(-half, tau),
                lambda_minus: Complex64::new(-half, -tau),
                regime: DampingRegime::Underdamped { tau },
            }
        }
    }
}

/// Validate a uniform grid starting at zero and return its spacing.
fn uniform_spacing(grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::InvalidParams(
            "time grid needs at least two points".into(),
        ));
    }
    if grid[0] != 0.0 {
        return Err(Error::InvalidParams(format!(
            "time grid must start at 0, got {}",
            grid[0]
        )));
    }
    let h = grid[1] - grid[0];
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::NonUniformGrid);
    }
    for w in grid.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
            return Err(Error::NonUniformGrid);
        }
    }
    Ok(h)
}

/// Cumulative quadrature of `W_j = integral_0^{t_j} e^{lambda (t_j - s)}
/// g(s) ds` on a uniform grid of spacing `h`.
///
/// Composite Simpson over the even prefix; odd endpoints close with a 3/8
/// block; the first interval uses one-sided cubic (or quadratic/trapezoid
/// when the grid is that short) interpolation weights. All kernel factors
/// appear as `e^{lambda (t_j - s_i)}` with `Re(lambda) <= 0` expected, so
/// nothing in the accumulation can overflow, and the whole family
/// `{W_j}` costs O(n).
fn folded_exponential_integrals(lambda: Complex64, g: &[f64], h: f64) -> Vec<Complex64> {
    let n = g.len();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    if n < 2 {
        return w;
    }
    let e1 = (lambda * h).exp();
    let e2 = (lambda * (2.0 * h)).exp();
    let e3 = (lambda * (3.0 * h)).exp();

    // First interval [0, h]: one-sided polynomial weights of the highest
    // order the grid affords.
    w[1] = if n >= 4 {
        let em1 = (-lambda * h).exp();
        let em2 = (-lambda * (2.0 * h)).exp();
        h * (e1 * (3.0 / 8.0) * g[0] + (19.0 / 24.0) * g[1] - em1 * (5.0 / 24.0) * g[2]
            + em2 * (1.0 / 24.0) * g[3])
    } else if n == 3 {
        let em1 = (-lambda * h).exp();
        h * (e1 * (5.0 / 12.0) * g[0] + (8.0 / 12.0) * g[1] - em1 * (1.0 / 12.0) * g[2])
    } else {
        h * 0.5 * (e1 * g[0] + g[1])
    };

    // Running composite-Simpson value for the latest even index.
    let mut a_even = vec![Complex64::new(0.0, 0.0); n];
    let third = h / 3.0;
    for j in (2..n).step_by(2) {
        a_even[j] = e2 * (a_even[j - 2] + third * g[j - 2])
            + third * (4.0 * e1 * g[j - 1] + g[j]);
        w[j] = a_even[j];
    }
    // Odd indices >= 3: Simpson up to j-3, then a 3/8 block.
    let c38 = 3.0 * h / 8.0;
    for j in (3..n).step_by(2) {
        w[j] = e3 * a_even[j - 3]
            + c38 * (e3 * g[j - 3] + 3.0 * e2 * g[j - 2] + 3.0 * e1 * g[j - 1] + g[j]);
    }
    w
}

/// Solve one cascade stage by variation of constants: given the previous
/// stage `x_prev` sampled on `grid` (uniform, starting at 0) and the
/// stage's initial data `(x0, xdot0)`, return the stage solution on the
/// same grid.
pub fn vc_solve_next(
    x_prev: &[f64],
    x0: f64,
    xdot0: f64,
    params: &ControlParams,
    grid: &[f64],
) -> Result<Vec<f64>> {
    if x_prev.len() != grid.len() {
        return Err(Error::InvalidParams(format!(
            "x_prev has {} samples but the grid has {}",
            x_prev.len(),
            grid.len()
        )));
    }
    if !(x0.is_finite() && xdot0.is_finite()) {
        return Err(Error::InvalidInitialCondition(format!(
            "initial data must be finite, got ({x0}, {xdot0})"
        )));
    }
    let h = uniform_spacing(grid)?;
    let kernel = KernelParams::new(params);
    let w2 = params.omega * params.omega;
    let half = params.alpha / 2.0;
    let n = grid.len();
    let mut out = vec![0.0; n];

    match kernel.regime {
        DampingRegime::Overdamped { gamma } => {
            let lp = kernel.lambda_plus.re;
            let lm = kernel.lambda_minus.re;
            let cp = (xdot0 - lm * x0) / (2.0 * gamma);
            let cm = (lp * x0 - xdot0) / (2.0 * gamma);
            let wp = folded_exponential_integrals(kernel.lambda_plus, x_prev, h);
            let wm = folded_exponential_integrals(kernel.lambda_minus, x_prev, h);
            for j in 0..n {
                let t = grid[j];
                let hom = cp * (lp * t).exp() + cm * (lm * t).exp();
                let conv = (wp[j].re - wm[j].re) / (2.0 * gamma);
                out[j] = hom + w2 * conv;
            }
        }
        DampingRegime::Underdamped { tau } => {
            let wp = folded_exponential_integrals(kernel.lambda_plus, x_prev, h);
            for j in 0..n {
                let t = grid[j];
                let decay = (-half * t).exp();
                let hom = decay * (x0 * (tau * t).cos() + (xdot0 + half * x0) / tau * (tau * t).sin());
                out[j] = hom + w2 * wp[j].im / tau;
            }
        }
        DampingRegime::Critical => {
            let lambda = Complex64::new(-half, 0.0);
            let sg: Vec<f64> = grid.iter().zip(x_prev).map(|(s, g)| s * g).collect();
            let wg = folded_exponential_integrals(lambda, x_prev, h);
            let wsg = folded_exponential_integrals(lambda, &sg, h);
            for j in 0..n {
                let t = grid[j];
                let hom = (-half * t).exp() * (x0 + (xdot0 + half * x0) * t);
                // Kernel (t - s) e^{lambda (t - s)} split into t*K0 - s*K0.
                let conv = t * wg[j].re - wsg[j].re;
                out[j] = hom + w2 * conv;
            }
        }
    }
    Ok(out)
}

/// Solve the whole cascade for a scenario: sample the leader's virtual gap
/// `x_0`, take each car's `(x_k(0), x'_k(0))` from the built initial state,
/// and chain `vc_solve_next`. Returns one sample vector per car `1..=N`.
pub fn vc_chain(
    spec: &InitialConditionSpec,
    params: &ControlParams,
    leader: &LeaderSpec,
    grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    uniform_spacing(grid)?;
    let state = build_initial_state(spec, params, leader)?;
    let n = state.n_cars();
    let x0_samples: Vec<f64> = grid.iter().map(|&t| leader.virtual_gap(t, params)).collect();
    let mut prev = x0_samples;
    let mut stages = Vec::with_capacity(n);
    for k in 1..=n {
        let xk0 = state.z[k - 1] - state.z[k] - params.d;
        let xdk0 = state.v[k - 1] - state.v[k];
        let stage = vc_solve_next(&prev, xk0, xdk0, params, grid)?;
        stages.push(stage);
        prev = stages.last().unwrap().clone();
    }
    Ok(stages)
}

/// Undamped first-car gap deviation under a unit sinusoidal drive: the
/// solution of `x'' + omega^2 x = sin(omega0 t)` with zero initial data,
/// `(sin(omega0 t) - (omega0/omega) sin(omega t)) / (omega^2 - omega0^2)`.
///
/// At `omega0 = omega` no bounded closed form exists (the first car
/// resonates) and the call is rejected.
pub fn resonance_x1(t: f64, omega: f64, omega0: f64) -> Result<f64> {
    if !(omega > 0.0 && omega0 > 0.0) {
        return Err(Error::InvalidParams(format!(
            "frequencies must be positive, got omega = {omega}, omega0 = {omega0}"
        )));
    }
    if omega == omega0 {
        return Err(Error::FirstParticleResonance { omega });
    }
    Ok(((omega0 * t).sin() - (omega0 / omega) * (omega * t).sin()) / (omega * omega - omega0 * omega0))
}

/// Uniform-in-time-and-index bound for the cascade deviations when
/// `alpha > 2 omega`: if `sup_t |x_0| <= x0_sup`, `sup_k |x_k(0)| <=
/// init_sup`, and `sup_k |x'_k(0)| <= init_rate_sup`, then every `|x_k(t)|`
/// is at most `max{x0_sup, (alpha init_sup + 2 init_rate_sup) /
/// sqrt(alpha^2 - 4 omega^2)}`.
pub fn lemma_bound(
    x0_sup: f64,
    init_sup: f64,
    init_rate_sup: f64,
    params: &ControlParams,
) -> Result<f64> {
    for (v, name) in [
        (x0_sup, "x0_sup"),
        (init_sup, "init_sup"),
        (init_rate_sup, "init_rate_sup"),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "{name} must be finite and non-negative, got {v}"
            )));
        }
    }
    let half = params.alpha / 2.0;
    let disc = half * half - params.omega * params.omega;
    if disc <= 0.0 {
        return Err(Error::SectorRequirement(format!(
            "the cascade bound requires alpha > 2 omega, got alpha = {}, omega = {}",
            params.alpha, params.omega
        )));
    }
    let two_gamma = 2.0 * disc.sqrt();
    Ok(x0_sup.max((params.alpha * init_sup + 2.0 * init_rate_sup) / two_gamma))
}

/// Bound for the supremum over `t >= 0` of `f(t) = a e^{lambda_+ t} +
/// b e^{lambda_- t} + c` with `lambda_- < lambda_+ < 0`, `b >= 0`, `c > 0`:
/// returns `max{c, a + b + c}`.
///
/// This controls the signed supremum (the function's largest value); for
/// strongly negative `a` the magnitude `|f(0)|` can exceed it.
pub fn f_t_max_bound(
    a: f64,
    b: f64,
    c: f64,
    lambda_plus: f64,
    lambda_minus: f64,
) -> Result<f64> {
    if !(lambda_minus < lambda_plus && lambda_plus < 0.0) {
        return Err(Error::InvalidParams(format!(
            "rates must satisfy lambda_minus < lambda_plus < 0, got {lambda_minus}, {lambda_plus}"
        )));
    }
    if !(b >= 0.0 && c > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParams(format!(
            "coefficients must satisfy b >= 0, c > 0, got a = {a}, b = {b}, c = {c}"
        )));
    }
    Ok(c.max(a + b + c))
}

/// Closed-form mean chain length per car in the infinite-chain limit:
/// `L(t) = L0 + (1 - e^{-alpha t}) L0dot / alpha`.
pub fn mean_length_law(l0: f64, l0_dot: f64, alpha: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParams(format!("alpha must be positive, got {alpha}")));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidParams(format!("t must be non-negative, got {t}")));
    }
    Ok(l0 + (1.0 - (-alpha * t).exp()) / alpha * l0_dot)
}

/// Current of the stationary flow at cruising speed `v`:
/// `v / a = omega^2 v / (omega^2 d + alpha v)`.
pub fn stationary_current(params: &ControlParams, v: f64) -> Result<f64> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::InvalidParams(format!("v must be non-negative, got {v}")));
    }
    let w2 = params.omega * params.omega;
    Ok(w2 * v / (w2 * params.d + params.alpha * v))
}
