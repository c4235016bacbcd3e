//! Model definition for a one-way chain of cars with local linear control.
//!
//! Car `k` (k = 1..N) accelerates according to
//!
//! ```text
//! z''_k = omega^2 * (z_{k-1} - z_k - d) - alpha * z'_k
//! ```
//!
//! i.e. it steers toward a target gap `d` behind its predecessor with spring
//! constant `omega^2` and velocity damping `alpha`; the leader `z_0(t)` is
//! prescribed externally and never reacts to the chain. When every car moves
//! at speed `v`, the gap settles at the equilibrium spacing
//! `a = d + alpha * v / omega^2`.
//!
//! The quarter-plane of gains splits into three sectors with qualitatively
//! different chain behaviour:
//!
//! * `alpha > 2 omega` — perturbations stay bounded under mere sup-norm
//!   assumptions on the initial data (strong damping);
//! * `sqrt(2) omega <= alpha <= 2 omega` — boundedness still holds, but only
//!   under summable (l1) smallness of the initial perturbations;
//! * `alpha < sqrt(2) omega` — arbitrarily small local perturbations grow
//!   without bound as they propagate down an infinite chain.

use crate::error::{Error, Result};
use crate::spectral;

/// Square root of two, used by the sector boundaries.
pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Gains and target gap of the local control law.
///
/// Invariants enforced by [`ControlParams::new`]: `alpha >= 0`, `omega > 0`,
/// `d > 0`, all finite. `alpha = 0` (no damping) is admitted because the
/// undamped chain is the canonical resonance example; operations whose
/// formulas require `alpha > 0` validate that themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams {
    pub alpha: f64,
    pub omega: f64,
    pub d: f64,
}

/// Stability sector of the `(alpha, omega)` quarter-plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorClass {
    /// `alpha > 2 omega`: bounded under sup-norm small data.
    Stable,
    /// `sqrt(2) omega <= alpha <= 2 omega`: bounded under summable data.
    Restricted,
    /// `alpha < sqrt(2) omega`: unbounded growth down the chain.
    Unstable,
}

impl SectorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SectorClass::Stable => "stable",
            SectorClass::Restricted => "restricted",
            SectorClass::Unstable => "unstable",
        }
    }
}

impl ControlParams {
    pub fn new(alpha: f64, omega: f64, d: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidParams(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "omega must be finite and > 0, got {omega}"
            )));
        }
        if !d.is_finite() || d <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "d must be finite and > 0, got {d}"
            )));
        }
        Ok(Self { alpha, omega, d })
    }

    /// Equilibrium spacing `a = d + alpha * v / omega^2` of a chain cruising
    /// at speed `v`. Monotone in `v` and `>= d` for `v >= 0`.
    pub fn equilibrium_spacing(&self, v: f64) -> f64 {
        self.d + self.alpha * v / (self.omega * self.omega)
    }

    /// Classify the gains into their stability sector. The comparisons are
    /// exact: boundary pairs `alpha = 2 omega` and `alpha = sqrt(2) omega`
    /// belong to the Restricted sector.
    pub fn sector(&self) -> SectorClass {
        if self.alpha > 2.0 * self.omega {
            SectorClass::Stable
        } else if self.alpha >= SQRT_2 * self.omega {
            SectorClass::Restricted
        } else {
            SectorClass::Unstable
        }
    }

    /// Disturbance length `d* = (a_max + alpha * v_max) / omega^2` induced by
    /// a leader whose manoeuvring envelope is `|acceleration| <= a_max`,
    /// `|velocity| <= v_max`. This is the amount by which leader manoeuvres
    /// can displace the gaps from the target `d`.
    pub fn d_star_from_bounds(&self, v_max: f64, a_max: f64) -> f64 {
        (a_max + self.alpha * v_max) / (self.omega * self.omega)
    }

    /// [`Self::d_star_from_bounds`] applied to a leader specification's own
    /// manoeuvre envelope (see [`LeaderSpec::maneuver_bounds`] for the
    /// constant-velocity recentring convention).
    pub fn d_star(&self, leader: &LeaderSpec) -> f64 {
        let (v_max, a_max) = leader.maneuver_bounds();
        self.d_star_from_bounds(v_max, a_max)
    }
}

/// Prescribed leader trajectory `z_0(t)`.
///
/// Every variant starts at `z_0(0) = 0` so that lattice initial conditions
/// can be built directly below the leader.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeaderSpec {
    /// `z_0(t) = v t`.
    ConstantVelocity { v: f64 },
    /// `z_0(t) = v t + amplitude * sin(omega0 t)`.
    Sinusoid { v: f64, amplitude: f64, omega0: f64 },
    /// Raised-cosine bump train `z_0(t) = v t + amplitude * (1 - cos(omega0 t)) / 2`.
    ///
    /// A smooth bounded deviation profile with exact sup-norms:
    /// `|z_0 - v t| <= amplitude`, `sup |z_0' - v| = amplitude * omega0 / 2`,
    /// `sup |z_0''| = amplitude * omega0^2 / 2`.
    BoundedDeviation { v: f64, amplitude: f64, omega0: f64 },
}

impl LeaderSpec {
    /// Bounded-deviation constructor in terms of a deviation *fraction* of the
    /// equilibrium spacing `a`: the bump amplitude is `delta_frac * a`.
    pub fn bounded_deviation(v: f64, delta_frac: f64, a: f64, omega0: f64) -> Self {
        LeaderSpec::BoundedDeviation { v, amplitude: delta_frac * a, omega0 }
    }

    pub fn validate(&self) -> Result<()> {
        let (v, ok) = match *self {
            LeaderSpec::ConstantVelocity { v } => (v, true),
            LeaderSpec::Sinusoid { v, amplitude, omega0 }
            | LeaderSpec::BoundedDeviation { v, amplitude, omega0 } => {
                (v, amplitude.is_finite() && amplitude >= 0.0 && omega0.is_finite() && omega0 > 0.0)
            }
        };
        if !v.is_finite() || !ok {
            return Err(Error::InvalidLeader(format!(
                "leader fields must be finite, amplitude >= 0, omega0 > 0: {self:?}"
            )));
        }
        Ok(())
    }

    /// Exact position, velocity and acceleration of the leader at time `t`.
    pub fn kinematics(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            LeaderSpec::ConstantVelocity { v } => (v * t, v, 0.0),
            LeaderSpec::Sinusoid { v, amplitude, omega0 } => {
                let (s, c) = (omega0 * t).sin_cos();
                (
                    v * t + amplitude * s,
                    v + amplitude * omega0 * c,
                    -amplitude * omega0 * omega0 * s,
                )
            }
            LeaderSpec::BoundedDeviation { v, amplitude, omega0 } => {
                let (s, c) = (omega0 * t).sin_cos();
                (
                    v * t + amplitude * (1.0 - c) / 2.0,
                    v + amplitude * omega0 * s / 2.0,
                    amplitude * omega0 * omega0 * c / 2.0,
                )
            }
        }
    }

    /// The cruising speed `v` around which the trajectory oscillates.
    pub fn reference_velocity(&self) -> f64 {
        match *self {
            LeaderSpec::ConstantVelocity { v }
            | LeaderSpec::Sinusoid { v, .. }
            | LeaderSpec::BoundedDeviation { v, .. } => v,
        }
    }

    /// Manoeuvre envelope `(sup |z_0'|, sup |z_0''|)` that feeds
    /// [`ControlParams::d_star`]. A constant-velocity leader is recentred to
    /// its comoving frame (where it is stationary), so its envelope is
    /// `(0, 0)`; oscillating leaders report raw suprema.
    pub fn maneuver_bounds(&self) -> (f64, f64) {
        match *self {
            LeaderSpec::ConstantVelocity { .. } => (0.0, 0.0),
            LeaderSpec::Sinusoid { v, amplitude, omega0 } => {
                (v.abs() + amplitude * omega0, amplitude * omega0 * omega0)
            }
            LeaderSpec::BoundedDeviation { v, amplitude, omega0 } => (
                v.abs() + amplitude * omega0 / 2.0,
                amplitude * omega0 * omega0 / 2.0,
            ),
        }
    }

    /// `sup_t |z_0(t) - v t|`: the positional deviation from uniform motion.
    pub fn deviation_bound(&self) -> f64 {
        match *self {
            LeaderSpec::ConstantVelocity { .. } => 0.0,
            LeaderSpec::Sinusoid { amplitude, .. }
            | LeaderSpec::BoundedDeviation { amplitude, .. } => amplitude,
        }
    }

    /// `sup_t |z_0'(t) - v|`: the velocity deviation from the cruising speed.
    pub fn velocity_deviation_bound(&self) -> f64 {
        match *self {
            LeaderSpec::ConstantVelocity { .. } => 0.0,
            LeaderSpec::Sinusoid { amplitude, omega0, .. } => amplitude * omega0,
            LeaderSpec::BoundedDeviation { amplitude, omega0, .. } => amplitude * omega0 / 2.0,
        }
    }

    /// Virtual gap `x_0(t) = (z_0'' + alpha z_0') / omega^2` driven by the
    /// leader. Feeding this signal into the gap recursion makes the leader's
    /// motion look like one more coupled gap coordinate.
    pub fn virtual_gap(&self, t: f64, params: &ControlParams) -> f64 {
        let (_, vel, acc) = self.kinematics(t);
        (acc + params.alpha * vel) / (params.omega * params.omega)
    }
}

/// Sign pattern used by perturbed-lattice initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PerturbationPattern {
    /// Alternating signs `(-1)^k` — the adversarial case that saturates
    /// neighbouring-gap bounds.
    #[default]
    Alternating,
    /// All perturbations with the same (positive) sign.
    Uniform,
}

impl PerturbationPattern {
    fn sign(self, k: usize) -> f64 {
        match self {
            PerturbationPattern::Alternating => {
                if k % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            PerturbationPattern::Uniform => 1.0,
        }
    }
}

/// Families of initial chain states.
///
/// `n` is the number of controlled cars (the leader is index 0 and is always
/// taken from the leader specification). Variants that carry a speed `v` use
/// it both for the initial velocities and as the reference for the
/// equilibrium spacing `a`; `GapPerturbed` and `SummableDecay` take the
/// reference speed from the leader at build time.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialConditionSpec {
    /// Exact equilibrium lattice: `z_k = -k a`, `z'_k = v`.
    EquilibriumLattice { n: usize, v: f64 },
    /// Lattice with position offsets `theta * a` and velocity offsets
    /// `beta * v` in the given sign pattern.
    PerturbedLattice { n: usize, v: f64, theta: f64, beta: f64, pattern: PerturbationPattern },
    /// Gaps alternating between `(1 - theta) d` and `(1 + theta) d`, initial
    /// velocities ramping as `z'_k = z'_0(0) - beta * k` so that consecutive
    /// velocity differences all equal `beta`.
    GapPerturbed { n: usize, theta: f64, beta: f64 },
    /// Geometrically decaying, alternating perturbations whose absolute sums
    /// equal `theta * a` (positions) and `beta * v` (velocities):
    /// `|z_k + k a| = theta a (1-rho) rho^(k-1)`.
    SummableDecay { n: usize, theta: f64, beta: f64, rho: f64 },
    /// Equilibrium lattice except car 1 starts with velocity `v + epsilon`.
    SingleVelocityKick { n: usize, v: f64, epsilon: f64 },
    /// Explicit positions and velocities for cars `1..=n` (leader excluded).
    Explicit { positions: Vec<f64>, velocities: Vec<f64> },
}

impl InitialConditionSpec {
    pub fn n_cars(&self) -> usize {
        match self {
            InitialConditionSpec::EquilibriumLattice { n, .. }
            | InitialConditionSpec::PerturbedLattice { n, .. }
            | InitialConditionSpec::GapPerturbed { n, .. }
            | InitialConditionSpec::SummableDecay { n, .. }
            | InitialConditionSpec::SingleVelocityKick { n, .. } => *n,
            InitialConditionSpec::Explicit { positions, .. } => positions.len(),
        }
    }

    /// Reference cruising speed for deviation bookkeeping, if the family has
    /// one. Lattice-type families carry it; `GapPerturbed` and `SummableDecay`
    /// inherit the leader's; `Explicit` states have none.
    pub fn reference_velocity(&self, leader: &LeaderSpec) -> Option<f64> {
        match self {
            InitialConditionSpec::EquilibriumLattice { v, .. }
            | InitialConditionSpec::PerturbedLattice { v, .. }
            | InitialConditionSpec::SingleVelocityKick { v, .. } => Some(*v),
            InitialConditionSpec::SummableDecay { .. } => Some(leader.reference_velocity()),
            InitialConditionSpec::GapPerturbed { .. } | InitialConditionSpec::Explicit { .. } => {
                None
            }
        }
    }
}

/// Positions and velocities of the leader (index 0) and the `N` cars at one
/// instant. Positions are strictly decreasing in the index: every car sits
/// behind its predecessor.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub t: f64,
    /// `z[0]` is the leader.
    pub z: Vec<f64>,
    /// `v[0]` is the leader.
    pub v: Vec<f64>,
}

impl ChainState {
    pub fn n_cars(&self) -> usize {
        self.z.len() - 1
    }

    /// Gaps `r_k = z_{k-1} - z_k` for `k = 1..=N`.
    pub fn gaps(&self) -> Vec<f64> {
        self.z.windows(2).map(|w| w[0] - w[1]).collect()
    }
}

/// Materialise an initial-condition family into a concrete state at `t = 0`.
///
/// Fails if the family parameters are out of range or if the produced
/// positions are not strictly ordered behind the leader.
pub fn build_initial_state(
    spec: &InitialConditionSpec,
    params: &ControlParams,
    leader: &LeaderSpec,
) -> Result<ChainState> {
    leader.validate()?;
    let n = spec.n_cars();
    if n == 0 {
        return Err(Error::InvalidInitialCondition("need at least one car".into()));
    }
    let (z0, v0, _) = leader.kinematics(0.0);
    let mut z = Vec::with_capacity(n + 1);
    let mut vel = Vec::with_capacity(n + 1);
    z.push(z0);
    vel.push(v0);

    let check_theta = |theta: f64| -> Result<f64> {
        if !(0.0..1.0).contains(&theta) {
            Err(Error::InvalidInitialCondition(format!("theta must lie in [0, 1), got {theta}")))
        } else {
            Ok(theta)
        }
    };
    let check_beta = |beta: f64| -> Result<f64> {
        if !beta.is_finite() || beta < 0.0 {
            Err(Error::InvalidInitialCondition(format!("beta must be finite and >= 0, got {beta}")))
        } else {
            Ok(beta)
        }
    };

    match spec {
        InitialConditionSpec::EquilibriumLattice { v, .. } => {
            let a = params.equilibrium_spacing(*v);
            for k in 1..=n {
                z.push(-(k as f64) * a);
                vel.push(*v);
            }
        }
        InitialConditionSpec::PerturbedLattice { v, theta, beta, pattern, .. } => {
            let theta = check_theta(*theta)?;
            let beta = check_beta(*beta)?;
            let a = params.equilibrium_spacing(*v);
            for k in 1..=n {
                let s = pattern.sign(k);
                z.push(-(k as f64) * a + theta * a * s);
                vel.push(*v + beta * *v * s);
            }
        }
        InitialConditionSpec::GapPerturbed { theta, beta, .. } => {
            let theta = check_theta(*theta)?;
            let beta = check_beta(*beta)?;
            for k in 1..=n {
                let s = PerturbationPattern::Alternating.sign(k);
                let gap = params.d * (1.0 + theta * s);
                z.push(z[k - 1] - gap);
                vel.push(v0 - beta * k as f64);
            }
        }
        InitialConditionSpec::SummableDecay { theta, beta, rho, .. } => {
            let theta = check_theta(*theta)?;
            let beta = check_beta(*beta)?;
            if !(0.0..1.0).contains(rho) || *rho <= 0.0 {
                return Err(Error::InvalidInitialCondition(format!(
                    "rho must lie in (0, 1), got {rho}"
                )));
            }
            let v = leader.reference_velocity();
            let a = params.equilibrium_spacing(v);
            for k in 1..=n {
                let s = PerturbationPattern::Alternating.sign(k - 1);
                let decay = (1.0 - rho) * rho.powi(k as i32 - 1);
                z.push(-(k as f64) * a + theta * a * decay * s);
                vel.push(v + beta * v * decay * s);
            }
        }
        InitialConditionSpec::SingleVelocityKick { v, epsilon, .. } => {
            if !epsilon.is_finite() {
                return Err(Error::InvalidInitialCondition("epsilon must be finite".into()));
            }
            let a = params.equilibrium_spacing(*v);
            for k in 1..=n {
                z.push(-(k as f64) * a);
                vel.push(if k == 1 { *v + *epsilon } else { *v });
            }
        }
        InitialConditionSpec::Explicit { positions, velocities } => {
            if positions.len() != velocities.len() {
                return Err(Error::InvalidInitialCondition(
                    "positions and velocities must have equal length".into(),
                ));
            }
            if positions.iter().chain(velocities.iter()).any(|x| !x.is_finite()) {
                return Err(Error::InvalidInitialCondition(
                    "positions and velocities must be finite".into(),
                ));
            }
            z.extend_from_slice(positions);
            vel.extend_from_slice(velocities);
        }
    }

    for k in 1..z.len() {
        if !(z[k] < z[k - 1]) {
            return Err(Error::InvalidInitialCondition(format!(
                "positions must strictly decrease behind the leader, but z[{}] = {} >= z[{}] = {}",
                k,
                z[k],
                k - 1,
                z[k - 1]
            )));
        }
    }

    Ok(ChainState { t: 0.0, z, v: vel })
}

/// Pick control gains that keep the chain within a prescribed gap corridor.
///
/// Given admissible gaps `[gap_min, gap_max]` (0 < gap_min <= gap_max) and a
/// bound `vel_spread` on consecutive initial velocity differences, set
/// `d = (gap_min + gap_max) / 2`, `theta = (gap_max - gap_min) / (gap_max +
/// gap_min)`, `beta = vel_spread`, then grow `alpha` by doubling from 1 until
/// the window `sqrt((a_max + alpha v_max) / d) < omega < alpha / 2` is
/// non-empty and the corridor margin eta evaluated at the window midpoint is
/// below one. Returns the first such `(alpha, omega, d)`.
///
/// The midpoint rule cannot serve corridors with `theta >= sqrt(3)/2`
/// (extremely lopsided corridors); the doubling is capped and an error
/// returned in that case.
pub fn synthesize_stabilizing_params(
    gap_min: f64,
    gap_max: f64,
    vel_spread: f64,
    leader: &LeaderSpec,
) -> Result<ControlParams> {
    if !(gap_min > 0.0 && gap_max >= gap_min && gap_max.is_finite()) {
        return Err(Error::SynthesisFailed(format!(
            "need 0 < gap_min <= gap_max < inf, got [{gap_min}, {gap_max}]"
        )));
    }
    if !vel_spread.is_finite() || vel_spread < 0.0 {
        return Err(Error::SynthesisFailed(format!(
            "vel_spread must be finite and >= 0, got {vel_spread}"
        )));
    }
    leader.validate()?;
    let (v_max, a_max) = leader.maneuver_bounds();
    if !v_max.is_finite() || !a_max.is_finite() {
        return Err(Error::SynthesisFailed("leader manoeuvre bounds are not finite".into()));
    }

    let d = (gap_min + gap_max) / 2.0;
    let theta = (gap_max - gap_min) / (gap_max + gap_min);
    let beta = vel_spread;

    let mut alpha = 1.0;
    for _ in 0..64 {
        let lo = ((a_max + alpha * v_max) / d).sqrt();
        let hi = alpha / 2.0;
        if lo < hi {
            let omega = (lo + hi) / 2.0;
            let params = ControlParams::new(alpha, omega, d)?;
            if let Ok(margin) = spectral::margin_theorem3(theta, beta, &params, leader) {
                if margin.hypothesis_ok {
                    return Ok(params);
                }
            }
        }
        alpha *= 2.0;
    }
    Err(Error::SynthesisFailed(format!(
        "no (alpha, omega) found after doubling alpha 64 times (corridor theta = {theta:.3}; \
         the midpoint rule needs theta < sqrt(3)/2 ~= 0.866)"
    )))
}
