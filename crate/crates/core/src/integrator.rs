//! Fixed-step classical Runge–Kutta integration of the chain.
//!
//! The chain is linear, non-stiff for admissible steps, and must be
//! bit-reproducible across runs, so a fixed-step fourth-order scheme is used
//! throughout. The leader is not integrated at all: its position and velocity
//! are evaluated exactly from the closed-form trajectory, including at the
//! half-step stage times, so no integration error enters through the
//! boundary.

use crate::error::{Error, Result};
use crate::model::{build_initial_state, ChainState, ControlParams, InitialConditionSpec, LeaderSpec};

/// Default integration step. Small enough that the fourth-order error is far
/// below every tolerance used by the verification suites.
pub const DEFAULT_DT: f64 = 1e-3;

/// Largest admissible step for gains `(alpha, omega)`; `simulate` rejects
/// anything above `0.1 / max(alpha, omega)`.
pub fn dt_limit(params: &ControlParams) -> f64 {
    0.1 / params.alpha.max(params.omega)
}

/// Scratch buffers for one RK4 step of an `n`-car chain.
struct Stepper {
    /// Stage slopes for positions/velocities of cars `1..=n`.
    kz: [Vec<f64>; 4],
    kv: [Vec<f64>; 4],
    /// Stage state (positions and velocities of cars `1..=n`).
    sz: Vec<f64>,
    sv: Vec<f64>,
}

impl Stepper {
    fn new(n: usize) -> Self {
        Stepper {
            kz: std::array::from_fn(|_| vec![0.0; n]),
            kv: std::array::from_fn(|_| vec![0.0; n]),
            sz: vec![0.0; n],
            sv: vec![0.0; n],
        }
    }

    /// Evaluate the chain's right-hand side at a stage: the slope of car k's
    /// position is its stage velocity, the slope of its velocity is
    /// `omega^2 (z_{k-1} - z_k - d) - alpha z'_k` with the leader's stage
    /// position taken exactly from the closed form.
    fn eval_stage(
        &mut self,
        stage: usize,
        leader_z: f64,
        params: &ControlParams,
    ) {
        let n = self.sz.len();
        let w2 = params.omega * params.omega;
        let (kz, kv) = (&mut self.kz[stage], &mut self.kv[stage]);
        let mut prev = leader_z;
        for i in 0..n {
            let z = self.sz[i];
            let v = self.sv[i];
            kz[i] = v;
            kv[i] = w2 * (prev - z - params.d) - params.alpha * v;
            prev = z;
        }
    }

    /// Advance cars `1..=n` in place by one step of size `dt` starting at
    /// time `t`; the leader state is refreshed exactly.
    fn advance(
        &mut self,
        z: &mut [f64],
        v: &mut [f64],
        t: f64,
        dt: f64,
        params: &ControlParams,
        leader: &LeaderSpec,
    ) {
        let n = z.len() - 1;
        let (lz0, _, _) = leader.kinematics(t);
        let (lz_half, _, _) = leader.kinematics(t + dt / 2.0);
        let (lz1, lv1, _) = leader.kinematics(t + dt);

        // Stage 1 at the current state.
        self.sz.copy_from_slice(&z[1..]);
        self.sv.copy_from_slice(&v[1..]);
        self.eval_stage(0, lz0, params);

        // Stage 2 and 3 at the midpoint.
        for i in 0..n {
            self.sz[i] = z[i + 1] + 0.5 * dt * self.kz[0][i];
            self.sv[i] = v[i + 1] + 0.5 * dt * self.kv[0][i];
        }
        self.eval_stage(1, lz_half, params);
        for i in 0..n {
            self.sz[i] = z[i + 1] + 0.5 * dt * self.kz[1][i];
            self.sv[i] = v[i + 1] + 0.5 * dt * self.kv[1][i];
        }
        self.eval_stage(2, lz_half, params);

        // Stage 4 at the full step.
        for i in 0..n {
            self.sz[i] = z[i + 1] + dt * self.kz[2][i];
            self.sv[i] = v[i + 1] + dt * self.kv[2][i];
        }
        self.eval_stage(3, lz1, params);

        for i in 0..n {
            z[i + 1] += dt / 6.0
                * (self.kz[0][i] + 2.0 * self.kz[1][i] + 2.0 * self.kz[2][i] + self.kz[3][i]);
            v[i + 1] += dt / 6.0
                * (self.kv[0][i] + 2.0 * self.kv[1][i] + 2.0 * self.kv[2][i] + self.kv[3][i]);
        }
        z[0] = lz1;
        v[0] = lv1;
    }
}

/// One classical RK4 step of size `dt`. The input state is not modified.
pub fn step(
    state: &ChainState,
    params: &ControlParams,
    leader: &LeaderSpec,
    dt: f64,
) -> ChainState {
    let mut z = state.z.clone();
    let mut v = state.v.clone();
    let mut stepper = Stepper::new(state.n_cars());
    stepper.advance(&mut z, &mut v, state.t, dt, params, leader);
    ChainState { t: state.t + dt, z, v }
}

/// Sampled trajectory of a chain run.
///
/// Per-sample data is stored row-major by sample: `gaps[s * n + (k-1)]` is
/// the gap of car `k` at sample `s`. Deviations `q_k = z_k - (v t - k a)`
/// are recorded only when the initial-condition family declares a reference
/// velocity; `a` is the corresponding equilibrium spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub n_cars: usize,
    pub dt: f64,
    pub stride: usize,
    pub reference_velocity: Option<f64>,
    pub equilibrium_spacing: Option<f64>,
    pub times: Vec<f64>,
    pub gaps: Vec<f64>,
    pub velocities: Vec<f64>,
    pub deviations: Option<Vec<f64>>,
    /// Running per-car extrema of the sampled gaps.
    pub gap_min: Vec<f64>,
    pub gap_max: Vec<f64>,
    /// First sample-interval sign change of any gap, linearly interpolated:
    /// `(time, car index)`.
    pub first_negative_gap: Option<(f64, usize)>,
}

impl TrajectoryRecord {
    pub fn n_samples(&self) -> usize {
        self.times.len()
    }

    pub fn sample_time(&self, s: usize) -> f64 {
        self.times[s]
    }

    /// Gap of car `k` (1-based) at sample `s`.
    pub fn gap(&self, s: usize, k: usize) -> f64 {
        self.gaps[s * self.n_cars + (k - 1)]
    }

    /// Velocity of car `k` (1-based) at sample `s`.
    pub fn velocity(&self, s: usize, k: usize) -> f64 {
        self.velocities[s * self.n_cars + (k - 1)]
    }

    /// Deviation `q_k` of car `k` (1-based) at sample `s`, if recorded.
    pub fn deviation(&self, s: usize, k: usize) -> Option<f64> {
        self.deviations.as_ref().map(|d| d[s * self.n_cars + (k - 1)])
    }

    /// Time of the last sample.
    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Write the record as CSV with header `t,k,r,v,q`, rows ordered by
    /// sample then car, floats with 17 significant digits. The `q` field is
    /// empty when no reference velocity was configured.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,k,r,v,q")?;
        for s in 0..self.n_samples() {
            for k in 1..=self.n_cars {
                match self.deviation(s, k) {
                    Some(q) => writeln!(
                        w,
                        "{:.16e},{},{:.16e},{:.16e},{:.16e}",
                        self.times[s],
                        k,
                        self.gap(s, k),
                        self.velocity(s, k),
                        q
                    )?,
                    None => writeln!(
                        w,
                        "{:.16e},{},{:.16e},{:.16e},",
                        self.times[s],
                        k,
                        self.gap(s, k),
                        self.velocity(s, k)
                    )?,
                }
            }
        }
        Ok(())
    }
}

/// Integrate a scenario over `horizon` with step `dt`, sampling every
/// `stride`-th step (sample times are spaced `dt * stride` apart, starting
/// at `t = 0`).
///
/// Rejects `dt` above the stability threshold `0.1 / max(alpha, omega)`.
/// Collisions (negative gaps) do not stop the run: cars are kinematic
/// points, and the post-collision data is exactly what the instability
/// analyses need.
pub fn simulate(
    spec: &InitialConditionSpec,
    params: &ControlParams,
    leader: &LeaderSpec,
    horizon: f64,
    dt: f64,
    stride: usize,
) -> Result<TrajectoryRecord> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidParams(format!("horizon must be positive, got {horizon}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParams(format!("dt must be positive, got {dt}")));
    }
    if stride == 0 {
        return Err(Error::InvalidParams("sample stride must be >= 1".into()));
    }
    let limit = dt_limit(params);
    if dt > limit {
        return Err(Error::DtUnstable { dt, limit });
    }

    let steps = (horizon / dt).round() as usize;
    if steps == 0 {
        return Err(Error::InvalidParams(format!(
            "horizon {horizon} shorter than a single step {dt}"
        )));
    }

    let state = build_initial_state(spec, params, leader)?;
    let n = state.n_cars();
    let ref_v = spec.reference_velocity(leader);
    let a = ref_v.map(|v| params.equilibrium_spacing(v));

    let n_samples = steps / stride + 1;
    let mut record = TrajectoryRecord {
        n_cars: n,
        dt,
        stride,
        reference_velocity: ref_v,
        equilibrium_spacing: a,
        times: Vec::with_capacity(n_samples),
        gaps: Vec::with_capacity(n_samples * n),
        velocities: Vec::with_capacity(n_samples * n),
        deviations: ref_v.map(|_| Vec::with_capacity(n_samples * n)),
        gap_min: vec![f64::INFINITY; n],
        gap_max: vec![f64::NEG_INFINITY; n],
        first_negative_gap: None,
    };

    let mut z = state.z;
    let mut v = state.v;
    let mut stepper = Stepper::new(n);
    let mut prev_sample_gaps: Option<(f64, Vec<f64>)> = None;

    for step_idx in 0..=steps {
        let t = step_idx as f64 * dt;
        if step_idx % stride == 0 {
            record.times.push(t);
            for k in 1..=n {
                let gap = z[k - 1] - z[k];
                record.gaps.push(gap);
                record.velocities.push(v[k]);
                if let (Some(devs), Some(v_ref), Some(a)) =
                    (record.deviations.as_mut(), ref_v, a)
                {
                    devs.push(z[k] - (v_ref * t - k as f64 * a));
                }
                if gap < record.gap_min[k - 1] {
                    record.gap_min[k - 1] = gap;
                }
                if gap > record.gap_max[k - 1] {
                    record.gap_max[k - 1] = gap;
                }
            }
            if record.first_negative_gap.is_none() {
                let s = record.n_samples() - 1;
                let cur = &record.gaps[s * n..(s + 1) * n];
                if let Some((t_prev, prev)) = &prev_sample_gaps {
                    let mut first: Option<(f64, usize)> = None;
                    for k in 1..=n {
                        let (g0, g1) = (prev[k - 1], cur[k - 1]);
                        if g0 > 0.0 && g1 < 0.0 {
                            let cross = t_prev + (t - t_prev) * g0 / (g0 - g1);
                            if first.map_or(true, |(tc, _)| cross < tc) {
                                first = Some((cross, k));
                            }
                        }
                    }
                    record.first_negative_gap = first;
                }
                prev_sample_gaps = Some((t, cur.to_vec()));
            }
        }
        if step_idx < steps {
            stepper.advance(&mut z, &mut v, t, dt, params, leader);
        }
    }

    Ok(record)
}

/// Gap deviations from the target: `x_k = z_{k-1} - z_k - d` for `k = 1..=N`.
pub fn x_coordinates(state: &ChainState, params: &ControlParams) -> Vec<f64> {
    state.gaps().iter().map(|r| r - params.d).collect()
}
