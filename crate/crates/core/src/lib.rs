//! Numerical laboratory for a one-way chain of vehicles with local linear
//! control.
//!
//! Car `k` accelerates toward a target headway `d` behind its predecessor
//! and damps its own velocity:
//!
//! ```text
//! z''_k = omega^2 (z_{k-1} - z_k - d) - alpha z'_k,    k = 1, 2, ...
//! ```
//!
//! while the leader `z_0(t)` follows a prescribed trajectory. The gain pair
//! `(alpha, omega)` splits into three sectors — stable (`alpha > 2 omega`),
//! restricted (`sqrt(2) omega <= alpha <= 2 omega`), and unstable
//! (`alpha < sqrt(2) omega`) — and this crate provides everything needed to
//! verify the corresponding stability margins and instability asymptotics
//! numerically: the model types, a reproducible integrator, independent
//! analytic oracles, spectrum and saddle-point analysis, trajectory
//! observables, and a parallel phase-diagram sweep.

pub mod error;
pub mod integrator;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod scenario;
pub mod spectral;
pub mod suites;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use integrator::{simulate, step, TrajectoryRecord};
pub use model::{
    ChainState, ControlParams, InitialConditionSpec, LeaderSpec, PerturbationPattern, SectorClass,
};
pub use spectral::{MarginReport, SaddleData};
