//! Error type shared by the library modules.

use thiserror::Error;

/// Domain-level failures: invalid parameter combinations, violated
/// operation preconditions, or data that is structurally unusable.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Control parameters outside their admissible ranges.
    #[error("invalid control parameters: {0}")]
    InvalidParams(String),

    /// Leader trajectory specification outside its admissible ranges.
    #[error("invalid leader specification: {0}")]
    InvalidLeader(String),

    /// Initial-condition specification that cannot produce an ordered chain.
    #[error("invalid initial condition: {0}")]
    InvalidInitialCondition(String),

    /// Time step too large for the requested parameters.
    #[error("time step {dt} exceeds the stability threshold {limit} (= 0.1 / max(alpha, omega)); choose a smaller dt")]
    DtUnstable { dt: f64, limit: f64 },

    /// A sampled-time input whose spacing is not uniform.
    #[error("time grid is not uniformly spaced")]
    NonUniformGrid,

    /// An operation that is only defined in part of the (alpha, omega) plane.
    #[error("parameter-sector requirement violated: {0}")]
    SectorRequirement(String),

    /// The first-car gap formula degenerates when the drive frequency equals
    /// the control frequency.
    #[error("drive frequency equals the control frequency (omega0 = omega = {omega}); the first car resonates and no bounded closed form exists")]
    FirstParticleResonance { omega: f64 },

    /// Parameter synthesis could not find an admissible pair.
    #[error("parameter synthesis failed: {0}")]
    SynthesisFailed(String),

    /// Not enough data points for a statistical estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A scalar argument outside the domain of the requested function.
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// Malformed scenario-file text: syntax, unknown or duplicate keys,
    /// unparsable values.
    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    /// A required scenario key that the file does not define.
    #[error("config is missing required key `{0}`")]
    ConfigMissing(String),
}

impl Error {
    /// True for errors that mean the config file itself is unusable
    /// (syntax and schema), as opposed to well-formed input describing an
    /// inadmissible scenario.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::ConfigParse { .. } | Error::ConfigMissing(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
