//! Flat `key = value` scenario files: parsing, schema checking, and
//! assembly into typed run descriptions.
//!
//! Schema errors (syntax, unknown or duplicate keys, bad literals, missing
//! required keys) are reported as config errors with a line number where
//! one exists; a well-formed file describing inadmissible parameters fails
//! later with the relevant domain error instead.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{ControlParams, InitialConditionSpec, LeaderSpec, PerturbationPattern};
use crate::sweep::{ClassifyThresholds, SweepGrid, SweepTemplate};

/// Every key a scenario file may define. Keys outside this list are
/// rejected at parse time.
pub const KNOWN_KEYS: &[&str] = &[
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

/// Parsed but not yet interpreted file: key -> (line number, raw value).
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    /// Parse scenario text. One `key = value` per line; `#` starts a
    /// comment; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::ConfigParse {
                    line,
                    message: format!("expected `key = value`, got `{content}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::ConfigParse { line, message: format!("unknown key `{key}`") });
            }
            if value.is_empty() {
                return Err(Error::ConfigParse {
                    line,
                    message: format!("key `{key}` has an empty value"),
                });
            }
            if let Some((first_line, _)) = values.get(key) {
                return Err(Error::ConfigParse {
                    line,
                    message: format!("duplicate key `{key}` (first set on line {first_line})"),
                });
            }
            values.insert(key.to_string(), (line, value.to_string()));
        }
        Ok(RawConfig { values })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn parse_value<T: std::str::FromStr>(&self, key: &str, kind: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, raw)) => raw.parse::<T>().map(Some).map_err(|_| Error::ConfigParse {
                line: *line,
                message: format!("key `{key}` needs {kind}, got `{raw}`"),
            }),
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse_value(key, "a number")
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.parse_value(key, "a non-negative integer")
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(_, v)| v.as_str())
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.get_f64(key)?.ok_or_else(|| Error::ConfigMissing(key.into()))
    }

    pub fn require_usize(&self, key: &str) -> Result<usize> {
        self.get_usize(key)?.ok_or_else(|| Error::ConfigMissing(key.into()))
    }

    fn require_str(&self, key: &str) -> Result<(usize, &str)> {
        self.values
            .get(key)
            .map(|(l, v)| (*l, v.as_str()))
            .ok_or_else(|| Error::ConfigMissing(key.into()))
    }
}

/// A fully assembled single-run description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: ControlParams,
    pub leader: LeaderSpec,
    pub ic: InitialConditionSpec,
    pub horizon: f64,
    pub dt: f64,
    pub stride: usize,
}

/// Build the simulation scenario from the base keys. Required:
/// `alpha`, `omega`, `d`, `n_cars`, `leader.kind`, `leader.v`, `ic.kind`,
/// `horizon`, `dt`; plus the fields the chosen kinds need.
/// `sample_stride` defaults to 1 and `ic.rho` to 0.5.
pub fn scenario_from_config(raw: &RawConfig) -> Result<Scenario> {
    let params =
        ControlParams::new(raw.require_f64("alpha")?, raw.require_f64("omega")?, raw.require_f64("d")?)?;
    let n = raw.require_usize("n_cars")?;
    if n == 0 {
        return Err(Error::InvalidInitialCondition("n_cars must be at least 1".into()));
    }
    let v = raw.require_f64("leader.v")?;
    let (kind_line, kind) = raw.require_str("leader.kind")?;
    let leader = match kind {
        "constant" => LeaderSpec::ConstantVelocity { v },
        "sinusoid" | "bounded" => {
            let amplitude = raw.require_f64("leader.amplitude")?;
            let omega0 = raw.require_f64("leader.omega0")?;
            if kind == "sinusoid" {
                LeaderSpec::Sinusoid { v, amplitude, omega0 }
            } else {
                LeaderSpec::BoundedDeviation { v, amplitude, omega0 }
            }
        }
        other => {
            return Err(Error::ConfigParse {
                line: kind_line,
                message: format!(
                    "leader.kind must be one of `constant`, `sinusoid`, `bounded`, got `{other}`"
                ),
            })
        }
    };
    leader.validate()?;
    let (ic_line, ic_kind) = raw.require_str("ic.kind")?;
    let ic = match ic_kind {
        "equilibrium" => InitialConditionSpec::EquilibriumLattice { n, v },
        "perturbed" => InitialConditionSpec::PerturbedLattice {
            n,
            v,
            theta: raw.require_f64("ic.theta")?,
            beta: raw.require_f64("ic.beta")?,
            pattern: PerturbationPattern::Alternating,
        },
        "gap_perturbed" => InitialConditionSpec::GapPerturbed {
            n,
            theta: raw.require_f64("ic.theta")?,
            beta: raw.require_f64("ic.beta")?,
        },
        "summable" => InitialConditionSpec::SummableDecay {
            n,
            theta: raw.require_f64("ic.theta")?,
            beta: raw.require_f64("ic.beta")?,
            rho: raw.get_f64("ic.rho")?.unwrap_or(0.5),
        },
        "kick" => InitialConditionSpec::SingleVelocityKick {
            n,
            v,
            epsilon: raw.require_f64("ic.epsilon")?,
        },
        other => {
            return Err(Error::ConfigParse {
                line: ic_line,
                message: format!(
                    "ic.kind must be one of `equilibrium`, `perturbed`, `gap_perturbed`, \
                     `summable`, `kick`, got `{other}`"
                ),
            })
        }
    };
    Ok(Scenario {
        params,
        leader,
        ic,
        horizon: raw.require_f64("horizon")?,
        dt: raw.require_f64("dt")?,
        stride: raw.get_usize("sample_stride")?.unwrap_or(1),
    })
}

/// Resolvent-region scan description: a rectangular grid over
/// `[-alpha - box, box] x [-box, box]` at the given resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumConfig {
    pub params: ControlParams,
    pub box_size: f64,
    pub resolution: f64,
}

/// Spectrum scans need `alpha` and `omega`; `d` defaults to 1 (it does not
/// affect the spectrum), `spectrum.box` to `2 omega`, and
/// `spectrum.resolution` to `omega / 100`.
pub fn spectrum_from_config(raw: &RawConfig) -> Result<SpectrumConfig> {
    let alpha = raw.require_f64("alpha")?;
    let omega = raw.require_f64("omega")?;
    let d = raw.get_f64("d")?.unwrap_or(1.0);
    let params = ControlParams::new(alpha, omega, d)?;
    let box_size = raw.get_f64("spectrum.box")?.unwrap_or(2.0 * omega);
    let resolution = raw.get_f64("spectrum.resolution")?.unwrap_or(omega / 100.0);
    if !(box_size.is_finite() && box_size > 0.0) || !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::InvalidParams(format!(
            "spectrum box and resolution must be positive, got {box_size} and {resolution}"
        )));
    }
    Ok(SpectrumConfig { params, box_size, resolution })
}

/// Ray-asymptotics comparison description.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleConfig {
    pub scenario: Scenario,
    pub mu: f64,
    pub k_lo: usize,
    pub k_hi: usize,
}

/// Saddle runs use the full base scenario (the kick family probes the ray
/// asymptotics). `saddle.mu` defaults to `2 / alpha` (the fastest-growing
/// ray), `saddle.k_min` to 10, `saddle.k_max` to the largest index whose
/// ray time fits the horizon and car count.
pub fn saddle_from_config(raw: &RawConfig) -> Result<SaddleConfig> {
    let scenario = scenario_from_config(raw)?;
    let mu = match raw.get_f64("saddle.mu")? {
        Some(m) => m,
        None => 2.0 / scenario.params.alpha,
    };
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::OutOfRange(format!("saddle.mu must be positive, got {mu}")));
    }
    let k_lo = raw.get_usize("saddle.k_min")?.unwrap_or(10);
    let k_hi = match raw.get_usize("saddle.k_max")? {
        Some(k) => k,
        None => {
            let by_horizon = (scenario.horizon / mu).floor() as usize;
            let by_cars = scenario.ic.n_cars().saturating_sub(1);
            by_horizon.min(by_cars)
        }
    };
    Ok(SaddleConfig { scenario, mu, k_lo, k_hi })
}

/// Phase-sweep description assembled from `sweep.*` keys plus any base
/// keys that override the cell template.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub grid: SweepGrid,
    pub template: SweepTemplate,
    pub thresholds: ClassifyThresholds,
}

/// Every sweep key is optional: the defaults give the standard 20 x 20
/// grid with the standard kick template. Base keys `d`, `leader.v`,
/// `ic.epsilon`, `n_cars`, `horizon`, `dt`, `sample_stride` override the
/// template; `sweep.*` keys override grid, thresholds, and fit range.
pub fn sweep_from_config(raw: &RawConfig) -> Result<SweepConfig> {
    let defaults = SweepGrid::default_grid();
    let grid = SweepGrid::new(
        raw.get_f64("sweep.alpha_min")?.unwrap_or(defaults.alpha_min),
        raw.get_f64("sweep.alpha_max")?.unwrap_or(defaults.alpha_max),
        raw.get_usize("sweep.alpha_steps")?.unwrap_or(defaults.alpha_steps),
        raw.get_f64("sweep.omega_min")?.unwrap_or(defaults.omega_min),
        raw.get_f64("sweep.omega_max")?.unwrap_or(defaults.omega_max),
        raw.get_usize("sweep.omega_steps")?.unwrap_or(defaults.omega_steps),
    )?;
    let base = SweepTemplate::default();
    let template = SweepTemplate {
        d: raw.get_f64("d")?.unwrap_or(base.d),
        v: raw.get_f64("leader.v")?.unwrap_or(base.v),
        kick_epsilon: raw.get_f64("ic.epsilon")?.unwrap_or(base.kick_epsilon),
        n_cars: raw.get_usize("n_cars")?.unwrap_or(base.n_cars),
        horizon: raw.get_f64("horizon")?.unwrap_or(base.horizon),
        dt: raw.get_f64("dt")?.unwrap_or(base.dt),
        stride: raw.get_usize("sample_stride")?.unwrap_or(base.stride),
        k_lo: raw.get_usize("sweep.k_lo")?.unwrap_or(base.k_lo),
        k_hi: raw.get_usize("sweep.k_hi")?.unwrap_or(base.k_hi),
    };
    let base_thr = ClassifyThresholds::default();
    let thresholds = ClassifyThresholds {
        slope_pos: raw.get_f64("sweep.slope_pos")?.unwrap_or(base_thr.slope_pos),
        slope_neg: raw.get_f64("sweep.slope_neg")?.unwrap_or(base_thr.slope_neg),
    };
    Ok(SweepConfig { grid, template, thresholds })
}
