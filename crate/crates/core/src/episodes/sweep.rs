use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{evaluate, intersection_suite, EpisodeConfig, Metrics};
use crate::error::{Error, Result};
use crate::hybrid::PlannerMode;
use crate::policy::Policy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Lidar noise σ (m).
    Noise,
    /// Number of agents.
    Agents,
    /// Agent speed in the intersection suite (m/s).
    Velocity,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noise" => Ok(Self::Noise),
            "agents" => Ok(Self::Agents),
            "velocity" => Ok(Self::Velocity),
            other => Err(Error::Config(format!(
                "unknown sweep axis {other:?} (expected noise, agents or velocity)"
            ))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Noise => "noise",
            Self::Agents => "agents",
            Self::Velocity => "velocity",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub mode: PlannerMode,
    pub metrics: Metrics,
}

/// One row per (value, mode), values outermost. Noise and agent sweeps run
/// `episodes` sampled episodes from `batch_seed` (shared across rows); the
/// velocity sweep runs the intersection suite.
pub fn sweep(
    axis: SweepAxis,
    values: &[f64],
    modes: &[PlannerMode],
    base: &EpisodeConfig,
    policy: &dyn Policy,
    episodes: usize,
    batch_seed: u64,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::Precondition("sweep needs at least one value".into()));
    }
    if modes.is_empty() {
        return Err(Error::Precondition("sweep needs at least one planner mode".into()));
    }
    let mut rows = Vec::with_capacity(values.len() * modes.len());
    for &value in values {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Precondition(format!("{axis} value must be finite and ≥ 0, got {value}")));
        }
        for &mode in modes {
            let mut cfg = base.clone();
            cfg.mode = mode;
            let metrics = match axis {
                SweepAxis::Noise => {
                    cfg.noise_sigma = value;
                    evaluate(&cfg, policy, episodes, batch_seed)?
                }
                SweepAxis::Agents => {
                    if value.fract() != 0.0 {
                        return Err(Error::Precondition(format!("agent count must be an integer, got {value}")));
                    }
                    cfg.agents.count = value as usize;
                    evaluate(&cfg, policy, episodes, batch_seed)?
                }
                SweepAxis::Velocity => intersection_suite(&cfg, mode, value, policy)?,
            };
            rows.push(SweepRow {
                axis,
                value,
                mode,
                metrics,
            });
        }
    }
    Ok(rows)
}
