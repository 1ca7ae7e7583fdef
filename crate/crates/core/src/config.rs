//! Scenario files: one TOML document per scenario.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::anticipation::{AppConfig, ArpConfig, AT_DEFAULT_MARGIN};
use crate::episodes::{AgentSpec, EpisodeConfig, DEFAULT_DT, DEFAULT_GOAL_RADIUS, DEFAULT_MAX_STEPS};
use crate::error::{Error, Result};
use crate::hybrid::PlannerMode;
use crate::policy::TrainConfig;
use crate::sfm::SfmParams;
use crate::world::{load_map, MapConfig, SamplingMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub mode: SamplingMode,
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self { mode: SamplingMode::Ed }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeSection {
    pub max_steps: usize,
    pub dt: f64,
    pub goal_radius: f64,
}

impl Default for EpisodeSection {
    fn default() -> Self {
        Self {
            max_steps: DEFAULT_MAX_STEPS,
            dt: DEFAULT_DT,
            goal_radius: DEFAULT_GOAL_RADIUS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    pub mode: PlannerMode,
}

impl Default for PlannerSection {
    fn default() -> Self {
        Self {
            mode: PlannerMode::Hybrid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnticipationSection {
    pub app: AppConfig,
    pub arp: ArpConfig,
    pub at_margin: f64,
}

impl Default for AnticipationSection {
    fn default() -> Self {
        Self {
            app: AppConfig::default(),
            arp: ArpConfig::default(),
            at_margin: AT_DEFAULT_MARGIN,
        }
    }
}

/// Full scenario tree. Every section except `map` is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub map: MapConfig,
    #[serde(default)]
    pub agents: AgentSpec,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub episode: EpisodeSection,
    #[serde(default)]
    pub planner: PlannerSection,
    #[serde(default)]
    pub sfm: SfmParams,
    #[serde(default)]
    pub anticipation: AnticipationSection,
    #[serde(default)]
    pub training: TrainConfig,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn builtin(map: &str) -> Self {
        Self {
            map: MapConfig {
                builtin: Some(map.into()),
                ..Default::default()
            },
            agents: AgentSpec::default(),
            sampling: SamplingSection::default(),
            noise: NoiseSection::default(),
            episode: EpisodeSection::default(),
            planner: PlannerSection::default(),
            sfm: SfmParams::default(),
            anticipation: AnticipationSection::default(),
            training: TrainConfig::default(),
            seed: 0,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().replace('\n', " ")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Builds and validates the episode configuration.
    pub fn episode_config(&self) -> Result<EpisodeConfig> {
        self.sfm.validate().map_err(Error::Config)?;
        self.training.validate()?;
        let cfg = EpisodeConfig {
            map: Arc::new(load_map(&self.map)?),
            agents: self.agents.clone(),
            mode: self.planner.mode,
            noise_sigma: self.noise.sigma,
            dt: self.episode.dt,
            max_steps: self.episode.max_steps,
            goal_radius: self.episode.goal_radius,
            sampling: self.sampling.mode,
            seed: self.seed,
            sfm: self.sfm,
            app: self.anticipation.app.clone(),
            arp: self.anticipation.arp.clone(),
            at_margin: self.anticipation.at_margin,
            record_trace: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
