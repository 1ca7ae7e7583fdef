//! Desk-scale DDPG training on a static map.

use std::path::PathBuf;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::checkpoint::save_params;
use super::ddpg::{DdpgConfig, DdpgLearner, UpdateStats};
use super::networks::{MlpParams, NetworkShape};
use super::replay::{ReplayBuffer, Transition};
use super::reward::{reward, RewardFeatures, RewardWeights};
use super::Action;
use crate::episodes::{EpisodeConfig, Outcome};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::sensing::{assemble_observation, scan, LidarScan, NoiseModel};
use crate::world::{sample_episode, Pose, ROBOT_RADIUS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub steps: usize,
    /// Uniform-random actions before the first update.
    pub warmup_steps: usize,
    /// Environment steps between gradient updates.
    pub update_every: usize,
    pub noise_start: f64,
    pub noise_end: f64,
    /// 0 disables periodic checkpoints.
    pub checkpoint_every: usize,
    pub ddpg: DdpgConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 100_000,
            warmup_steps: 2_000,
            update_every: 2,
            noise_start: 0.3,
            noise_end: 0.05,
            checkpoint_every: 10_000,
            ddpg: DdpgConfig {
                gamma: 0.95,
                batch_size: 64,
                ..DdpgConfig::default()
            },
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.ddpg.validate()?;
        if self.update_every == 0 {
            return Err(Error::Config("training.update_every must be ≥ 1".into()));
        }
        if !(self.noise_start >= 0.0 && self.noise_end >= 0.0) {
            return Err(Error::Config("exploration noise must be ≥ 0".into()));
        }
        Ok(())
    }

    /// Linearly decayed exploration σ at `step`.
    pub fn noise_at(&self, step: usize) -> f64 {
        let frac = if self.steps == 0 {
            1.0
        } else {
            (step as f64 / self.steps as f64).min(1.0)
        };
        self.noise_start + (self.noise_end - self.noise_start) * frac
    }
}

/// One row per finished episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainLogRow {
    pub step: usize,
    pub episode: usize,
    pub episode_return: f64,
    pub episode_steps: usize,
    pub outcome: Outcome,
    pub critic_loss: f64,
    pub actor_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub params: MlpParams,
    pub log: Vec<TrainLogRow>,
    /// Digests of the checkpoints written, in order.
    pub checkpoints: Vec<(usize, String)>,
}

/// Static-obstacle environment: no agents, noiseless Lidar.
pub struct TrainEnv<'a> {
    cfg: &'a EpisodeConfig,
    weights: RewardWeights,
    pose: Pose,
    goal: Vec2,
    scan: LidarScan,
    steps: usize,
}

pub struct EnvStep {
    pub obs: Vec<f64>,
    pub reward: f64,
    pub outcome: Option<Outcome>,
}

impl<'a> TrainEnv<'a> {
    pub fn new(cfg: &'a EpisodeConfig, seed: u64) -> Result<Self> {
        if cfg.agents.count > 0 {
            return Err(Error::Precondition("training uses static obstacles only".into()));
        }
        let (pose, goal) = sample_episode(&cfg.map, cfg.sampling, seed)?;
        let scan = scan(&cfg.map, &[], &pose, &mut NoiseModel::noiseless());
        Ok(Self {
            cfg,
            weights: RewardWeights::default(),
            pose,
            goal,
            scan,
            steps: 0,
        })
    }

    pub fn observation(&self) -> Vec<f64> {
        assemble_observation(std::slice::from_ref(&self.scan), &self.pose, &self.goal).to_vector()
    }

    pub fn step(&mut self, action: Action) -> Result<EnvStep> {
        let before = self.pose;
        self.pose = before.integrate(action.linear, action.angular, self.cfg.dt);
        self.scan = scan(&self.cfg.map, &[], &self.pose, &mut NoiseModel::noiseless());
        self.steps += 1;
        let collided = !self.cfg.map.segment_free(&before.position, &self.pose.position, ROBOT_RADIUS);
        let dist = (self.goal - self.pose.position).norm();
        let reached = !collided && dist < self.cfg.goal_radius;
        let features = RewardFeatures::from_step(dist, collided, action.angular, self.scan.min_range(), reached);
        let r = reward(&features.as_array(), &self.weights)?;
        let outcome = if collided {
            Some(Outcome::Collision)
        } else if reached {
            Some(Outcome::Success)
        } else if self.steps >= self.cfg.max_steps {
            Some(Outcome::Timeout)
        } else {
            None
        };
        Ok(EnvStep {
            obs: self.observation(),
            reward: r,
            outcome,
        })
    }
}

/// Trains from `params`. `env_cfg` supplies the map, sampling and episode
/// limits; checkpoints go to `checkpoint_dir` when given.
pub fn train(
    env_cfg: &EpisodeConfig,
    cfg: &TrainConfig,
    params: MlpParams,
    seed: u64,
    checkpoint_dir: Option<PathBuf>,
) -> Result<TrainReport> {
    cfg.validate()?;
    env_cfg.validate()?;
    if params.shape.obs_dim != crate::sensing::OBS_DIM {
        return Err(Error::DimensionMismatch {
            expected: crate::sensing::OBS_DIM,
            actual: params.shape.obs_dim,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut replay = ReplayBuffer::new(cfg.ddpg.replay_capacity, rng.next_u64());
    let mut learner = DdpgLearner::new(params, cfg.ddpg.clone());
    let mut log = Vec::new();
    let mut checkpoints = Vec::new();
    let unit = Normal::new(0.0, 1.0).expect("valid normal");

    let mut episode = 0;
    let mut env = TrainEnv::new(env_cfg, rng.next_u64())?;
    let mut obs = env.observation();
    let mut ep_return = 0.0;
    let mut ep_steps = 0;
    let mut last = UpdateStats {
        critic_loss: f64::NAN,
        actor_loss: f64::NAN,
    };

    for step in 1..=cfg.steps {
        let action = if step <= cfg.warmup_steps {
            Action::new(rng.random_range(-0.2..=1.0), rng.random_range(-1.0..=1.0))
        } else {
            let a = learner.online.actor.act(&obs)?;
            let sigma = cfg.noise_at(step);
            Action::new(
                a.linear + sigma * unit.sample(&mut rng),
                a.angular + sigma * unit.sample(&mut rng),
            )
            .clamped()
        };
        let out = env.step(action)?;
        ep_return += out.reward;
        ep_steps += 1;
        replay.push(Transition {
            obs: std::mem::take(&mut obs),
            action,
            reward: out.reward,
            next_obs: out.obs.clone(),
            // timeouts bootstrap; only collisions and arrivals end the return
            terminal: matches!(out.outcome, Some(Outcome::Collision | Outcome::Success)),
        });
        obs = out.obs;

        if step > cfg.warmup_steps && step % cfg.update_every == 0 {
            let batch = replay.sample(cfg.ddpg.batch_size);
            match learner.update(&batch) {
                Ok(s) => last = s,
                Err(e) => {
                    if let Some(dir) = &checkpoint_dir {
                        save_params(&learner.online, step as u64, &dir.join("diverged.json"))?;
                    }
                    return Err(Error::Diverged {
                        step,
                        detail: e.to_string(),
                    });
                }
            }
        }

        if let Some(outcome) = out.outcome {
            log.push(TrainLogRow {
                step,
                episode,
                episode_return: ep_return,
                episode_steps: ep_steps,
                outcome,
                critic_loss: last.critic_loss,
                actor_loss: last.actor_loss,
            });
            episode += 1;
            env = TrainEnv::new(env_cfg, rng.next_u64())?;
            obs = env.observation();
            ep_return = 0.0;
            ep_steps = 0;
        }

        if let Some(dir) = &checkpoint_dir {
            if cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0 {
                let digest = save_params(&learner.online, step as u64, &dir.join(format!("step_{step:07}.json")))?;
                checkpoints.push((step, digest));
            }
        }
    }

    Ok(TrainReport {
        params: learner.online,
        log,
        checkpoints,
    })
}

/// Fresh parameters for the default network shape.
pub fn initial_params(seed: u64) -> MlpParams {
    MlpParams::new(NetworkShape::default(), &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::builtin;

    fn env_cfg() -> EpisodeConfig {
        EpisodeConfig::new(builtin("empty").unwrap())
    }

    fn tiny(steps: usize) -> TrainConfig {
        TrainConfig {
            steps,
            warmup_steps: 20,
            checkpoint_every: 0,
            ddpg: DdpgConfig {
                batch_size: 8,
                ..TrainConfig::default().ddpg
            },
            ..Default::default()
        }
    }

    fn small_params() -> MlpParams {
        let shape = NetworkShape::small(crate::sensing::OBS_DIM, &[8, 6]);
        MlpParams::new(shape, &mut ChaCha8Rng::seed_from_u64(1))
    }

    #[test]
    fn zero_steps_returns_initial_params() {
        let p = small_params();
        let r = train(&env_cfg(), &tiny(0), p.clone(), 3, None).unwrap();
        assert_eq!(r.params, p);
        assert!(r.log.is_empty());
    }

    #[test]
    fn same_seed_same_params() {
        let a = train(&env_cfg(), &tiny(120), small_params(), 5, None).unwrap();
        let b = train(&env_cfg(), &tiny(120), small_params(), 5, None).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.log, b.log);
    }

    #[test]
    fn agents_are_rejected() {
        let mut cfg = env_cfg();
        cfg.agents.count = 3;
        assert!(matches!(
            train(&cfg, &tiny(10), small_params(), 0, None),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn noise_decays_linearly() {
        let c = TrainConfig::default();
        assert_eq!(c.noise_at(0), 0.3);
        assert!((c.noise_at(c.steps) - 0.05).abs() < 1e-12);
        assert!((c.noise_at(c.steps / 2) - 0.175).abs() < 1e-12);
    }

    #[test]
    fn checkpoints_are_written_and_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = TrainConfig {
            checkpoint_every: 50,
            ..tiny(100)
        };
        let a = train(&env_cfg(), &cfg, small_params(), 9, Some(dir.path().to_path_buf())).unwrap();
        assert_eq!(a.checkpoints.len(), 2);
        assert!(dir.path().join("step_0000100.json").exists());
        let b = train(&env_cfg(), &cfg, small_params(), 9, Some(dir.path().to_path_buf())).unwrap();
        assert_eq!(a.checkpoints, b.checkpoints);
    }

    #[test]
    fn divergence_aborts_with_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny(200);
        cfg.ddpg.critic_lr = 1e300;
        cfg.ddpg.actor_lr = 1e300;
        let err = train(&env_cfg(), &cfg, small_params(), 2, Some(dir.path().to_path_buf())).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
        assert!(dir.path().join("diverged.json").exists());
    }
}
