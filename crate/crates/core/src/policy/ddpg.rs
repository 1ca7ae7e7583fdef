//! Deep deterministic policy gradient update.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::mlp::{Adam, Mlp};
use super::networks::{Actor, Critic, CriticGrads, MlpParams};
use super::replay::Transition;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DdpgConfig {
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.005,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            batch_size: 256,
            replay_capacity: 100_000,
        }
    }
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config("ddpg.gamma must lie in (0, 1)".into()));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::Config("ddpg.tau must lie in (0, 1]".into()));
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        if self.batch_size == 0 || self.replay_capacity == 0 {
            return Err(Error::Config("batch size and replay capacity must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
}

/// A batch laid out as matrices.
pub struct Batch {
    pub obs: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array1<f64>,
    pub next_obs: Array2<f64>,
    pub not_done: Array1<f64>,
}

impl Batch {
    pub fn from_transitions(batch: &[&Transition]) -> Self {
        let n = batch.len();
        let dim = batch[0].obs.len();
        let mut obs = Array2::zeros((n, dim));
        let mut next_obs = Array2::zeros((n, dim));
        let mut actions = Array2::zeros((n, 2));
        let mut rewards = Array1::zeros(n);
        let mut not_done = Array1::zeros(n);
        for (i, t) in batch.iter().enumerate() {
            obs.row_mut(i).assign(&ArrayView2::from_shape((1, dim), &t.obs).expect("row").row(0));
            next_obs
                .row_mut(i)
                .assign(&ArrayView2::from_shape((1, dim), &t.next_obs).expect("row").row(0));
            actions[[i, 0]] = t.action.linear;
            actions[[i, 1]] = t.action.angular;
            rewards[i] = t.reward;
            not_done[i] = if t.terminal { 0.0 } else { 1.0 };
        }
        Self {
            obs,
            actions,
            rewards,
            next_obs,
            not_done,
        }
    }
}

/// `y = r + γ·(1 − terminal)·Q_target(s′, π_target(s′))`.
pub fn td_targets(target: &MlpParams, batch: &Batch, gamma: f64) -> Array1<f64> {
    let next_actions = target.actor.forward(batch.next_obs.view());
    let next_q = target.critic.forward(batch.next_obs.view(), next_actions.view());
    &batch.rewards + &(next_q.column(0).to_owned() * &batch.not_done * gamma)
}

/// Mean squared TD error and its parameter gradients.
pub fn critic_loss_grad(
    critic: &Critic,
    obs: ArrayView2<f64>,
    actions: ArrayView2<f64>,
    targets: &Array1<f64>,
) -> (f64, CriticGrads) {
    let n = obs.nrows() as f64;
    let (q, cache) = critic.forward_cached(obs, actions);
    let err = &q.column(0) - targets;
    let loss = err.mapv(|e| e * e).sum() / n;
    let grad_q = (err * (2.0 / n)).insert_axis(ndarray::Axis(1));
    let (grads, _) = critic.backward(&cache, grad_q);
    (loss, grads)
}

/// `−mean Q(s, π(s))` and the actor parameter gradients.
pub fn actor_loss_grad(actor: &Actor, critic: &Critic, obs: ArrayView2<f64>) -> (f64, Mlp) {
    let n = obs.nrows() as f64;
    let (actions, a_cache) = actor.forward_cached(obs);
    let (q, c_cache) = critic.forward_cached(obs, actions.view());
    let loss = -q.sum() / n;
    let grad_q = Array2::from_elem((obs.nrows(), 1), -1.0 / n);
    let (_, grad_actions) = critic.backward(&c_cache, grad_q);
    (loss, actor.backward(&a_cache, &grad_actions))
}

/// Online networks, their targets and optimiser state.
#[derive(Debug, Clone)]
pub struct DdpgLearner {
    pub online: MlpParams,
    pub target: MlpParams,
    pub config: DdpgConfig,
    actor_opt: Adam,
    tower_opt: Adam,
    joint_opt: Adam,
}

impl DdpgLearner {
    pub fn new(params: MlpParams, config: DdpgConfig) -> Self {
        let actor_opt = Adam::new(&params.actor.net, config.actor_lr);
        let tower_opt = Adam::new(&params.critic.obs_tower, config.critic_lr);
        let joint_opt = Adam::new(&params.critic.joint, config.critic_lr);
        Self {
            target: params.clone(),
            online: params,
            config,
            actor_opt,
            tower_opt,
            joint_opt,
        }
    }

    /// One critic step, one actor step, then soft target updates.
    pub fn update(&mut self, batch: &[&Transition]) -> Result<UpdateStats> {
        if batch.is_empty() {
            return Err(Error::Precondition("ddpg update needs a non-empty batch".into()));
        }
        let b = Batch::from_transitions(batch);
        let targets = td_targets(&self.target, &b, self.config.gamma);

        let (critic_loss, cg) = critic_loss_grad(&self.online.critic, b.obs.view(), b.actions.view(), &targets);
        if !critic_loss.is_finite() {
            return Err(Error::NonFinite(format!(
                "critic loss (mean target {:.3e}, mean reward {:.3e})",
                targets.mean().unwrap_or(f64::NAN),
                b.rewards.mean().unwrap_or(f64::NAN)
            )));
        }
        self.tower_opt.step(&mut self.online.critic.obs_tower, &cg.obs_tower);
        self.joint_opt.step(&mut self.online.critic.joint, &cg.joint);

        let (actor_loss, ag) = actor_loss_grad(&self.online.actor, &self.online.critic, b.obs.view());
        if !actor_loss.is_finite() {
            return Err(Error::NonFinite(format!("actor loss (critic loss {critic_loss:.3e})")));
        }
        self.actor_opt.step(&mut self.online.actor.net, &ag);

        let tau = self.config.tau;
        self.target.actor.net.soft_update(&self.online.actor.net, tau);
        self.target.critic.obs_tower.soft_update(&self.online.critic.obs_tower, tau);
        self.target.critic.joint.soft_update(&self.online.critic.joint, tau);
        Ok(UpdateStats {
            critic_loss,
            actor_loss,
        })
    }
}
