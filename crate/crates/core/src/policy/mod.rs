//! Velocity commands, policies, the reward, and the DDPG trainer.

pub mod checkpoint;
pub mod ddpg;
pub mod gradcheck;
pub mod mlp;
pub mod networks;
pub mod replay;
pub mod reward;
pub mod train;

pub use ddpg::{DdpgConfig, DdpgLearner, UpdateStats};
pub use networks::{actor_forward, critic_forward, Actor, Critic, MlpParams, NetworkShape};
pub use replay::{ReplayBuffer, Transition};
pub use reward::{reward, RewardFeatures, RewardWeights};
pub use train::{initial_params, train, TrainConfig, TrainEnv, TrainLogRow, TrainReport};

use std::sync::Arc;

use crate::sensing::Observation;

pub const LINEAR_MIN: f64 = -0.2;
pub const LINEAR_MAX: f64 = 1.0;
pub const ANGULAR_MAX: f64 = 1.0;

/// Unicycle velocity command: linear (m/s) and angular (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Action {
    pub linear: f64,
    pub angular: f64,
}

impl Action {
    pub const STOP: Action = Action {
        linear: 0.0,
        angular: 0.0,
    };

    pub fn new(linear: f64, angular: f64) -> Self {
        Self { linear, angular }
    }

    /// Saturates both components to the action box.
    pub fn clamped(self) -> Self {
        Self {
            linear: self.linear.clamp(LINEAR_MIN, LINEAR_MAX),
            angular: self.angular.clamp(-ANGULAR_MAX, ANGULAR_MAX),
        }
    }

    pub fn within_bounds(&self) -> bool {
        (LINEAR_MIN..=LINEAR_MAX).contains(&self.linear) && (-ANGULAR_MAX..=ANGULAR_MAX).contains(&self.angular)
    }
}

/// Maps an observation to a velocity command.
pub trait Policy: Send + Sync {
    fn act(&self, obs: &Observation) -> Action;

    fn name(&self) -> &str;
}

impl<P: Policy + ?Sized> Policy for Arc<P> {
    fn act(&self, obs: &Observation) -> Action {
        (**self).act(obs)
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}

/// Reactive goal seeker: turn toward the goal bearing, slow down near
/// obstacles. No anticipation.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScriptedPolicy;

pub fn scripted_policy(obs: &Observation) -> Action {
    let min_range = obs.latest_scan().min_range();
    let (_, bearing) = obs.goal_polar;
    Action {
        linear: (0.5 + 0.1 * min_range).min(LINEAR_MAX),
        angular: (2.0 * bearing).clamp(-ANGULAR_MAX, ANGULAR_MAX),
    }
}

impl Policy for ScriptedPolicy {
    fn act(&self, obs: &Observation) -> Action {
        scripted_policy(obs)
    }

    fn name(&self) -> &str {
        "scripted"
    }
}

/// Always returns the same command. Used for forced-outcome fixtures.
#[derive(Debug, Clone, Copy)]
pub struct ConstantPolicy(pub Action);

impl Policy for ConstantPolicy {
    fn act(&self, _obs: &Observation) -> Action {
        self.0
    }

    fn name(&self) -> &str {
        "constant"
    }
}

/// Trained actor network as a policy.
#[derive(Debug, Clone)]
pub struct ActorPolicy {
    pub actor: Actor,
}

impl Policy for ActorPolicy {
    fn act(&self, obs: &Observation) -> Action {
        // observations are built by the simulator and always match the network
        self.actor
            .act(&obs.to_vector())
            .expect("observation matches actor input")
    }

    fn name(&self) -> &str {
        "actor"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{LidarScan, Observation};
    use std::f64::consts::PI;

    fn obs(min_range: f64, bearing: f64) -> Observation {
        let mut scan = LidarScan::uniform(5.0);
        scan.ranges[10] = min_range;
        Observation {
            lidar_stack: vec![scan],
            goal_polar: (6.0, bearing),
        }
    }

    #[test]
    fn scripted_examples() {
        assert_eq!(scripted_policy(&obs(5.0, 0.0)), Action::new(1.0, 0.0));
        assert_eq!(scripted_policy(&obs(5.0, PI / 2.0)).angular, 1.0);
        assert!((scripted_policy(&obs(0.5, 0.0)).linear - 0.55).abs() < 1e-12);
        assert_eq!(scripted_policy(&obs(5.0, -0.25)).angular, -0.5);
    }

    #[test]
    fn clamping() {
        assert_eq!(Action::new(3.0, -4.0).clamped(), Action::new(1.0, -1.0));
        assert!(Action::new(-0.2, 1.0).within_bounds());
        assert!(!Action::new(-0.21, 0.0).within_bounds());
    }
}
