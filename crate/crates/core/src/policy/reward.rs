use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights for `[step, dist_to_goal, collision, turn, clearance, goal]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights(pub [f64; 6]);

impl Default for RewardWeights {
    fn default() -> Self {
        Self([-0.43, 0.38, -57.90, 0.415, 0.67, 62.0])
    }
}

/// Per-step reward features, in weight order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RewardFeatures {
    /// Constant 1 every step.
    pub step: f64,
    /// Negative Euclidean distance to the goal.
    pub dist_to_goal: f64,
    /// 1 on collision.
    pub collision: f64,
    /// Negative absolute angular speed.
    pub turn: f64,
    /// Distance to the closest obstacle (minimum Lidar reading).
    pub clearance: f64,
    /// 1 on reaching the goal.
    pub goal: f64,
}

impl RewardFeatures {
    pub fn from_step(dist_to_goal: f64, collided: bool, angular: f64, min_range: f64, reached: bool) -> Self {
        Self {
            step: 1.0,
            dist_to_goal: -dist_to_goal,
            collision: f64::from(u8::from(collided)),
            turn: -angular.abs(),
            clearance: min_range,
            goal: f64::from(u8::from(reached)),
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.step, self.dist_to_goal, self.collision, self.turn, self.clearance, self.goal]
    }
}

/// Weighted sum of the six features.
pub fn reward(features: &[f64; 6], weights: &RewardWeights) -> Result<f64> {
    if let Some(i) = features.iter().position(|f| !f.is_finite()) {
        return Err(Error::NonFinite(format!("reward feature {i}")));
    }
    Ok(features.iter().zip(&weights.0).map(|(f, w)| f * w).sum())
}
