use serde::{Deserialize, Serialize};

use crate::geometry::{ray_circle, unit, Vec2};
use crate::sensing::{beam_angle, LidarScan};
use crate::sfm::AgentState;
use crate::world::{Body, Pose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    /// Propagation steps.
    pub n: usize,
    /// A circle every this many steps.
    pub every: usize,
    /// Per-step radius growth (m).
    pub sigma: f64,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            n: 20,
            every: 5,
            sigma: 0.01,
        }
    }
}

/// Predicted agent disk `k` steps ahead.
#[derive(Debug, Clone, PartialEq)]
pub struct AnticipativeCircle {
    pub agent_id: usize,
    pub step_index: usize,
    pub center: Vec2,
    pub radius: f64,
}

impl AnticipativeCircle {
    pub fn body(&self) -> Body {
        Body::new(self.center, self.radius)
    }
}

/// Rounds to a picometre grid so decimal inputs give decimal radii
/// (0.15 + 0.3 would otherwise land one ulp below 0.45).
fn snap(r: f64) -> f64 {
    (r * 1e12).round() / 1e12
}

/// Circles at `k = every, 2·every, … ≤ n`, centred on the constant-velocity
/// prediction, radius `k·Σ + R_p`. Ordered by agent, then step.
pub fn app_generate(agents: &[AgentState], n: usize, every: usize, sigma: f64, dt: f64) -> Vec<AnticipativeCircle> {
    assert!(every >= 1 && n >= every, "need n ≥ every ≥ 1");
    let mut out = Vec::with_capacity(agents.len() * (n / every));
    for (id, agent) in agents.iter().enumerate() {
        for k in (every..=n).step_by(every) {
            out.push(AnticipativeCircle {
                agent_id: id,
                step_index: k,
                center: agent.position() + agent.velocity * (k as f64 * dt),
                radius: snap(k as f64 * sigma + agent.body.radius),
            });
        }
    }
    out
}

/// Drops, per agent, the first circle the robot overlaps and every later one.
pub fn app_truncate_on_hit(circles: &[AnticipativeCircle], robot: &Body) -> Vec<AnticipativeCircle> {
    let mut cut: Vec<(usize, usize)> = Vec::new();
    for c in circles {
        if robot.overlaps(&c.body()) {
            match cut.iter_mut().find(|(id, _)| *id == c.agent_id) {
                Some((_, k)) => *k = (*k).min(c.step_index),
                None => cut.push((c.agent_id, c.step_index)),
            }
        }
    }
    circles
        .iter()
        .filter(|c| !cut.iter().any(|&(id, k)| id == c.agent_id && c.step_index >= k))
        .cloned()
        .collect()
}

/// Circles appear to the Lidar as obstacles: each beam reads the nearer of
/// its original range and its first circle hit.
pub fn app_augment_scan(scan: &LidarScan, circles: &[AnticipativeCircle], pose: &Pose) -> LidarScan {
    let mut out = scan.clone();
    if circles.is_empty() {
        return out;
    }
    for (i, r) in out.ranges.iter_mut().enumerate() {
        let dir = unit(pose.heading + beam_angle(i));
        for c in circles {
            if let Some(t) = ray_circle(&pose.position, &dir, &c.center, c.radius) {
                *r = r.min(t);
            }
        }
        *r = r.clamp(0.0, scan.max_range);
    }
    out
}
