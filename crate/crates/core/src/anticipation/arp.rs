use serde::{Deserialize, Serialize};

use crate::geometry::{ray_circle, unit, Segment, Vec2};
use crate::hybrid::{hybrid_action, PlannerInput};
use crate::policy::{Action, Policy};
use crate::sensing::{assemble_observation, beam_angle, LidarScan, Observation, LIDAR_MAX_RANGE, NUM_BEAMS};
use crate::sfm::{cvm_step, AgentState, SfmParams};
use crate::world::{Body, Pose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArpConfig {
    /// Maximum rollout length in control steps.
    pub n: usize,
    /// Beyond this range the local map is unknown and treated as free.
    pub local_map_range: f64,
    /// Adjacent scan hits closer than this are joined into a wall segment.
    pub link_gap: f64,
}

impl Default for ArpConfig {
    fn default() -> Self {
        Self {
            n: 20,
            local_map_range: LIDAR_MAX_RANGE,
            link_gap: 0.5,
        }
    }
}

/// Static evidence from one scan: hit points, with neighbouring hits joined
/// into segments so rays cast from nearby poses cannot slip between them.
#[derive(Debug, Clone, Default)]
pub struct LocalMap {
    pub points: Vec<Vec2>,
    pub segments: Vec<Segment>,
}

impl LocalMap {
    pub fn from_scan(scan: &LidarScan, pose: &Pose, link_gap: f64) -> Self {
        let hits: Vec<Option<Vec2>> = scan
            .ranges
            .iter()
            .enumerate()
            .map(|(i, &r)| (r < scan.max_range).then(|| pose.position + unit(pose.heading + beam_angle(i)) * r))
            .collect();
        let mut segments = Vec::new();
        for w in hits.windows(2) {
            if let (Some(a), Some(b)) = (w[0], w[1]) {
                if (a - b).norm() < link_gap {
                    segments.push(Segment::new(a, b));
                }
            }
        }
        Self {
            points: hits.into_iter().flatten().collect(),
            segments,
        }
    }

    fn raycast(&self, agents: &[Body], origin: &Vec2, angle: f64, max_range: f64) -> f64 {
        let dir = unit(angle);
        let mut best = max_range;
        for s in &self.segments {
            if let Some(t) = s.ray_hit(origin, &dir) {
                best = best.min(t);
            }
        }
        for b in agents {
            if let Some(t) = ray_circle(origin, &dir, &b.center, b.radius) {
                best = best.min(t);
            }
        }
        best
    }

    /// Noiseless scan of the local map.
    pub fn scan(&self, agents: &[Body], pose: &Pose) -> LidarScan {
        let mut ranges = [0.0; NUM_BEAMS];
        for (i, r) in ranges.iter_mut().enumerate() {
            *r = self.raycast(agents, &pose.position, pose.heading + beam_angle(i), LIDAR_MAX_RANGE);
        }
        LidarScan {
            ranges,
            max_range: LIDAR_MAX_RANGE,
        }
    }

    /// Gap between the body surface and the nearest point, segment or agent.
    pub fn clearance(&self, body: &Body, agents: &[Body]) -> f64 {
        let mut d = f64::INFINITY;
        for p in &self.points {
            d = d.min((p - body.center).norm() - body.radius);
        }
        for s in &self.segments {
            d = d.min(s.distance_to_point(&body.center) - body.radius);
        }
        for a in agents {
            d = d.min((a.center - body.center).norm() - body.radius - a.radius);
        }
        d
    }
}

/// Robot state at the moment ARP is consulted.
pub struct ArpSnapshot<'a> {
    pub pose: Pose,
    pub velocity: Vec2,
    /// The observation the live planner sees (possibly noisy).
    pub obs: &'a Observation,
    pub agents: &'a [AgentState],
    pub goal: Vec2,
    pub goal_radius: f64,
}

/// Rolls the hybrid planner forward on a local map with constant-velocity
/// agents and returns the action taken where the robot came closest to an
/// obstacle (earliest step on ties).
pub fn arp_select(
    snap: &ArpSnapshot<'_>,
    policy: &dyn Policy,
    sfm: &SfmParams,
    cfg: &ArpConfig,
    dt: f64,
) -> Action {
    let map = LocalMap::from_scan(snap.obs.latest_scan(), &snap.pose, cfg.link_gap);
    let mut agents: Vec<AgentState> = snap
        .agents
        .iter()
        .filter(|a| (a.position() - snap.pose.position).norm() <= cfg.local_map_range)
        .cloned()
        .collect();
    let mut pose = snap.pose;
    let mut velocity = snap.velocity;
    let mut best: Option<(f64, Action)> = None;

    for i in 0..cfg.n.max(1) {
        let bodies: Vec<Body> = agents.iter().map(|a| a.body).collect();
        if i > 0 && (snap.goal - pose.position).norm() < snap.goal_radius {
            break;
        }
        let d = map
            .clearance(&Body::robot(pose.position), &bodies)
            .min(cfg.local_map_range);
        let sim_obs;
        let obs = if i == 0 {
            snap.obs
        } else {
            sim_obs = assemble_observation(&[map.scan(&bodies, &pose)], &pose, &snap.goal);
            &sim_obs
        };
        let input = PlannerInput {
            obs,
            pose: &pose,
            velocity: &velocity,
            agents: &agents,
        };
        let action = hybrid_action(policy, &input, sfm, true, dt);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, action));
        }
        if i > 0 && d <= 0.0 {
            break;
        }
        velocity = pose.forward() * action.linear;
        pose = pose.integrate(action.linear, action.angular, dt);
        agents = agents.iter().map(|a| cvm_step(a, dt)).collect();
    }
    best.expect("at least one rollout step").1
}
