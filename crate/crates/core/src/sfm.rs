//! Social force model with collision prediction.
//!
//! Pairwise repulsion is evaluated at the constant-velocity time of closest
//! approach `t*` rather than at the current configuration. The same kernel
//! drives the robot's velocity correction and the simulated pedestrians.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::world::{Body, Pose, WorldMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SfmParams {
    /// Force amplitude `A` (m/s²).
    pub a: f64,
    /// Decay length `B` (m).
    pub b: f64,
    /// Collision-prediction lookahead (s).
    pub horizon: f64,
    /// Pedestrian goal-attraction relaxation time (s).
    pub relaxation_time: f64,
    /// Conversion from lateral velocity change to angular rate (rad/s per m/s).
    pub angular_gain: f64,
    /// Only agents (and walls, for pedestrians) closer than this contribute (m).
    pub sensing_range: f64,
    /// Time scale of the `1 / (1 + t*/τ)` urgency weight (s).
    pub urgency_time: f64,
}

impl Default for SfmParams {
    fn default() -> Self {
        Self {
            a: 0.7,
            b: 10.0 / 17.0,
            horizon: 5.0,
            relaxation_time: 0.5,
            angular_gain: 1.0,
            sensing_range: 5.0,
            urgency_time: 1.0,
        }
    }
}

impl SfmParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.a >= 0.0) {
            return Err("sfm.a must be ≥ 0".into());
        }
        for (name, v) in [
            ("sfm.b", self.b),
            ("sfm.horizon", self.horizon),
            ("sfm.relaxation_time", self.relaxation_time),
            ("sfm.sensing_range", self.sensing_range),
            ("sfm.urgency_time", self.urgency_time),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be > 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub body: Body,
    pub velocity: Vec2,
    pub goal: Vec2,
    pub max_speed: f64,
}

impl AgentState {
    pub fn position(&self) -> Vec2 {
        self.body.center
    }
}

/// `t* = clamp(−(p·v)/‖v‖², 0, horizon)`, zero for near-zero relative velocity.
pub fn time_to_closest_approach(rel_pos: &Vec2, rel_vel: &Vec2, horizon: f64) -> f64 {
    let v2 = rel_vel.norm_squared();
    if v2.sqrt() < 1e-6 {
        return 0.0;
    }
    (-rel_pos.dot(rel_vel) / v2).clamp(0.0, horizon)
}

/// Repulsive force on the body at `pos` (moving with `vel`) exerted by `other`.
pub fn pair_force(
    pos: &Vec2,
    vel: &Vec2,
    radius: f64,
    other_pos: &Vec2,
    other_vel: &Vec2,
    other_radius: f64,
    params: &SfmParams,
) -> Vec2 {
    let t = time_to_closest_approach(&(other_pos - pos), &(other_vel - vel), params.horizon);
    let away = (pos + vel * t) - (other_pos + other_vel * t);
    let d = away.norm();
    let dir = if d > 1e-9 {
        away / d
    } else {
        // predicted exact overlap: push along the current separation
        let now = pos - other_pos;
        let n = now.norm();
        if n > 1e-12 {
            now / n
        } else {
            return Vec2::zeros();
        }
    };
    let magnitude = params.a * ((radius + other_radius - d) / params.b).exp() / (1.0 + t / params.urgency_time);
    dir * magnitude
}

/// Robot velocity correction `(Δv_l, Δv_φ)` from agents within sensing range.
pub fn repulsive_velocity_change(
    robot: &Pose,
    robot_velocity: &Vec2,
    robot_radius: f64,
    agents: &[AgentState],
    params: &SfmParams,
    dt: f64,
) -> (f64, f64) {
    assert!(dt > 0.0, "dt must be positive");
    let mut force = Vec2::zeros();
    for agent in agents {
        if (agent.position() - robot.position).norm() > params.sensing_range {
            continue;
        }
        force += pair_force(
            &robot.position,
            robot_velocity,
            robot_radius,
            &agent.position(),
            &agent.velocity,
            agent.body.radius,
            params,
        );
    }
    let fwd = robot.forward();
    let left = Vec2::new(-fwd.y, fwd.x);
    (force.dot(&fwd) * dt, params.angular_gain * force.dot(&left) * dt)
}

/// One synchronous SFM update of a simulated pedestrian.
pub fn sfm_agent_step(
    agent: &AgentState,
    neighbors: &[AgentState],
    robot: Option<(&Body, &Vec2)>,
    map: &WorldMap,
    params: &SfmParams,
    dt: f64,
) -> AgentState {
    assert!(dt > 0.0, "dt must be positive");
    let pos = agent.position();
    let to_goal = agent.goal - pos;
    let dist = to_goal.norm();
    let desired = if dist > 1e-12 {
        to_goal * (agent.max_speed.min(dist / params.relaxation_time) / dist)
    } else {
        Vec2::zeros()
    };
    let mut accel = (desired - agent.velocity) / params.relaxation_time;

    for other in neighbors {
        if (other.position() - pos).norm() > params.sensing_range {
            continue;
        }
        accel += pair_force(
            &pos,
            &agent.velocity,
            agent.body.radius,
            &other.position(),
            &other.velocity,
            other.body.radius,
            params,
        );
    }
    if let Some((body, vel)) = robot {
        if (body.center - pos).norm() <= params.sensing_range {
            accel += pair_force(&pos, &agent.velocity, agent.body.radius, &body.center, vel, body.radius, params);
        }
    }
    let (wall, wall_dist) = map.nearest_static(&pos);
    if wall_dist <= params.sensing_range && wall_dist > 1e-12 {
        accel += (pos - wall) / wall_dist * params.a * ((agent.body.radius - wall_dist) / params.b).exp();
    }

    let mut velocity = agent.velocity + accel * dt;
    let speed = velocity.norm();
    if speed > agent.max_speed {
        velocity *= agent.max_speed / speed;
    }
    AgentState {
        body: Body::new(pos + velocity * dt, agent.body.radius),
        velocity,
        ..*agent
    }
}

/// Constant-velocity propagation.
pub fn cvm_step(agent: &AgentState, dt: f64) -> AgentState {
    assert!(dt > 0.0, "dt must be positive");
    AgentState {
        body: Body::new(agent.position() + agent.velocity * dt, agent.body.radius),
        ..*agent
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{AGENT_RADIUS, ROBOT_RADIUS};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn agent(x: f64, y: f64, vx: f64, vy: f64) -> AgentState {
        AgentState {
            body: Body::agent(Vec2::new(x, y)),
            velocity: Vec2::new(vx, vy),
            goal: Vec2::new(x, y),
            max_speed: 1.2,
        }
    }

    #[test]
    fn closest_approach_examples() {
        assert_abs_diff_eq!(time_to_closest_approach(&Vec2::new(4.0, 0.0), &Vec2::new(-1.0, 0.0), 10.0), 4.0);
        assert_eq!(time_to_closest_approach(&Vec2::new(4.0, 0.0), &Vec2::new(1.0, 0.0), 10.0), 0.0);
        // oracle: ‖(3, 4 − t)‖ is minimised at t = 4
        let brute = (0..=10_000)
            .map(|k| k as f64 * 1e-3)
            .min_by(|a, b| {
                let fa = (9.0 + (4.0 - a).powi(2)).sqrt();
                let fb = (9.0 + (4.0 - b).powi(2)).sqrt();
                fa.total_cmp(&fb)
            })
            .unwrap();
        let t = time_to_closest_approach(&Vec2::new(3.0, 4.0), &Vec2::new(0.0, -1.0), 10.0);
        assert_abs_diff_eq!(t, brute, epsilon = 1e-3);
        assert_abs_diff_eq!(t, 4.0);
        assert_eq!(time_to_closest_approach(&Vec2::new(1.0, 0.0), &Vec2::new(1e-9, 0.0), 10.0), 0.0);
        assert_eq!(time_to_closest_approach(&Vec2::new(40.0, 0.0), &Vec2::new(-1.0, 0.0), 5.0), 5.0);
    }

    #[test]
    fn no_agents_no_correction() {
        let dv = repulsive_velocity_change(&Pose::new(0.0, 0.0, 0.0), &Vec2::new(1.0, 0.0), ROBOT_RADIUS, &[], &SfmParams::default(), 0.2);
        assert_eq!(dv, (0.0, 0.0));
    }

    #[test]
    fn head_on_agent_slows_robot() {
        let dv = repulsive_velocity_change(
            &Pose::new(0.0, 0.0, 0.0),
            &Vec2::new(1.0, 0.0),
            ROBOT_RADIUS,
            &[agent(3.0, 0.0, -1.0, 0.0)],
            &SfmParams::default(),
            0.2,
        );
        assert!(dv.0 < 0.0, "{dv:?}");
    }

    #[test]
    fn mirrored_agents_cancel_turn() {
        let dv = repulsive_velocity_change(
            &Pose::new(0.0, 0.0, 0.0),
            &Vec2::new(1.0, 0.0),
            ROBOT_RADIUS,
            &[agent(3.0, 1.0, -0.5, -0.8), agent(3.0, -1.0, -0.5, 0.8)],
            &SfmParams::default(),
            0.2,
        );
        assert!(dv.0 < 0.0);
        assert!(dv.1.abs() < 1e-9, "{dv:?}");
    }

    #[test]
    fn agents_beyond_range_ignored() {
        let dv = repulsive_velocity_change(
            &Pose::new(0.0, 0.0, 0.0),
            &Vec2::new(1.0, 0.0),
            ROBOT_RADIUS,
            &[agent(5.5, 0.0, -1.0, 0.0)],
            &SfmParams::default(),
            0.2,
        );
        assert_eq!(dv, (0.0, 0.0));
    }

    #[test]
    fn correction_decreases_with_distance_head_on() {
        let params = SfmParams::default();
        let mags: Vec<f64> = (1..=5)
            .map(|d| {
                let (l, p) = repulsive_velocity_change(
                    &Pose::new(0.0, 0.0, 0.0),
                    &Vec2::new(1.0, 0.0),
                    ROBOT_RADIUS,
                    &[agent(d as f64, 0.0, -1.0, 0.0)],
                    &params,
                    0.2,
                );
                (l * l + p * p).sqrt()
            })
            .collect();
        assert!(mags.windows(2).all(|w| w[0] > w[1]), "{mags:?}");
    }

    #[test]
    fn receding_agent_pushes_less_than_approaching() {
        let params = SfmParams::default();
        let pose = Pose::new(0.0, 0.0, 0.0);
        let d = 2.0 * (ROBOT_RADIUS + AGENT_RADIUS) + 0.3;
        let recede = repulsive_velocity_change(&pose, &Vec2::zeros(), ROBOT_RADIUS, &[agent(d, 0.0, 1.0, 0.0)], &params, 0.2);
        let approach = repulsive_velocity_change(&pose, &Vec2::zeros(), ROBOT_RADIUS, &[agent(d, 0.0, -1.0, 0.0)], &params, 0.2);
        assert!(recede.0.abs() < approach.0.abs());
    }

    #[test]
    fn lone_agent_first_step_speed() {
        let map = WorldMap::empty(40.0, 40.0);
        let mut a = agent(15.0, 20.0, 0.0, 0.0);
        a.goal = Vec2::new(25.0, 20.0);
        let next = sfm_agent_step(&a, &[], None, &map, &SfmParams::default(), 0.2);
        // (1.2 − 0) / 0.5 · 0.2
        assert_abs_diff_eq!(next.velocity.norm(), 0.48, epsilon = 1e-12);
        assert_abs_diff_eq!(next.position().x, 15.0 + 0.48 * 0.2, epsilon = 1e-12);
    }

    #[test]
    fn agent_at_goal_stays() {
        let map = WorldMap::empty(40.0, 40.0);
        let mut a = agent(20.0, 20.0, 0.0, 0.0);
        for _ in 0..50 {
            a = sfm_agent_step(&a, &[], None, &map, &SfmParams::default(), 0.2);
        }
        assert!((a.position() - Vec2::new(20.0, 20.0)).norm() < 1e-6);
    }

    #[test]
    fn agent_at_max_speed_keeps_it() {
        let map = WorldMap::empty(40.0, 40.0);
        let mut a = agent(10.0, 20.0, 1.2, 0.0);
        a.goal = Vec2::new(30.0, 20.0);
        let next = sfm_agent_step(&a, &[], None, &map, &SfmParams::default(), 0.2);
        assert_abs_diff_eq!(next.velocity.norm(), 1.2, epsilon = 1e-12);
    }

    #[test]
    fn cvm_examples() {
        let mut a = agent(0.0, 0.0, 1.0, 0.0);
        for _ in 0..5 {
            a = cvm_step(&a, 0.2);
        }
        assert_abs_diff_eq!(a.position().x, 1.0, epsilon = 1e-12);
        assert_eq!(a.position().y, 0.0);
        let still = agent(2.0, 3.0, 0.0, 0.0);
        assert_eq!(cvm_step(&still, 0.2).position(), Vec2::new(2.0, 3.0));
        let b = cvm_step(&agent(2.0, 3.0, -0.5, 1.0), 0.2);
        assert_abs_diff_eq!(b.position().x, 1.9, epsilon = 1e-12);
        assert_abs_diff_eq!(b.position().y, 3.2, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn sfm_step_clamps_speed_and_is_deterministic(
            x in 2.0..18.0f64, y in 2.0..18.0f64, vx in -3.0..3.0f64, vy in -3.0..3.0f64,
            gx in 0.0..20.0f64, gy in 0.0..20.0f64, ox in 0.0..20.0f64, oy in 0.0..20.0f64,
        ) {
            let map = crate::world::builtin("building_3").unwrap();
            let mut a = agent(x, y, vx, vy);
            a.goal = Vec2::new(gx, gy);
            let others = [agent(ox, oy, -vy, vx)];
            let robot = Body::robot(Vec2::new(oy, ox));
            let rv = Vec2::new(0.5, 0.0);
            let n1 = sfm_agent_step(&a, &others, Some((&robot, &rv)), &map, &SfmParams::default(), 0.2);
            let n2 = sfm_agent_step(&a, &others, Some((&robot, &rv)), &map, &SfmParams::default(), 0.2);
            prop_assert!(n1.velocity.norm() <= a.max_speed + 1e-9);
            prop_assert_eq!(n1.velocity.x.to_bits(), n2.velocity.x.to_bits());
            prop_assert_eq!(n1.position().y.to_bits(), n2.position().y.to_bits());
        }

        #[test]
        fn cvm_composes_linearly(x in -5.0..5.0f64, vx in -2.0..2.0f64, vy in -2.0..2.0f64, n in 1usize..30) {
            let mut a = agent(x, 0.0, vx, vy);
            let start = a;
            for _ in 0..n {
                a = cvm_step(&a, 0.2);
            }
            let once = cvm_step(&start, 0.2 * n as f64);
            prop_assert!((a.position() - once.position()).norm() < 1e-12);
        }
    }
}
