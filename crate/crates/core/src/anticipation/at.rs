use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Segment, Vec2};
use crate::policy::{Action, ANGULAR_MAX};
use crate::sensing::LIDAR_MAX_RANGE;
use crate::sfm::AgentState;
use crate::world::{Pose, ROBOT_RADIUS};

pub const AT_TURN_STEPS: u8 = 4;
pub const AT_ADVANCE_STEPS: u8 = 2;

/// Which command of the recovery sequence was emitted last.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtPhase {
    Inactive,
    Turning(u8),
    Advancing(u8),
}

#[derive(Debug, Clone)]
pub struct AtState {
    pub phase: AtPhase,
    /// ±1, drawn when a sequence starts.
    pub turn_direction: f64,
    rng: ChaCha8Rng,
}

impl AtState {
    pub fn new(seed: u64) -> Self {
        Self {
            phase: AtPhase::Inactive,
            turn_direction: 1.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// The command that will be emitted this step unless a collision is
    /// predicted for it. Callers run the collision check on this action.
    pub fn pending_action(&self, proposed: Action) -> Action {
        match self.phase {
            AtPhase::Turning(k) if k < AT_TURN_STEPS => self.turn(),
            AtPhase::Turning(_) | AtPhase::Advancing(1) => Action::new(proposed.linear, 0.0),
            _ => proposed,
        }
    }

    fn turn(&self) -> Action {
        Action::new(0.0, self.turn_direction * ANGULAR_MAX)
    }

    fn start(&mut self) -> Action {
        self.turn_direction = if self.rng.random_bool(0.5) { 1.0 } else { -1.0 };
        self.phase = AtPhase::Turning(1);
        self.turn()
    }
}

/// Default extra clearance demanded by the episode runner. Scan points
/// sample surfaces at the beam spacing, so a corner between two beams can
/// sit a few millimetres closer than any point.
pub const AT_DEFAULT_MARGIN: f64 = 0.05;

/// True iff the robot disk, swept over one unicycle step under `action`,
/// comes within the robot radius of any scan point.
pub fn at_predict_collision(pose: &Pose, action: &Action, points: &[Vec2], dt: f64) -> bool {
    at_predict_collision_with(pose, action, points, dt, 0.0)
}

/// As [`at_predict_collision`] with the robot radius inflated by `margin`.
pub fn at_predict_collision_with(pose: &Pose, action: &Action, points: &[Vec2], dt: f64, margin: f64) -> bool {
    let next = pose.integrate(action.linear, action.angular, dt);
    let path = Segment::new(pose.position, next.position);
    points.iter().any(|p| path.distance_to_point(p) < ROBOT_RADIUS + margin)
}

/// Any agent within Lidar range whose next constant-velocity position
/// intersects the robot's swept disk for this step.
pub fn moving_obstacle_near(pose: &Pose, action: &Action, agents: &[AgentState], dt: f64) -> bool {
    let next = pose.integrate(action.linear, action.angular, dt);
    let path = Segment::new(pose.position, next.position);
    agents.iter().any(|a| {
        (a.position() - pose.position).norm() <= LIDAR_MAX_RANGE
            && path.distance_to_point(&(a.position() + a.velocity * dt)) < ROBOT_RADIUS + a.body.radius
    })
}

/// Advances the turn sequence by one control step. `collision_predicted`
/// refers to [`AtState::pending_action`].
pub fn at_step(
    mut state: AtState,
    proposed: Action,
    collision_predicted: bool,
    moving_obstacle_near: bool,
) -> (Action, AtState) {
    let out = match state.phase {
        AtPhase::Turning(k) if k < AT_TURN_STEPS => {
            state.phase = AtPhase::Turning(k + 1);
            state.turn()
        }
        AtPhase::Turning(_) | AtPhase::Advancing(1) => {
            if collision_predicted {
                // the sequence restarts until it can run to completion
                state.start()
            } else {
                state.phase = match state.phase {
                    AtPhase::Turning(_) => AtPhase::Advancing(1),
                    _ => AtPhase::Advancing(2),
                };
                Action::new(proposed.linear, 0.0)
            }
        }
        AtPhase::Inactive | AtPhase::Advancing(_) => {
            state.phase = AtPhase::Inactive;
            if collision_predicted && !moving_obstacle_near {
                state.start()
            } else {
                proposed
            }
        }
    };
    (out, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Body;

    #[test]
    fn predict_examples() {
        let pose = Pose::new(0.0, 0.0, 0.0);
        assert!(at_predict_collision(&pose, &Action::new(1.0, 0.0), &[Vec2::new(0.4, 0.0)], 0.2));
        assert!(!at_predict_collision(&pose, &Action::new(1.0, 0.0), &[Vec2::new(2.0, 0.0)], 0.2));
        let ring: Vec<Vec2> = (0..36)
            .map(|i| crate::geometry::unit(i as f64 * 0.17) * 0.31)
            .collect();
        assert!(!at_predict_collision(&pose, &Action::new(0.0, 0.5), &ring, 0.2));
    }

    #[test]
    fn wall_point_a_tenth_ahead_of_the_surface() {
        // a point 0.1 m beyond the robot's front surface
        let pose = Pose::new(0.0, 0.0, 0.0);
        let p = Vec2::new(ROBOT_RADIUS + 0.1, 0.0);
        assert!(at_predict_collision(&pose, &Action::new(1.0, 0.0), &[p], 0.2));
    }

    #[test]
    fn step_examples() {
        let proposed = Action::new(0.7, 0.1);
        let (a, s) = at_step(AtState::new(0), proposed, false, false);
        assert_eq!((a, s.phase), (proposed, AtPhase::Inactive));

        let (a, s) = at_step(AtState::new(0), proposed, true, false);
        assert_eq!(a.linear, 0.0);
        assert_eq!(a.angular.abs(), 1.0);
        assert_eq!(s.phase, AtPhase::Turning(1));

        let (a, s) = at_step(AtState::new(0), proposed, true, true);
        assert_eq!((a, s.phase), (proposed, AtPhase::Inactive));
    }

    #[test]
    fn full_sequence_is_four_turns_then_two_advances() {
        let proposed = Action::new(0.8, -0.3);
        let (first, mut s) = at_step(AtState::new(5), proposed, true, false);
        let mut emitted = vec![first];
        for _ in 0..5 {
            let (a, next) = at_step(s, proposed, false, false);
            emitted.push(a);
            s = next;
        }
        let dir = emitted[0].angular;
        for a in &emitted[..4] {
            assert_eq!(*a, Action::new(0.0, dir));
        }
        for a in &emitted[4..] {
            assert_eq!(*a, Action::new(0.8, 0.0));
        }
        assert_eq!(s.phase, AtPhase::Advancing(2));
        let (a, s) = at_step(s, proposed, false, false);
        assert_eq!((a, s.phase), (proposed, AtPhase::Inactive));
    }

    #[test]
    fn blocked_advance_restarts_the_turn() {
        let proposed = Action::new(0.8, 0.0);
        let (_, mut s) = at_step(AtState::new(9), proposed, true, false);
        for _ in 0..3 {
            s = at_step(s, proposed, false, false).1;
        }
        assert_eq!(s.phase, AtPhase::Turning(4));
        assert_eq!(s.pending_action(proposed), Action::new(0.8, 0.0));
        let (a, s) = at_step(s, proposed, true, false);
        assert_eq!(a.linear, 0.0);
        assert_eq!(s.phase, AtPhase::Turning(1));
    }

    #[test]
    fn turn_direction_is_seeded() {
        let dirs = |seed| {
            let mut s = AtState::new(seed);
            (0..20).map(|_| s.start().angular).collect::<Vec<_>>()
        };
        assert_eq!(dirs(3), dirs(3));
        let d = dirs(3);
        assert!(d.contains(&1.0) && d.contains(&-1.0));
    }

    #[test]
    fn moving_agent_on_path_is_detected() {
        let pose = Pose::new(0.0, 0.0, 0.0);
        let incoming = AgentState {
            body: Body::agent(Vec2::new(1.2, 0.0)),
            velocity: Vec2::new(-2.0, 0.0),
            goal: Vec2::new(-5.0, 0.0),
            max_speed: 2.0,
        };
        assert!(moving_obstacle_near(&pose, &Action::new(1.0, 0.0), &[incoming.clone()], 0.2));
        let far = AgentState {
            body: Body::agent(Vec2::new(4.0, 3.0)),
            ..incoming
        };
        assert!(!moving_obstacle_near(&pose, &Action::new(1.0, 0.0), &[far], 0.2));
    }
}
