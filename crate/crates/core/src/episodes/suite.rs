//! Forced-intersection fixtures: constant-velocity agents timed to cross the
//! robot's straight path to its goal.

use rayon::prelude::*;

use super::{with_workers, AgentBehavior, Episode, EpisodeConfig, EpisodeSetup, Metrics};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::hybrid::PlannerMode;
use crate::policy::Policy;
use crate::sfm::AgentState;
use crate::world::{builtin, Body, Pose};

pub const INTERSECTION_BEARINGS_DEG: [f64; 5] = [-60.0, -30.0, 0.0, 30.0, 60.0];

const SUITE_MAP: &str = "empty_80x80";
const START: (f64, f64) = (20.0, 40.0);
const GOAL_DISTANCE: f64 = 8.0;
/// Robot cruise speed in open space; crossings are timed against it.
const NOMINAL_SPEED: f64 = 1.0;
/// Agents reach their crossing point exactly when a robot cruising at
/// `NOMINAL_SPEED` would, so doing nothing collides. Static or very slow
/// agents are kept at least this far back along their line, off the path.
const STATIC_OFFSET: f64 = 1.5;

/// One crossing: bearing of the agent's motion measured from the robot's
/// lateral axis (0° = perpendicular, positive = drifting the robot's way),
/// the side it comes from, and where along the path it crosses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub bearing_deg: f64,
    pub from_left: bool,
    pub at: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionCase {
    pub crossings: Vec<Crossing>,
}

fn c(bearing_deg: f64, from_left: bool, at: f64) -> Crossing {
    Crossing {
        bearing_deg,
        from_left,
        at,
    }
}

/// Twelve cases: one per bearing with a single agent, then four two-agent
/// and three three-agent combinations.
pub fn intersection_cases() -> Vec<IntersectionCase> {
    let case = |crossings: Vec<Crossing>| IntersectionCase { crossings };
    vec![
        case(vec![c(-60.0, true, 4.0)]),
        case(vec![c(-30.0, false, 4.0)]),
        case(vec![c(0.0, true, 4.0)]),
        case(vec![c(30.0, false, 4.0)]),
        case(vec![c(60.0, true, 4.0)]),
        case(vec![c(-60.0, true, 3.0), c(30.0, false, 5.0)]),
        case(vec![c(-30.0, false, 3.0), c(60.0, true, 5.0)]),
        case(vec![c(0.0, true, 3.0), c(0.0, false, 5.0)]),
        case(vec![c(30.0, true, 3.5), c(-60.0, false, 5.5)]),
        case(vec![c(-60.0, true, 3.0), c(0.0, false, 4.5), c(60.0, true, 6.0)]),
        case(vec![c(-30.0, false, 3.0), c(30.0, true, 4.5), c(0.0, false, 6.0)]),
        case(vec![c(60.0, false, 3.0), c(-30.0, true, 4.5), c(-60.0, false, 6.0)]),
    ]
}

fn agent_for(crossing: &Crossing, speed: f64) -> AgentState {
    let th = crossing.bearing_deg.to_radians();
    // robot drives along +x; an agent from the left moves toward −y
    let dir = if crossing.from_left {
        Vec2::new(th.sin(), -th.cos())
    } else {
        Vec2::new(th.sin(), th.cos())
    };
    let point = Vec2::new(START.0 + crossing.at, START.1);
    let t_cross = crossing.at / NOMINAL_SPEED;
    let start = point - dir * (speed * t_cross).max(STATIC_OFFSET);
    AgentState {
        body: Body::agent(start),
        velocity: dir * speed,
        goal: point + dir * 100.0,
        max_speed: speed,
    }
}

/// The twelve setups at a given agent speed.
pub fn intersection_fixtures(speed: f64) -> Vec<EpisodeSetup> {
    intersection_cases()
        .iter()
        .map(|case| EpisodeSetup {
            start: Pose::new(START.0, START.1, 0.0),
            goal: Vec2::new(START.0 + GOAL_DISTANCE, START.1),
            agents: case.crossings.iter().map(|x| agent_for(x, speed)).collect(),
            regoal_agents: false,
        })
        .collect()
}

/// Runs the twelve fixtures with constant-velocity agents at `speed`.
/// Map, agent count/behaviour and sampling in `base` are overridden.
pub fn intersection_suite(base: &EpisodeConfig, mode: PlannerMode, speed: f64, policy: &dyn Policy) -> Result<Metrics> {
    if !(speed >= 0.0 && speed.is_finite()) {
        return Err(Error::Precondition(format!("agent speed must be ≥ 0, got {speed}")));
    }
    let mut cfg = base.clone();
    cfg.map = std::sync::Arc::new(builtin(SUITE_MAP).expect("suite map is built in"));
    cfg.mode = mode;
    cfg.agents.behavior = AgentBehavior::Cvm;
    cfg.agents.max_speed = speed;
    cfg.validate()?;
    let fixtures = intersection_fixtures(speed);
    let results: Vec<_> = with_workers(|| {
        fixtures
            .into_par_iter()
            .enumerate()
            .map(|(i, setup)| Episode::new(&cfg, policy, setup, super::episode_seed(cfg.seed, i as u64)).run())
            .collect()
    });
    Ok(Metrics::from_results(&results))
}
