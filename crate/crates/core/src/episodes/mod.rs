//! Episode loop, outcome detection, metrics and the evaluation suites.

mod metrics;
mod suite;
mod sweep;

pub use metrics::Metrics;
pub use suite::{intersection_cases, intersection_fixtures, intersection_suite, IntersectionCase, INTERSECTION_BEARINGS_DEG};
pub use sweep::{sweep, SweepAxis, SweepRow};

use std::fmt;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anticipation::{
    app_augment_scan, app_generate, app_truncate_on_hit, arp::ArpSnapshot, arp_select, at_predict_collision_with,
    at_step, moving_obstacle_near, AnticipativeCircle, AppConfig, ArpConfig, AtState, AT_DEFAULT_MARGIN,
};
use crate::error::{Error, Result};
use crate::geometry::{Segment, Vec2};
use crate::hybrid::{hybrid_action, PlannerInput, PlannerMode};
use crate::policy::{Action, Policy};
use crate::sensing::{assemble_observation, scan, LidarScan, NoiseModel, LIDAR_MAX_RANGE};
use crate::sfm::{cvm_step, sfm_agent_step, AgentState, SfmParams};
use crate::world::{
    clearance, sample_episode_detailed, sample_free_point, Body, Pose, SamplingMode, WorldMap, AGENT_RADIUS,
    MAX_SAMPLING_ATTEMPTS, ROBOT_RADIUS,
};

pub const DEFAULT_DT: f64 = 0.2;
pub const DEFAULT_MAX_STEPS: usize = 500;
pub const DEFAULT_GOAL_RADIUS: f64 = 0.4;
/// Agents spawn at least this far from the robot start.
const AGENT_START_CLEARANCE: f64 = 2.0;
/// … and this far from the robot goal.
const AGENT_GOAL_CLEARANCE: f64 = 1.0;
/// An agent picks a new goal once this close to its current one.
const AGENT_ARRIVAL: f64 = 0.5;
const AGENT_MIN_LEG: f64 = 3.0;
/// Environment variable bounding the number of parallel episode workers.
pub const WORKERS_ENV: &str = "SOCNAV_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentBehavior {
    Sfm,
    Cvm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSpec {
    pub count: usize,
    pub max_speed: f64,
    pub behavior: AgentBehavior,
}

impl Default for AgentSpec {
    fn default() -> Self {
        Self {
            count: 0,
            max_speed: 1.2,
            behavior: AgentBehavior::Sfm,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    pub map: Arc<WorldMap>,
    pub agents: AgentSpec,
    pub mode: PlannerMode,
    pub noise_sigma: f64,
    pub dt: f64,
    pub max_steps: usize,
    pub goal_radius: f64,
    pub sampling: SamplingMode,
    pub seed: u64,
    pub sfm: SfmParams,
    pub app: AppConfig,
    pub arp: ArpConfig,
    /// Extra clearance for the AT collision check (m).
    pub at_margin: f64,
    pub record_trace: bool,
}

impl EpisodeConfig {
    pub fn new(map: WorldMap) -> Self {
        Self {
            map: Arc::new(map),
            agents: AgentSpec::default(),
            mode: PlannerMode::Hybrid,
            noise_sigma: 0.0,
            dt: DEFAULT_DT,
            max_steps: DEFAULT_MAX_STEPS,
            goal_radius: DEFAULT_GOAL_RADIUS,
            sampling: SamplingMode::Ed,
            seed: 0,
            sfm: SfmParams::default(),
            app: AppConfig::default(),
            arp: ArpConfig::default(),
            at_margin: AT_DEFAULT_MARGIN,
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("episode.dt must be positive");
        }
        if self.max_steps == 0 {
            return bad("episode.max_steps must be ≥ 1");
        }
        if !(self.goal_radius > 0.0) {
            return bad("episode.goal_radius must be positive");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise.sigma must be a finite value ≥ 0");
        }
        if !(self.agents.max_speed >= 0.0 && self.agents.max_speed.is_finite()) {
            return bad("agents.max_speed must be a finite value ≥ 0");
        }
        if self.app.every == 0 || self.app.n < self.app.every || !(self.app.sigma >= 0.0) {
            return bad("anticipation.app needs n ≥ every ≥ 1 and sigma ≥ 0");
        }
        if !(self.at_margin >= 0.0 && self.at_margin.is_finite()) {
            return bad("anticipation.at_margin must be a finite value ≥ 0");
        }
        if self.arp.n == 0 || !(self.arp.local_map_range > 0.0) {
            return bad("anticipation.arp needs n ≥ 1 and a positive local_map_range");
        }
        self.sfm.validate().map_err(Error::Config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Success => "success",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        })
    }
}

/// Initial robot pose, goal and agents of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSetup {
    pub start: Pose,
    pub goal: Vec2,
    pub agents: Vec<AgentState>,
    /// Agents pick a new goal on arrival (persistent traffic).
    pub regoal_agents: bool,
}

/// One control cycle: the state it started from and what was commanded.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub step: usize,
    pub pose: Pose,
    pub action: Action,
    /// Agent positions and velocities at the start of the cycle.
    pub agents: Vec<(Vec2, Vec2)>,
    pub circles: Vec<AnticipativeCircle>,
    /// The scan the planner saw (after APP augmentation).
    pub scan: LidarScan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub goal: Vec2,
    pub steps: Vec<TraceStep>,
    pub final_pose: Pose,
    pub final_agents: Vec<(Vec2, Vec2)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub seed: u64,
    pub outcome: Outcome,
    pub steps_taken: usize,
    /// Smallest robot surface gap to obstacles and agents over the episode.
    pub min_clearance: f64,
    pub path_length: f64,
    pub trace: Option<EpisodeTrace>,
}

/// Seed of episode `index` in a batch: stream `index` of the batch generator,
/// so episodes are independent of how the batch is split across workers.
pub fn episode_seed(batch_seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(batch_seed);
    rng.set_stream(index);
    rng.next_u64()
}

struct SubSeeds {
    sampling: u64,
    agents: u64,
    noise: u64,
    at: u64,
}

fn sub_seeds(seed: u64) -> SubSeeds {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SubSeeds {
        sampling: rng.next_u64(),
        agents: rng.next_u64(),
        noise: rng.next_u64(),
        at: rng.next_u64(),
    }
}

fn pick_agent_goal(map: &WorldMap, from: &Vec2, rng: &mut ChaCha8Rng) -> Vec2 {
    let mut fallback = None;
    for _ in 0..MAX_SAMPLING_ATTEMPTS {
        let Some(g) = sample_free_point(map, AGENT_RADIUS, rng) else {
            continue;
        };
        fallback.get_or_insert(g);
        // prefer goals in line of sight so agents walk rather than press on walls
        if (g - from).norm() >= AGENT_MIN_LEG && map.segment_free(from, &g, AGENT_RADIUS) {
            return g;
        }
    }
    fallback.unwrap_or(*from)
}

fn initial_velocity(from: &Vec2, goal: &Vec2, speed: f64) -> Vec2 {
    let d = goal - from;
    let n = d.norm();
    if n > 1e-12 {
        d * (speed / n)
    } else {
        Vec2::zeros()
    }
}

fn spawn_agents(cfg: &EpisodeConfig, start: &Pose, goal: &Vec2, rng: &mut ChaCha8Rng) -> Result<Vec<AgentState>> {
    let mut agents: Vec<AgentState> = Vec::with_capacity(cfg.agents.count);
    for _ in 0..cfg.agents.count {
        let mut placed = false;
        for _ in 0..MAX_SAMPLING_ATTEMPTS {
            let Some(p) = sample_free_point(&cfg.map, AGENT_RADIUS + 0.1, rng) else {
                continue;
            };
            if (p - start.position).norm() < AGENT_START_CLEARANCE
                || (p - goal).norm() < AGENT_GOAL_CLEARANCE
                || agents.iter().any(|a| (a.position() - p).norm() < 2.0 * AGENT_RADIUS + 0.1)
            {
                continue;
            }
            let g = pick_agent_goal(&cfg.map, &p, rng);
            agents.push(AgentState {
                body: Body::agent(p),
                velocity: initial_velocity(&p, &g, cfg.agents.max_speed),
                goal: g,
                max_speed: cfg.agents.max_speed,
            });
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::SamplingExhausted {
                attempts: MAX_SAMPLING_ATTEMPTS,
            });
        }
    }
    Ok(agents)
}

/// Samples the start/goal pair and the agents for an episode seed.
pub fn setup_episode(cfg: &EpisodeConfig, seed: u64) -> Result<EpisodeSetup> {
    let seeds = sub_seeds(seed);
    let sample = sample_episode_detailed(&cfg.map, cfg.sampling, seeds.sampling)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seeds.agents);
    let agents = spawn_agents(cfg, &sample.start, &sample.goal, &mut rng)?;
    Ok(EpisodeSetup {
        start: sample.start,
        goal: sample.goal,
        agents,
        regoal_agents: true,
    })
}

fn bodies(agents: &[AgentState]) -> Vec<Body> {
    agents.iter().map(|a| a.body).collect()
}

/// True if the robot, moving p0 → p1, touches an obstacle or an agent moving
/// a0 → a1 at any time within the step (relative motion is linear).
fn swept_collision(map: &WorldMap, p0: &Vec2, p1: &Vec2, before: &[AgentState], after: &[AgentState]) -> bool {
    if !map.segment_free(p0, p1, ROBOT_RADIUS) {
        return true;
    }
    before.iter().zip(after).any(|(a0, a1)| {
        let rel = Segment::new(a0.position() - p0, a1.position() - p1);
        rel.distance_to_point(&Vec2::zeros()) < ROBOT_RADIUS + a0.body.radius
    })
}

/// Live state of a running episode.
pub struct Episode<'a> {
    cfg: &'a EpisodeConfig,
    policy: &'a dyn Policy,
    seed: u64,
    pose: Pose,
    velocity: Vec2,
    goal: Vec2,
    agents: Vec<AgentState>,
    regoal: bool,
    noise: NoiseModel,
    at: AtState,
    agent_rng: ChaCha8Rng,
    steps: usize,
    path_length: f64,
    min_clearance: f64,
    trace: Option<Vec<TraceStep>>,
    outcome: Option<Outcome>,
}

impl<'a> Episode<'a> {
    pub fn new(cfg: &'a EpisodeConfig, policy: &'a dyn Policy, setup: EpisodeSetup, seed: u64) -> Self {
        let seeds = sub_seeds(seed);
        let min_clearance = clearance(&Body::robot(setup.start.position), &cfg.map, &bodies(&setup.agents));
        let mut agent_rng = ChaCha8Rng::seed_from_u64(seeds.agents);
        // decouple re-goal draws from the spawn draws of the same seed
        agent_rng.set_stream(1);
        Self {
            cfg,
            policy,
            seed,
            pose: setup.start,
            velocity: Vec2::zeros(),
            goal: setup.goal,
            agents: setup.agents,
            regoal: setup.regoal_agents,
            noise: NoiseModel::new(cfg.noise_sigma, seeds.noise),
            at: AtState::new(seeds.at),
            agent_rng,
            steps: 0,
            path_length: 0.0,
            min_clearance,
            trace: cfg.record_trace.then(Vec::new),
            outcome: None,
        }
    }

    pub fn pose(&self) -> &Pose {
        &self.pose
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    fn agents_in_range(&self) -> Vec<AgentState> {
        self.agents
            .iter()
            .filter(|a| (a.position() - self.pose.position).norm() <= LIDAR_MAX_RANGE)
            .cloned()
            .collect()
    }

    /// Sense, plan, override, integrate, move agents, detect termination.
    pub fn step(&mut self) -> Option<Outcome> {
        if self.outcome.is_some() {
            return self.outcome;
        }
        let cfg = self.cfg;
        let dt = cfg.dt;
        let mode = cfg.mode;
        let raw = scan(&cfg.map, &bodies(&self.agents), &self.pose, &mut self.noise);

        let mut circles = Vec::new();
        let scan_used = if mode.uses_app() {
            let generated = app_generate(&self.agents_in_range(), cfg.app.n, cfg.app.every, cfg.app.sigma, dt);
            circles = app_truncate_on_hit(&generated, &Body::robot(self.pose.position));
            app_augment_scan(&raw, &circles, &self.pose)
        } else {
            raw
        };
        let obs = assemble_observation(std::slice::from_ref(&scan_used), &self.pose, &self.goal);

        let mut action = if mode.uses_arp() {
            let snap = ArpSnapshot {
                pose: self.pose,
                velocity: self.velocity,
                obs: &obs,
                agents: &self.agents,
                goal: self.goal,
                goal_radius: cfg.goal_radius,
            };
            arp_select(&snap, self.policy, &cfg.sfm, &cfg.arp, dt)
        } else {
            let input = PlannerInput {
                obs: &obs,
                pose: &self.pose,
                velocity: &self.velocity,
                agents: &self.agents,
            };
            hybrid_action(self.policy, &input, &cfg.sfm, mode.uses_sfm(), dt)
        };

        if mode.uses_at() {
            let points = scan_used.points(&self.pose);
            let pending = self.at.pending_action(action);
            let predicted = at_predict_collision_with(&self.pose, &pending, &points, dt, cfg.at_margin);
            let near = moving_obstacle_near(&self.pose, &pending, &self.agents, dt);
            let (a, next) = at_step(self.at.clone(), action, predicted, near);
            action = a;
            self.at = next;
        }

        if let Some(trace) = &mut self.trace {
            trace.push(TraceStep {
                step: self.steps,
                pose: self.pose,
                action,
                agents: self.agents.iter().map(|a| (a.position(), a.velocity)).collect(),
                circles,
                scan: scan_used,
            });
        }

        let before = self.pose;
        self.velocity = before.forward() * action.linear;
        self.pose = before.integrate(action.linear, action.angular, dt);
        self.path_length += (self.pose.position - before.position).norm();

        let robot_body = Body::robot(before.position);
        let moved: Vec<AgentState> = match cfg.agents.behavior {
            AgentBehavior::Sfm => self
                .agents
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let others: Vec<AgentState> = self
                        .agents
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, o)| o.clone())
                        .collect();
                    sfm_agent_step(a, &others, Some((&robot_body, &self.velocity)), &cfg.map, &cfg.sfm, dt)
                })
                .collect(),
            AgentBehavior::Cvm => self.agents.iter().map(|a| cvm_step(a, dt)).collect(),
        };
        let collided = swept_collision(&cfg.map, &before.position, &self.pose.position, &self.agents, &moved);
        self.agents = moved;
        if self.regoal {
            self.regoal_arrivals();
        }
        self.steps += 1;

        let gap = clearance(&Body::robot(self.pose.position), &cfg.map, &bodies(&self.agents));
        self.min_clearance = self.min_clearance.min(if collided { gap.min(0.0) } else { gap });

        self.outcome = if collided {
            Some(Outcome::Collision)
        } else if (self.goal - self.pose.position).norm() < cfg.goal_radius {
            Some(Outcome::Success)
        } else if self.steps >= cfg.max_steps {
            Some(Outcome::Timeout)
        } else {
            None
        };
        self.outcome
    }

    fn regoal_arrivals(&mut self) {
        let behavior = self.cfg.agents.behavior;
        for a in &mut self.agents {
            if (a.goal - a.position()).norm() < AGENT_ARRIVAL {
                a.goal = pick_agent_goal(&self.cfg.map, &a.position(), &mut self.agent_rng);
                if behavior == AgentBehavior::Cvm {
                    a.velocity = initial_velocity(&a.position(), &a.goal, a.max_speed);
                }
            }
        }
    }

    pub fn run(mut self) -> EpisodeResult {
        while self.step().is_none() {}
        let trace = self.trace.take().map(|steps| EpisodeTrace {
            goal: self.goal,
            steps,
            final_pose: self.pose,
            final_agents: self.agents.iter().map(|a| (a.position(), a.velocity)).collect(),
        });
        EpisodeResult {
            seed: self.seed,
            outcome: self.outcome.expect("loop ends with an outcome"),
            steps_taken: self.steps,
            min_clearance: self.min_clearance,
            path_length: self.path_length,
            trace,
        }
    }
}

/// Runs one episode with an explicit setup.
pub fn run_setup(cfg: &EpisodeConfig, policy: &dyn Policy, setup: EpisodeSetup, seed: u64) -> Result<EpisodeResult> {
    cfg.validate()?;
    Ok(Episode::new(cfg, policy, setup, seed).run())
}

/// Samples and runs the episode for `cfg.seed`.
pub fn run_episode(cfg: &EpisodeConfig, policy: &dyn Policy) -> Result<EpisodeResult> {
    cfg.validate()?;
    let setup = setup_episode(cfg, cfg.seed)?;
    Ok(Episode::new(cfg, policy, setup, cfg.seed).run())
}

/// Runs `f` on a pool sized by [`WORKERS_ENV`] when set, else rayon's default.
pub(crate) fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let n = std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse::<usize>().ok());
    match n {
        Some(n) if n >= 1 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

/// Runs `episodes` episodes seeded from `batch_seed`, in parallel; results are
/// in episode order regardless of scheduling.
pub fn run_batch(cfg: &EpisodeConfig, policy: &dyn Policy, episodes: usize, batch_seed: u64) -> Result<Vec<EpisodeResult>> {
    if episodes == 0 {
        return Err(Error::Precondition("episodes must be ≥ 1".into()));
    }
    cfg.validate()?;
    with_workers(|| {
        (0..episodes as u64)
            .into_par_iter()
            .map(|i| {
                let seed = episode_seed(batch_seed, i);
                let setup = setup_episode(cfg, seed)?;
                Ok(Episode::new(cfg, policy, setup, seed).run())
            })
            .collect()
    })
}

pub fn evaluate(cfg: &EpisodeConfig, policy: &dyn Policy, episodes: usize, batch_seed: u64) -> Result<Metrics> {
    Ok(Metrics::from_results(&run_batch(cfg, policy, episodes, batch_seed)?))
}
