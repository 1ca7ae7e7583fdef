use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{plan_rrt, Pose, RrtPlan, WorldMap, ROBOT_RADIUS};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

pub const MAX_SAMPLING_ATTEMPTS: usize = 1000;
pub const MIN_EPISODE_DISTANCE: f64 = 5.0;
pub const MAX_EPISODE_DISTANCE: f64 = 10.0;
/// Extra free space required around sampled start and goal positions.
const ENDPOINT_MARGIN: f64 = 0.2;

/// How start/goal pairs are accepted: straight-line (ED) or RRT path (PD) distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    Ed,
    Pd,
}

impl FromStr for SamplingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ed" => Ok(Self::Ed),
            "pd" => Ok(Self::Pd),
            other => Err(Error::Config(format!("unknown sampling mode `{other}`"))),
        }
    }
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ed => "ed",
            Self::Pd => "pd",
        })
    }
}

fn in_range(d: f64) -> bool {
    (MIN_EPISODE_DISTANCE..=MAX_EPISODE_DISTANCE).contains(&d)
}

/// An accepted start/goal pair; `plan` is the RRT plan that admitted a PD pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSample {
    pub start: Pose,
    pub goal: Vec2,
    pub plan: Option<RrtPlan>,
}

/// Acceptance test applied to a candidate pair.
pub fn accepts_pair(map: &WorldMap, mode: SamplingMode, start: Vec2, goal: Vec2, plan_seed: u64) -> bool {
    check_pair(map, mode, start, goal, plan_seed).is_some()
}

fn check_pair(
    map: &WorldMap,
    mode: SamplingMode,
    start: Vec2,
    goal: Vec2,
    plan_seed: u64,
) -> Option<Option<RrtPlan>> {
    let euclid = (goal - start).norm();
    match mode {
        SamplingMode::Ed => in_range(euclid).then_some(None),
        // path length is never shorter than the straight line
        SamplingMode::Pd => {
            if euclid > MAX_EPISODE_DISTANCE {
                return None;
            }
            plan_rrt(map, start, goal, plan_seed)
                .ok()
                .filter(|plan| in_range(plan.length))
                .map(Some)
        }
    }
}

fn sample_free(map: &WorldMap, rng: &mut ChaCha8Rng) -> Option<Vec2> {
    sample_free_point(map, ROBOT_RADIUS + ENDPOINT_MARGIN, rng)
}

/// One uniform draw from the spawn region; `None` unless a disk of `radius`
/// fits there.
pub fn sample_free_point(map: &WorldMap, radius: f64, rng: &mut impl Rng) -> Option<Vec2> {
    let region = map.spawn_region();
    let (lo, hi) = region.bbox();
    let p = Vec2::new(rng.random_range(lo.x..=hi.x), rng.random_range(lo.y..=hi.y));
    (region.contains(&p) && map.disk_free(&p, radius)).then_some(p)
}

/// Rejection-samples a start pose and goal satisfying the mode's distance band.
pub fn sample_episode(map: &WorldMap, mode: SamplingMode, seed: u64) -> Result<(Pose, Vec2)> {
    sample_episode_detailed(map, mode, seed).map(|s| (s.start, s.goal))
}

pub fn sample_episode_detailed(map: &WorldMap, mode: SamplingMode, seed: u64) -> Result<EpisodeSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_SAMPLING_ATTEMPTS {
        let heading = rng.random_range(-PI..PI);
        let plan_seed = rng.next_u64();
        let (Some(start), Some(goal)) = (sample_free(map, &mut rng), sample_free(map, &mut rng)) else {
            continue;
        };
        if let Some(plan) = check_pair(map, mode, start, goal, plan_seed) {
            return Ok(EpisodeSample {
                start: Pose::new(start.x, start.y, heading),
                goal,
                plan,
            });
        }
    }
    Err(Error::SamplingExhausted {
        attempts: MAX_SAMPLING_ATTEMPTS,
    })
}
