use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{WorldMap, ROBOT_RADIUS};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrtConfig {
    pub goal_bias: f64,
    pub step: f64,
    pub max_iterations: usize,
    pub radius: f64,
}

impl Default for RrtConfig {
    fn default() -> Self {
        Self {
            goal_bias: 0.1,
            step: 0.5,
            max_iterations: 5000,
            radius: ROBOT_RADIUS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RrtPlan {
    pub waypoints: Vec<Vec2>,
    pub length: f64,
}

impl RrtPlan {
    fn from_waypoints(waypoints: Vec<Vec2>) -> Self {
        let length = waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        Self { waypoints, length }
    }
}

/// Plans a collision-free polyline for a robot-sized disk with the default
/// configuration.
pub fn plan_rrt(map: &WorldMap, start: Vec2, goal: Vec2, seed: u64) -> Result<RrtPlan> {
    plan_rrt_with(map, start, goal, seed, &RrtConfig::default())
}

/// Goal-biased RRT followed by greedy shortcut smoothing.
pub fn plan_rrt_with(
    map: &WorldMap,
    start: Vec2,
    goal: Vec2,
    seed: u64,
    cfg: &RrtConfig,
) -> Result<RrtPlan> {
    if !map.disk_free(&start, cfg.radius) {
        return Err(Error::Precondition(format!("rrt start {start:?} is in collision")));
    }
    if !map.disk_free(&goal, cfg.radius) {
        return Err(Error::Precondition(format!("rrt goal {goal:?} is in collision")));
    }
    if (goal - start).norm() < 1e-9 {
        return Ok(RrtPlan::from_waypoints(vec![start, goal]));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = vec![start];
    let mut parents = vec![usize::MAX];

    let mut reached = map.segment_free(&start, &goal, cfg.radius).then_some(0);
    let mut iterations = 0;
    while reached.is_none() && iterations < cfg.max_iterations {
        iterations += 1;
        let target = if rng.random::<f64>() < cfg.goal_bias {
            goal
        } else {
            Vec2::new(
                rng.random_range(0.0..map.width),
                rng.random_range(0.0..map.height),
            )
        };
        let (nearest, dist) = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (i, (n - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("tree is never empty");
        if dist < 1e-9 {
            continue;
        }
        let from = nodes[nearest];
        let new = if dist > cfg.step {
            from + (target - from) * (cfg.step / dist)
        } else {
            target
        };
        if !map.segment_free(&from, &new, cfg.radius) {
            continue;
        }
        nodes.push(new);
        parents.push(nearest);
        if map.segment_free(&new, &goal, cfg.radius) {
            reached = Some(nodes.len() - 1);
        }
    }

    let last = reached.ok_or(Error::Unreachable { iterations })?;
    let mut path = vec![goal];
    let mut i = last;
    loop {
        path.push(nodes[i]);
        if parents[i] == usize::MAX {
            break;
        }
        i = parents[i];
    }
    path.reverse();
    Ok(RrtPlan::from_waypoints(shortcut(map, &path, cfg.radius)))
}

/// Greedy shortcutting: from each kept waypoint jump to the farthest one
/// still reachable in a straight line.
fn shortcut(map: &WorldMap, path: &[Vec2], radius: f64) -> Vec<Vec2> {
    let mut out = vec![path[0]];
    let mut i = 0;
    while i + 1 < path.len() {
        let mut j = path.len() - 1;
        while j > i + 1 && !map.segment_free(&path[i], &path[j], radius) {
            j -= 1;
        }
        out.push(path[j]);
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{check_collision, Body, Polygon};

    fn assert_swept_free(map: &WorldMap, plan: &RrtPlan) {
        for w in plan.waypoints.windows(2) {
            let len = (w[1] - w[0]).norm();
            let steps = (len / 0.05).ceil().max(1.0) as usize;
            for k in 0..=steps {
                let p = w[0] + (w[1] - w[0]) * (k as f64 / steps as f64);
                assert!(!check_collision(&Body::robot(p), map, &[]), "collision at {p:?}");
            }
        }
    }

    #[test]
    fn straight_line_on_empty_map() {
        let map = WorldMap::empty(20.0, 20.0);
        // the (0,0)/(7,0) example is shifted into the map interior
        let plan = plan_rrt(&map, Vec2::new(5.0, 10.0), Vec2::new(12.0, 10.0), 3).unwrap();
        assert!(plan.length >= 7.0 - 1e-12 && plan.length <= 7.7, "{}", plan.length);
        assert_eq!(plan.waypoints.first(), Some(&Vec2::new(5.0, 10.0)));
        assert_eq!(plan.waypoints.last(), Some(&Vec2::new(12.0, 10.0)));
    }

    #[test]
    fn goal_inside_obstacle_is_rejected() {
        let map = WorldMap::new("box", 20.0, 20.0, vec![Polygon::rect(9.0, 9.0, 11.0, 11.0)], None)
            .unwrap();
        let err = plan_rrt(&map, Vec2::new(2.0, 2.0), Vec2::new(10.0, 10.0), 1).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn identity_plan() {
        let map = WorldMap::empty(20.0, 20.0);
        let p = Vec2::new(4.0, 4.0);
        let plan = plan_rrt(&map, p, p, 0).unwrap();
        assert_eq!(plan.length, 0.0);
        assert_eq!(plan.waypoints.first(), Some(&p));
        assert_eq!(plan.waypoints.last(), Some(&p));
    }

    #[test]
    fn detours_around_wall_and_stays_free() {
        let map = WorldMap::new(
            "wall",
            20.0,
            20.0,
            vec![Polygon::rect(9.8, 2.0, 10.2, 18.0)],
            None,
        )
        .unwrap();
        for seed in 0..10 {
            let plan = plan_rrt(&map, Vec2::new(5.0, 10.0), Vec2::new(15.0, 10.0), seed).unwrap();
            assert!(plan.length > 10.0);
            assert_swept_free(&map, &plan);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let map = crate::world::builtin("building_1").unwrap();
        let a = plan_rrt(&map, Vec2::new(3.0, 3.0), Vec2::new(15.0, 25.0), 11);
        let b = plan_rrt(&map, Vec2::new(3.0, 3.0), Vec2::new(15.0, 25.0), 11);
        assert_eq!(a.ok(), b.ok());
    }

    #[test]
    fn sealed_goal_exhausts_budget() {
        let walls = vec![
            Polygon::rect(14.0, 14.0, 19.0, 14.5),
            Polygon::rect(14.0, 14.0, 14.5, 19.0),
            Polygon::rect(14.0, 18.5, 19.0, 19.0),
            Polygon::rect(18.5, 14.0, 19.0, 19.0),
        ];
        let map = WorldMap::new("sealed", 20.0, 20.0, walls, None).unwrap();
        let cfg = RrtConfig {
            max_iterations: 300,
            ..Default::default()
        };
        let err = plan_rrt_with(&map, Vec2::new(2.0, 2.0), Vec2::new(16.5, 16.5), 0, &cfg).unwrap_err();
        assert!(matches!(err, Error::Unreachable { iterations: 300 }));
    }
}
