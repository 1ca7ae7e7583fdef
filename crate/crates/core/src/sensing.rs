//! Simulated 2D Lidar and policy observation assembly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::{normalize_angle, unit, Vec2};
use crate::world::{raycast, Body, Pose, WorldMap};

pub const NUM_BEAMS: usize = 64;
pub const LIDAR_FOV: f64 = 220.0 * std::f64::consts::PI / 180.0;
pub const LIDAR_MAX_RANGE: f64 = 5.0;
/// Number of stacked scans in an observation.
pub const STACKED_SCANS: usize = 1;
/// Length of the flat observation vector fed to the networks.
pub const OBS_DIM: usize = NUM_BEAMS * STACKED_SCANS + 2;

/// Beam angle relative to the heading; beam 0 is the rightmost (−110°),
/// angles ascend to the left.
pub fn beam_angle(i: usize) -> f64 {
    -LIDAR_FOV / 2.0 + LIDAR_FOV * i as f64 / (NUM_BEAMS - 1) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct LidarScan {
    pub ranges: [f64; NUM_BEAMS],
    pub max_range: f64,
}

impl LidarScan {
    pub fn uniform(range: f64) -> Self {
        Self {
            ranges: [range; NUM_BEAMS],
            max_range: LIDAR_MAX_RANGE,
        }
    }

    pub fn min_range(&self) -> f64 {
        self.ranges.iter().copied().fold(self.max_range, f64::min)
    }

    /// World-frame hit points of the beams that returned before max range.
    pub fn points(&self, pose: &Pose) -> Vec<Vec2> {
        self.ranges
            .iter()
            .enumerate()
            .filter(|(_, &r)| r < self.max_range)
            .map(|(i, &r)| pose.position + unit(pose.heading + beam_angle(i)) * r)
            .collect()
    }
}

/// Additive Gaussian range noise with its own seeded stream.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    sigma: f64,
    rng: ChaCha8Rng,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Self {
        assert!(sigma >= 0.0 && sigma.is_finite(), "sigma_lidar must be ≥ 0");
        Self {
            sigma,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn noiseless() -> Self {
        Self::new(0.0, 0)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn sample(&mut self) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        Normal::new(0.0, self.sigma)
            .expect("finite sigma")
            .sample(&mut self.rng)
    }
}

/// One 64-beam sweep. The true range is clamped first, then noise is added
/// and the reading re-clamped to `[0, max_range]`.
pub fn scan(map: &WorldMap, agents: &[Body], pose: &Pose, noise: &mut NoiseModel) -> LidarScan {
    let mut ranges = [0.0; NUM_BEAMS];
    for (i, r) in ranges.iter_mut().enumerate() {
        let truth = raycast(map, agents, &pose.position, pose.heading + beam_angle(i), LIDAR_MAX_RANGE);
        *r = (truth + noise.sample()).clamp(0.0, LIDAR_MAX_RANGE);
    }
    LidarScan {
        ranges,
        max_range: LIDAR_MAX_RANGE,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub lidar_stack: Vec<LidarScan>,
    /// Goal distance (m) and bearing in the robot frame (rad, (−π, π]).
    pub goal_polar: (f64, f64),
}

impl Observation {
    pub fn latest_scan(&self) -> &LidarScan {
        self.lidar_stack.last().expect("observation holds at least one scan")
    }

    /// Flat network input: stacked ranges (oldest first) then ρ, α.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(NUM_BEAMS * self.lidar_stack.len() + 2);
        for s in &self.lidar_stack {
            v.extend_from_slice(&s.ranges);
        }
        v.push(self.goal_polar.0);
        v.push(self.goal_polar.1);
        v
    }
}

pub fn goal_polar(pose: &Pose, goal: &Vec2) -> (f64, f64) {
    let d = goal - pose.position;
    let rho = d.norm();
    if rho < 1e-12 {
        return (0.0, 0.0);
    }
    (rho, normalize_angle(d.y.atan2(d.x) - pose.heading))
}

/// Builds an observation from the most recent scans; when fewer than the
/// stack depth are available the oldest one is repeated.
pub fn assemble_observation(scans: &[LidarScan], pose: &Pose, goal: &Vec2) -> Observation {
    assert!(!scans.is_empty(), "at least one scan is required");
    let tail = &scans[scans.len().saturating_sub(STACKED_SCANS)..];
    let mut stack = Vec::with_capacity(STACKED_SCANS);
    for _ in tail.len()..STACKED_SCANS {
        stack.push(tail[0].clone());
    }
    stack.extend(tail.iter().cloned());
    Observation {
        lidar_stack: stack,
        goal_polar: goal_polar(pose, goal),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Polygon;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn wall_ahead() -> WorldMap {
        WorldMap::new("wall", 20.0, 20.0, vec![Polygon::rect(12.0, 5.0, 12.5, 15.0)], None).unwrap()
    }

    #[test]
    fn beam_layout() {
        assert_abs_diff_eq!(beam_angle(0), -110f64.to_radians(), epsilon = 1e-12);
        assert_abs_diff_eq!(beam_angle(63), 110f64.to_radians(), epsilon = 1e-12);
        for i in 0..NUM_BEAMS {
            assert_abs_diff_eq!(beam_angle(i), -beam_angle(NUM_BEAMS - 1 - i), epsilon = 1e-12);
        }
    }

    #[test]
    fn empty_map_reads_max_range() {
        let s = scan(&WorldMap::empty(20.0, 20.0), &[], &Pose::new(10.0, 10.0, 0.3), &mut NoiseModel::noiseless());
        assert!(s.ranges.iter().all(|&r| r == 5.0));
    }

    #[test]
    fn central_beams_see_wall() {
        let pose = Pose::new(10.0, 10.0, 0.0);
        let s = scan(&wall_ahead(), &[], &pose, &mut NoiseModel::noiseless());
        // 64 beams: 31 and 32 straddle the heading at ±1.75°
        for i in [31, 32] {
            assert_abs_diff_eq!(s.ranges[i], 2.0 / beam_angle(i).cos(), epsilon = 1e-12);
        }
        assert!((s.ranges[31] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn noiseless_scan_equals_raycast() {
        let map = wall_ahead();
        let agents = [Body::agent(Vec2::new(9.0, 12.0))];
        let pose = Pose::new(10.0, 10.0, 0.7);
        let s = scan(&map, &agents, &pose, &mut NoiseModel::noiseless());
        for i in 0..NUM_BEAMS {
            assert_eq!(s.ranges[i], raycast(&map, &agents, &pose.position, pose.heading + beam_angle(i), 5.0));
        }
    }

    #[test]
    fn noise_mean_absolute_deviation() {
        // oracle: E|N(0, σ)| = σ·√(2/π); readings at 2.0 m are far from both clamps
        let map = WorldMap::new("box", 20.0, 20.0, vec![], None).unwrap();
        let pose = Pose::new(18.0, 10.0, 0.0);
        let clean = scan(&map, &[], &pose, &mut NoiseModel::noiseless());
        let mut noise = NoiseModel::new(0.1, 42);
        let mut total = 0.0;
        let mut count = 0;
        while count < 10_000 {
            let s = scan(&map, &[], &pose, &mut noise);
            for i in 0..NUM_BEAMS {
                if clean.ranges[i] < 4.0 && clean.ranges[i] > 1.0 {
                    total += (s.ranges[i] - clean.ranges[i]).abs();
                    count += 1;
                }
            }
        }
        let mad = total / count as f64;
        let expected = 0.1 * (2.0 / PI).sqrt();
        assert!((mad - expected).abs() < 0.003, "mad {mad} expected {expected}");
    }

    #[test]
    fn noisy_readings_stay_clamped() {
        let map = wall_ahead();
        let mut noise = NoiseModel::new(0.8, 3);
        let pose = Pose::new(11.5, 10.0, 0.0);
        let mut beams = 0;
        while beams < 100_000 {
            let s = scan(&map, &[], &pose, &mut noise);
            assert!(s.ranges.iter().all(|&r| (0.0..=5.0).contains(&r)));
            beams += NUM_BEAMS;
        }
    }

    #[test]
    fn observation_examples() {
        let s = [LidarScan::uniform(5.0)];
        let o = assemble_observation(&s, &Pose::new(0.0, 0.0, 0.0), &Vec2::new(3.0, 4.0));
        assert_abs_diff_eq!(o.goal_polar.0, 5.0);
        assert_abs_diff_eq!(o.goal_polar.1, 4f64.atan2(3.0));
        let o = assemble_observation(&s, &Pose::new(0.0, 0.0, 0.0), &Vec2::new(-2.0, 0.0));
        assert_abs_diff_eq!(o.goal_polar.0, 2.0);
        assert_abs_diff_eq!(o.goal_polar.1, PI);
        let o = assemble_observation(&s, &Pose::new(1.0, 1.0, 0.4), &Vec2::new(1.0, 1.0));
        assert_eq!(o.goal_polar, (0.0, 0.0));
        assert_eq!(o.lidar_stack.len(), STACKED_SCANS);
        assert_eq!(o.to_vector().len(), OBS_DIM);
    }

    proptest! {
        #[test]
        fn goal_polar_rigid_invariant(x in -10.0..10.0f64, y in -10.0..10.0f64, h in -3.1..3.1f64,
                                      gx in -10.0..10.0f64, gy in -10.0..10.0f64,
                                      tx in -50.0..50.0f64, ty in -50.0..50.0f64, rot in -3.1..3.1f64) {
            let pose = Pose::new(x, y, h);
            let goal = Vec2::new(gx, gy);
            prop_assume!((goal - pose.position).norm() > 1e-3);
            let r = nalgebra::Rotation2::new(rot);
            let t = Vec2::new(tx, ty);
            let p2 = r * pose.position + t;
            let pose2 = Pose::new(p2.x, p2.y, h + rot);
            let goal2 = r * goal + t;
            let (rho1, a1) = goal_polar(&pose, &goal);
            let (rho2, a2) = goal_polar(&pose2, &goal2);
            prop_assert!((rho1 - rho2).abs() < 1e-9);
            prop_assert!(normalize_angle(a1 - a2).abs() < 1e-9);
        }
    }
}
