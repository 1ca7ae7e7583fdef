//! Static maps, collision geometry, goal sampling and the RRT planner.

mod maps;
mod rrt;
mod sampling;

pub use maps::{builtin, BUILTIN_MAPS};
pub use rrt::{plan_rrt, RrtConfig, RrtPlan};
pub use sampling::{
    accepts_pair, sample_episode, sample_episode_detailed, sample_free_point, EpisodeSample,
    SamplingMode, MAX_SAMPLING_ATTEMPTS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, point_in_polygon, ray_circle, unit, Segment, Vec2};

/// Robot disk radius (m).
pub const ROBOT_RADIUS: f64 = 0.3;
/// Pedestrian disk radius (m).
pub const AGENT_RADIUS: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub center: Vec2,
    pub radius: f64,
}

impl Body {
    pub fn new(center: Vec2, radius: f64) -> Self {
        debug_assert!(radius > 0.0);
        Self { center, radius }
    }

    pub fn robot(center: Vec2) -> Self {
        Self::new(center, ROBOT_RADIUS)
    }

    pub fn agent(center: Vec2) -> Self {
        Self::new(center, AGENT_RADIUS)
    }

    pub fn overlaps(&self, other: &Body) -> bool {
        (self.center - other.center).norm() < self.radius + other.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec2,
    /// Radians in (−π, π].
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            position: Vec2::new(x, y),
            heading: normalize_angle(heading),
        }
    }

    pub fn forward(&self) -> Vec2 {
        unit(self.heading)
    }

    /// Euler unicycle step: translate along the current heading, then turn.
    pub fn integrate(&self, linear: f64, angular: f64, dt: f64) -> Pose {
        let (s, c) = self.heading.sin_cos();
        Pose {
            position: self.position + Vec2::new(c, s) * (linear * dt),
            heading: normalize_angle(self.heading + angular * dt),
        }
    }

    /// Expresses a world point in this pose's frame.
    pub fn to_local(&self, p: &Vec2) -> Vec2 {
        let d = p - self.position;
        let (s, c) = self.heading.sin_cos();
        Vec2::new(c * d.x + s * d.y, -s * d.x + c * d.y)
    }
}

/// A simple (non self-intersecting) polygon with a cached bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
    min: Vec2,
    max: Vec2,
}

impl Polygon {
    pub fn new(vertices: Vec<Vec2>) -> std::result::Result<Self, String> {
        if vertices.len() < 3 {
            return Err(format!("needs at least 3 vertices, got {}", vertices.len()));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err("non-finite vertex".into());
        }
        let n = vertices.len();
        let area2: f64 = (0..n)
            .map(|i| {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                a.x * b.y - b.x * a.y
            })
            .sum();
        if area2.abs() < 1e-12 {
            return Err("zero area".into());
        }
        let edges: Vec<Segment> = (0..n)
            .map(|i| Segment::new(vertices[i], vertices[(i + 1) % n]))
            .collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if !adjacent && edges[i].intersects(&edges[j]) {
                    return Err(format!("edges {i} and {j} intersect"));
                }
            }
        }
        let mut min = vertices[0];
        let mut max = vertices[0];
        for v in &vertices {
            min = min.inf(v);
            max = max.sup(v);
        }
        Ok(Self { vertices, min, max })
    }

    /// Axis-aligned rectangle from two opposite corners.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        let (xa, xb) = (x0.min(x1), x0.max(x1));
        let (ya, yb) = (y0.min(y1), y0.max(y1));
        Self::new(vec![
            Vec2::new(xa, ya),
            Vec2::new(xb, ya),
            Vec2::new(xb, yb),
            Vec2::new(xa, yb),
        ])
        .expect("rectangle with positive extent")
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && point_in_polygon(p, &self.vertices)
    }

    pub fn bbox(&self) -> (Vec2, Vec2) {
        (self.min, self.max)
    }

    /// Lower bound on the distance from `p` to any point of the polygon.
    fn bbox_distance(&self, p: &Vec2) -> f64 {
        let dx = (self.min.x - p.x).max(p.x - self.max.x).max(0.0);
        let dy = (self.min.y - p.y).max(p.y - self.max.y).max(0.0);
        (dx * dx + dy * dy).sqrt()
    }

    /// Distance from `p` to the polygon boundary and the closest boundary point.
    fn nearest_boundary_point(&self, p: &Vec2) -> (Vec2, f64) {
        self.edges()
            .map(|e| {
                let q = e.closest_point(p);
                (q, (p - q).norm())
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("polygon has edges")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldMap {
    pub name: String,
    pub width: f64,
    pub height: f64,
    obstacles: Vec<Polygon>,
    spawn_region: Polygon,
}

/// Serializable map description, the `map.*` section of a scenario file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    /// Name of a built-in map; when set, `bounds` and `obstacles` must be absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[f64; 2]>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spawn_region: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObstacleSpec {
    /// Vertex list in meters.
    Polygon(Vec<[f64; 2]>),
    /// `[x_min, y_min, x_max, y_max]`.
    Rect { rect: [f64; 4] },
}

/// Builds and validates a map from its configuration tree.
pub fn load_map(cfg: &MapConfig) -> Result<WorldMap> {
    if let Some(name) = &cfg.builtin {
        if cfg.bounds.is_some() || !cfg.obstacles.is_empty() {
            return Err(Error::InvalidMap(
                "`builtin` cannot be combined with `bounds` or `obstacles`".into(),
            ));
        }
        return builtin(name).ok_or_else(|| Error::InvalidMap(format!("unknown builtin map `{name}`")));
    }
    let [width, height] = cfg
        .bounds
        .ok_or_else(|| Error::InvalidMap("missing `bounds`".into()))?;
    let mut obstacles = Vec::with_capacity(cfg.obstacles.len());
    for (index, spec) in cfg.obstacles.iter().enumerate() {
        let poly = match spec {
            ObstacleSpec::Polygon(pts) => {
                Polygon::new(pts.iter().map(|p| Vec2::new(p[0], p[1])).collect())
            }
            ObstacleSpec::Rect { rect } => {
                let [x0, y0, x1, y1] = *rect;
                if !(x1 > x0 && y1 > y0) {
                    Err("rect must satisfy x_min < x_max and y_min < y_max".to_string())
                } else {
                    Polygon::new(vec![
                        Vec2::new(x0, y0),
                        Vec2::new(x1, y0),
                        Vec2::new(x1, y1),
                        Vec2::new(x0, y1),
                    ])
                }
            }
        }
        .map_err(|reason| Error::MalformedPolygon { index, reason })?;
        obstacles.push(poly);
    }
    let spawn = match &cfg.spawn_region {
        Some(pts) => Some(
            Polygon::new(pts.iter().map(|p| Vec2::new(p[0], p[1])).collect())
                .map_err(|reason| Error::InvalidMap(format!("spawn_region: {reason}")))?,
        ),
        None => None,
    };
    let name = cfg.name.clone().unwrap_or_else(|| "custom".into());
    WorldMap::new(name, width, height, obstacles, spawn)
}

impl WorldMap {
    pub fn new(
        name: impl Into<String>,
        width: f64,
        height: f64,
        obstacles: Vec<Polygon>,
        spawn_region: Option<Polygon>,
    ) -> Result<Self> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(Error::InvalidMap(format!("bounds must be positive, got {width}×{height}")));
        }
        let inside = |v: &Vec2| v.x >= 0.0 && v.x <= width && v.y >= 0.0 && v.y <= height;
        for (index, poly) in obstacles.iter().enumerate() {
            if !poly.vertices().iter().all(inside) {
                return Err(Error::ObstacleOutOfBounds { index });
            }
        }
        let spawn_region = match spawn_region {
            Some(region) => {
                if !region.vertices().iter().all(inside) {
                    return Err(Error::InvalidMap("spawn_region extends outside the bounds".into()));
                }
                region
            }
            None => Polygon::rect(0.0, 0.0, width, height),
        };
        Ok(Self {
            name: name.into(),
            width,
            height,
            obstacles,
            spawn_region,
        })
    }

    pub fn empty(width: f64, height: f64) -> Self {
        Self::new(format!("empty_{width}x{height}"), width, height, Vec::new(), None)
            .expect("positive bounds")
    }

    pub fn obstacles(&self) -> &[Polygon] {
        &self.obstacles
    }

    pub fn spawn_region(&self) -> &Polygon {
        &self.spawn_region
    }

    pub fn boundary(&self) -> [Segment; 4] {
        let (w, h) = (self.width, self.height);
        [
            Segment::new(Vec2::new(0.0, 0.0), Vec2::new(w, 0.0)),
            Segment::new(Vec2::new(w, 0.0), Vec2::new(w, h)),
            Segment::new(Vec2::new(w, h), Vec2::new(0.0, h)),
            Segment::new(Vec2::new(0.0, h), Vec2::new(0.0, 0.0)),
        ]
    }

    pub fn in_bounds(&self, p: &Vec2) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    /// Distance along a ray to the first static surface (obstacle or boundary),
    /// unclamped beyond `limit` only in the sense that farther hits are ignored.
    fn static_ray(&self, origin: &Vec2, dir: &Vec2, limit: f64) -> f64 {
        let mut best = limit;
        for seg in self.boundary() {
            if let Some(t) = seg.ray_hit(origin, dir) {
                best = best.min(t);
            }
        }
        for poly in &self.obstacles {
            if poly.bbox_distance(origin) >= best {
                continue;
            }
            for e in poly.edges() {
                if let Some(t) = e.ray_hit(origin, dir) {
                    best = best.min(t);
                }
            }
        }
        best
    }

    /// Distance from `p` to the nearest static surface (obstacle or boundary)
    /// together with the nearest surface point. Zero inside an obstacle.
    pub fn nearest_static(&self, p: &Vec2) -> (Vec2, f64) {
        let mut best = (Vec2::new(0.0, p.y), p.x);
        for seg in self.boundary() {
            let q = seg.closest_point(p);
            let d = (p - q).norm();
            if d < best.1 {
                best = (q, d);
            }
        }
        for poly in &self.obstacles {
            if poly.bbox_distance(p) >= best.1 {
                continue;
            }
            let (q, d) = poly.nearest_boundary_point(p);
            let d = if poly.contains(p) { 0.0 } else { d };
            if d < best.1 {
                best = (q, d);
            }
        }
        best
    }

    /// True when a disk of `radius` at `p` touches no obstacle and stays inside the bounds.
    pub fn disk_free(&self, p: &Vec2, radius: f64) -> bool {
        if p.x - radius < 0.0
            || p.x + radius > self.width
            || p.y - radius < 0.0
            || p.y + radius > self.height
        {
            return false;
        }
        self.obstacles.iter().all(|poly| {
            poly.bbox_distance(p) >= radius
                || (!poly.contains(p) && poly.nearest_boundary_point(p).1 >= radius)
        })
    }

    /// Exact swept-disk test for the straight motion `a → b`.
    pub fn segment_free(&self, a: &Vec2, b: &Vec2, radius: f64) -> bool {
        if !self.disk_free(a, radius) || !self.disk_free(b, radius) {
            return false;
        }
        let path = Segment::new(*a, *b);
        let (lo, hi) = (a.inf(b), a.sup(b));
        self.obstacles.iter().all(|poly| {
            let (pmin, pmax) = poly.bbox();
            if pmin.x > hi.x + radius
                || pmax.x < lo.x - radius
                || pmin.y > hi.y + radius
                || pmax.y < lo.y - radius
            {
                return true;
            }
            poly.edges().all(|e| e.distance_to_segment(&path) >= radius)
        })
    }
}

/// Distance from `origin` along `angle` to the first obstacle edge, map
/// boundary or agent circle, clamped to `max_range`.
pub fn raycast(map: &WorldMap, agents: &[Body], origin: &Vec2, angle: f64, max_range: f64) -> f64 {
    let dir = unit(angle);
    let mut best = map.static_ray(origin, &dir, max_range);
    for agent in agents {
        if let Some(t) = ray_circle(origin, &dir, &agent.center, agent.radius) {
            best = best.min(t);
        }
    }
    best.clamp(0.0, max_range)
}

/// Disk overlap test against obstacles, the outside of the bounds, and agents.
pub fn check_collision(body: &Body, map: &WorldMap, agents: &[Body]) -> bool {
    !map.disk_free(&body.center, body.radius) || agents.iter().any(|a| body.overlaps(a))
}

/// Signed surface-to-surface distance to the nearest obstacle, wall or agent.
pub fn clearance(body: &Body, map: &WorldMap, agents: &[Body]) -> f64 {
    let (_, d_static) = map.nearest_static(&body.center);
    let mut best = d_static - body.radius;
    for a in agents {
        best = best.min((a.center - body.center).norm() - a.radius - body.radius);
    }
    best
}
