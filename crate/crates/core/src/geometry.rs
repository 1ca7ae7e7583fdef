//! Planar geometry kernels shared by the map, sensor and planners.

use std::f64::consts::PI;

pub type Vec2 = nalgebra::Vector2<f64>;

const EPS: f64 = 1e-12;

/// Wraps an angle into (−π, π].
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

pub fn unit(angle: f64) -> Vec2 {
    Vec2::new(angle.cos(), angle.sin())
}

/// 2D cross product (z component).
#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn closest_point(&self, p: &Vec2) -> Vec2 {
        let d = self.b - self.a;
        let len2 = d.norm_squared();
        if len2 < EPS {
            return self.a;
        }
        let t = ((p - self.a).dot(&d) / len2).clamp(0.0, 1.0);
        self.a + d * t
    }

    pub fn distance_to_point(&self, p: &Vec2) -> f64 {
        (p - self.closest_point(p)).norm()
    }

    /// Distance along the ray `origin + t·dir` (unit `dir`) to this segment.
    pub fn ray_hit(&self, origin: &Vec2, dir: &Vec2) -> Option<f64> {
        let e = self.b - self.a;
        let denom = cross(dir, &e);
        if denom.abs() < EPS {
            return None;
        }
        let w = self.a - origin;
        let t = cross(&w, &e) / denom;
        let u = cross(&w, dir) / denom;
        if t >= 0.0 && (-1e-12..=1.0 + 1e-12).contains(&u) {
            Some(t)
        } else {
            None
        }
    }

    pub fn intersects(&self, other: &Segment) -> bool {
        let d1 = orient(&other.a, &other.b, &self.a);
        let d2 = orient(&other.a, &other.b, &self.b);
        let d3 = orient(&self.a, &self.b, &other.a);
        let d4 = orient(&self.a, &self.b, &other.b);
        if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
            && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
        {
            return true;
        }
        (d1 == 0.0 && on_segment(&other.a, &other.b, &self.a))
            || (d2 == 0.0 && on_segment(&other.a, &other.b, &self.b))
            || (d3 == 0.0 && on_segment(&self.a, &self.b, &other.a))
            || (d4 == 0.0 && on_segment(&self.a, &self.b, &other.b))
    }

    pub fn distance_to_segment(&self, other: &Segment) -> f64 {
        if self.intersects(other) {
            return 0.0;
        }
        self.distance_to_point(&other.a)
            .min(self.distance_to_point(&other.b))
            .min(other.distance_to_point(&self.a))
            .min(other.distance_to_point(&self.b))
    }
}

fn orient(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    cross(&(b - a), &(c - a))
}

fn on_segment(a: &Vec2, b: &Vec2, p: &Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Entry distance of the ray `origin + t·dir` (unit `dir`) into a circle.
/// Returns `Some(0.0)` when the origin is already inside.
pub fn ray_circle(origin: &Vec2, dir: &Vec2, center: &Vec2, radius: f64) -> Option<f64> {
    let oc = origin - center;
    let c = oc.norm_squared() - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let b = oc.dot(dir);
    if b > 0.0 {
        return None;
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    Some(-b - disc.sqrt())
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: &Vec2, vertices: &[Vec2]) -> bool {
    let mut inside = false;
    let n = vertices.len();
    let mut j = n - 1;
    for i in 0..n {
        let (vi, vj) = (vertices[i], vertices[j]);
        if (vi.y > p.y) != (vj.y > p.y) && p.x < (vj.x - vi.x) * (p.y - vi.y) / (vj.y - vi.y) + vi.x
        {
            inside = !inside;
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalize_wraps_into_half_open_interval() {
        assert_abs_diff_eq!(normalize_angle(PI), PI);
        assert_abs_diff_eq!(normalize_angle(-PI), PI);
        assert_abs_diff_eq!(normalize_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_angle(0.5), 0.5);
        assert_abs_diff_eq!(normalize_angle(-0.5 - 2.0 * PI), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn ray_hits_perpendicular_segment() {
        let s = Segment::new(Vec2::new(2.0, -1.0), Vec2::new(2.0, 1.0));
        let t = s.ray_hit(&Vec2::zeros(), &Vec2::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(t, 2.0);
        assert!(s.ray_hit(&Vec2::zeros(), &Vec2::new(-1.0, 0.0)).is_none());
    }

    #[test]
    fn ray_circle_entry() {
        let t = ray_circle(&Vec2::zeros(), &Vec2::new(1.0, 0.0), &Vec2::new(3.0, 0.0), 0.3).unwrap();
        assert_abs_diff_eq!(t, 2.7, epsilon = 1e-12);
        assert!(ray_circle(&Vec2::zeros(), &Vec2::new(0.0, 1.0), &Vec2::new(3.0, 0.0), 0.3).is_none());
        assert_eq!(ray_circle(&Vec2::zeros(), &Vec2::new(1.0, 0.0), &Vec2::zeros(), 0.3), Some(0.0));
    }

    #[test]
    fn segment_distances() {
        let s = Segment::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0));
        assert_abs_diff_eq!(s.distance_to_point(&Vec2::new(0.5, 2.0)), 2.0);
        assert_abs_diff_eq!(s.distance_to_point(&Vec2::new(2.0, 0.0)), 1.0);
        let crossing = Segment::new(Vec2::new(0.5, -1.0), Vec2::new(0.5, 1.0));
        assert_eq!(s.distance_to_segment(&crossing), 0.0);
        let parallel = Segment::new(Vec2::new(0.0, 0.5), Vec2::new(1.0, 0.5));
        assert_abs_diff_eq!(s.distance_to_segment(&parallel), 0.5);
    }

    #[test]
    fn polygon_containment() {
        let sq = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(point_in_polygon(&Vec2::new(0.5, 0.5), &sq));
        assert!(!point_in_polygon(&Vec2::new(1.5, 0.5), &sq));
    }
}
