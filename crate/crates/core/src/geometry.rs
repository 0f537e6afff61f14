//! Planar poses, convex polytopes, the vehicle footprint and set distance.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wraps an angle into `[-π, π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let r = a - two_pi * ((a + PI) / two_pi).floor();
    if r >= PI {
        r - two_pi
    } else if r < -PI {
        r + two_pi
    } else {
        r
    }
}

/// Smallest signed difference `a - b` on the circle.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    normalize_angle(a - b)
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }
    pub fn rotate(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Rear-axle position and heading of the vehicle.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose { x, y, theta: normalize_angle(theta) }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Maps a point from the pose frame into the world frame.
    pub fn transform_point(&self, p: Vec2) -> Vec2 {
        p.rotate(self.theta) + self.position()
    }

    pub fn distance(&self, o: &Pose) -> f64 {
        (self.position() - o.position()).norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Moves along a constant-curvature arc of length `s` (exact integration of
/// the kinematic car).
pub fn advance(pose: Pose, curvature: f64, direction: Direction, s: f64) -> Pose {
    let ds = direction.sign() * s;
    let (sin0, cos0) = pose.theta.sin_cos();
    if curvature.abs() < 1e-12 {
        return Pose::new(pose.x + ds * cos0, pose.y + ds * sin0, pose.theta);
    }
    let theta1 = pose.theta + curvature * ds;
    let (sin1, cos1) = theta1.sin_cos();
    Pose::new(
        pose.x + (sin1 - sin0) / curvature,
        pose.y - (cos1 - cos0) / curvature,
        theta1,
    )
}

/// Smallest axis-aligned box holding the points.
pub fn bounding_box(points: &[Vec2]) -> (Vec2, Vec2) {
    points.iter().fold(
        (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), p| (Vec2::new(lo.x.min(p.x), lo.y.min(p.y)), Vec2::new(hi.x.max(p.x), hi.y.max(p.y))),
    )
}

/// Distance between two axis-aligned boxes; zero when they overlap.
pub fn box_gap(a: (Vec2, Vec2), b: (Vec2, Vec2)) -> f64 {
    let dx = (b.0.x - a.1.x).max(a.0.x - b.1.x).max(0.0);
    let dy = (b.0.y - a.1.y).max(a.0.y - b.1.y).max(0.0);
    (dx * dx + dy * dy).sqrt()
}

/// Bounded convex polygon stored both as halfspaces `a·p <= b` and as a
/// counter-clockwise vertex loop.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolytope {
    a: Vec<Vec2>,
    b: Vec<f64>,
    vertices: Vec<Vec2>,
    center: Vec2,
    radius: f64,
    lo: Vec2,
    hi: Vec2,
}

const HULL_EPS: f64 = 1e-9;

impl ConvexPolytope {
    /// Builds a polytope from a vertex loop in either orientation.
    /// Collinear and repeated vertices are dropped; reflex vertices are an error.
    pub fn from_vertices(points: &[Vec2]) -> Result<Self> {
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Validation("polytope vertex is not finite".into()));
        }
        let mut pts: Vec<Vec2> = Vec::with_capacity(points.len());
        for &p in points {
            if pts.last().map_or(true, |q: &Vec2| (*q - p).norm() > HULL_EPS) {
                pts.push(p);
            }
        }
        while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= HULL_EPS {
            pts.pop();
        }
        if pts.len() < 3 {
            return Err(Error::Validation("polytope needs at least 3 distinct vertices".into()));
        }
        let area2: f64 = (0..pts.len())
            .map(|i| pts[i].cross(pts[(i + 1) % pts.len()]))
            .sum();
        if area2.abs() <= HULL_EPS {
            return Err(Error::Validation("polytope has zero area".into()));
        }
        if area2 < 0.0 {
            pts.reverse();
        }
        let scale = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let mut kept = Vec::with_capacity(pts.len());
        let n = pts.len();
        for i in 0..n {
            let prev = pts[(i + n - 1) % n];
            let cur = pts[i];
            let next = pts[(i + 1) % n];
            let turn = (cur - prev).cross(next - cur);
            if turn < -HULL_EPS * scale {
                return Err(Error::Validation("obstacle polygon is not convex".into()));
            }
            if turn > HULL_EPS * scale {
                kept.push(cur);
            }
        }
        if kept.len() < 3 {
            return Err(Error::Validation("polytope has zero area".into()));
        }
        // A loop that winds more than once can pass the local turn test.
        let total: f64 = (0..kept.len())
            .map(|i| {
                let p = kept[(i + kept.len() - 1) % kept.len()];
                let c = kept[i];
                let q = kept[(i + 1) % kept.len()];
                let (e0, e1) = (c - p, q - c);
                e0.cross(e1).atan2(e0.dot(e1))
            })
            .sum();
        if (total - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::Validation("obstacle polygon is not convex".into()));
        }
        Ok(Self::from_ccw_unchecked(kept))
    }

    fn from_ccw_unchecked(vertices: Vec<Vec2>) -> Self {
        let n = vertices.len();
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for i in 0..n {
            let e = vertices[(i + 1) % n] - vertices[i];
            let len = e.norm();
            let normal = Vec2::new(e.y / len, -e.x / len);
            a.push(normal);
            b.push(normal.dot(vertices[i]));
        }
        let center = vertices.iter().fold(Vec2::default(), |acc, &v| acc + v) * (1.0 / n as f64);
        let radius = vertices.iter().map(|&v| (v - center).norm()).fold(0.0, f64::max);
        let (lo, hi) = bounding_box(&vertices);
        ConvexPolytope { a, b, vertices, center, radius, lo, hi }
    }

    /// Builds a polytope from halfspaces `a_i·p <= b_i`. The set must be bounded
    /// with non-empty interior.
    pub fn from_halfspaces(a: &[Vec2], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() || a.len() < 3 {
            return Err(Error::Validation("need at least 3 halfspaces".into()));
        }
        let mut pts: Vec<Vec2> = Vec::new();
        for i in 0..a.len() {
            for j in (i + 1)..a.len() {
                let det = a[i].cross(a[j]);
                if det.abs() < 1e-12 {
                    continue;
                }
                let p = Vec2::new(
                    (b[i] * a[j].y - b[j] * a[i].y) / det,
                    (a[i].x * b[j] - a[j].x * b[i]) / det,
                );
                let inside = a.iter().zip(b).all(|(ak, &bk)| {
                    ak.dot(p) <= bk + HULL_EPS * ak.norm().max(1.0) * (1.0 + p.norm())
                });
                if inside && pts.iter().all(|q| (*q - p).norm() > HULL_EPS) {
                    pts.push(p);
                }
            }
        }
        if pts.len() < 3 {
            return Err(Error::Validation("halfspaces do not bound a polygon".into()));
        }
        let c = pts.iter().fold(Vec2::default(), |acc, &v| acc + v) * (1.0 / pts.len() as f64);
        pts.sort_by(|p, q| {
            let ap = (p.y - c.y).atan2(p.x - c.x);
            let aq = (q.y - c.y).atan2(q.x - c.x);
            ap.total_cmp(&aq)
        });
        Self::from_vertices(&pts)
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::from_vertices(&[
            Vec2::new(x0, y0),
            Vec2::new(x1, y0),
            Vec2::new(x1, y1),
            Vec2::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Unit outward face normals.
    pub fn normals(&self) -> &[Vec2] {
        &self.a
    }

    pub fn offsets(&self) -> &[f64] {
        &self.b
    }

    /// Vertex centroid used for bounding-circle tests.
    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn bounding_radius(&self) -> f64 {
        self.radius
    }

    /// Axis-aligned bounding box as (min corner, max corner).
    pub fn aabb(&self) -> (Vec2, Vec2) {
        (self.lo, self.hi)
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n]))
            .sum::<f64>()
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.a.iter().zip(&self.b).all(|(a, &b)| a.dot(p) <= b + HULL_EPS)
    }

    /// Applies the rigid motion of `pose` to the polytope.
    pub fn transformed(&self, pose: &Pose) -> Self {
        let vertices = self.vertices.iter().map(|&v| pose.transform_point(v)).collect();
        Self::from_ccw_unchecked(vertices)
    }

    pub fn translated(&self, d: Vec2) -> Self {
        let vertices = self.vertices.iter().map(|&v| v + d).collect();
        Self::from_ccw_unchecked(vertices)
    }

    /// Reflection about the line `x = 0`.
    pub fn mirrored_x(&self) -> Self {
        let mut vertices: Vec<Vec2> = self.vertices.iter().map(|v| Vec2::new(-v.x, v.y)).collect();
        vertices.reverse();
        Self::from_ccw_unchecked(vertices)
    }

    fn support(&self, d: Vec2) -> Vec2 {
        let mut best = self.vertices[0];
        let mut best_dot = best.dot(d);
        for &v in &self.vertices[1..] {
            let k = v.dot(d);
            if k > best_dot {
                best = v;
                best_dot = k;
            }
        }
        best
    }

    /// Euclidean distance from a point to the set (0 inside).
    pub fn point_distance(&self, p: Vec2) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        let n = self.vertices.len();
        (0..n)
            .map(|i| point_segment_distance(p, self.vertices[i], self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    let t = if len2 > 0.0 { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (a + ab * t - p).norm()
}

const GJK_MAX_ITER: usize = 100;

/// Minimum Euclidean distance between two convex polytopes, 0 when they touch
/// or overlap.
pub fn polytope_distance(p: &ConvexPolytope, q: &ConvexPolytope) -> Result<f64> {
    closest_approach(p, q).map(|v| clamp_tiny(v.norm()))
}

/// Vector `p* - q*` between the closest points of the two sets; zero when they
/// intersect.
pub fn closest_approach(p: &ConvexPolytope, q: &ConvexPolytope) -> Result<Vec2> {
    // Closest point to the origin of the Minkowski difference P - Q.
    let support = |d: Vec2| p.support(d) - q.support(-d);
    let mut simplex: Vec<Vec2> = Vec::with_capacity(3);
    let mut v = p.vertices[0] - q.vertices[0];
    for _ in 0..GJK_MAX_ITER {
        let vv = v.norm_sq();
        if vv < 1e-20 {
            return Ok(Vec2::default());
        }
        let w = support(-v);
        if vv - v.dot(w) <= 1e-12 * vv || simplex.iter().any(|s| (*s - w).norm_sq() < 1e-24) {
            return Ok(v);
        }
        simplex.push(w);
        match reduce_simplex(&mut simplex) {
            Some(closest) => v = closest,
            None => return Ok(Vec2::default()),
        }
    }
    Err(Error::NonConvergence { iterations: GJK_MAX_ITER })
}

fn clamp_tiny(d: f64) -> f64 {
    if d < 1e-10 {
        0.0
    } else {
        d
    }
}

/// Replaces the simplex by the smallest sub-simplex containing the point
/// closest to the origin and returns that point, or `None` if the origin is
/// enclosed.
fn reduce_simplex(s: &mut Vec<Vec2>) -> Option<Vec2> {
    match s.len() {
        1 => Some(s[0]),
        2 => {
            let (a, b) = (s[0], s[1]);
            let (pt, keep) = closest_on_segment(a, b);
            *s = keep;
            Some(pt)
        }
        _ => {
            let (a, b, c) = (s[0], s[1], s[2]);
            let d1 = (b - a).cross(-a);
            let d2 = (c - b).cross(-b);
            let d3 = (a - c).cross(-c);
            let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
            let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
            if !(has_neg && has_pos) {
                return None;
            }
            let mut best: Option<(f64, Vec2, Vec<Vec2>)> = None;
            for (u, w) in [(a, b), (b, c), (c, a)] {
                let (pt, keep) = closest_on_segment(u, w);
                let d = pt.norm_sq();
                if best.as_ref().map_or(true, |(bd, _, _)| d < *bd) {
                    best = Some((d, pt, keep));
                }
            }
            let (_, pt, keep) = best.unwrap();
            *s = keep;
            Some(pt)
        }
    }
}

fn closest_on_segment(a: Vec2, b: Vec2) -> (Vec2, Vec<Vec2>) {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 <= 0.0 {
        return (a, vec![a]);
    }
    let t = -a.dot(ab) / len2;
    if t <= 0.0 {
        (a, vec![a])
    } else if t >= 1.0 {
        (b, vec![b])
    } else {
        (a + ab * t, vec![a, b])
    }
}

/// Rigid body dimensions of the car; the reference point is the rear axle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehicleGeometry {
    pub length: f64,
    pub width: f64,
    pub wheelbase: f64,
    pub max_steer: f64,
    pub rear_overhang: f64,
}

impl Default for VehicleGeometry {
    fn default() -> Self {
        VehicleGeometry {
            length: 4.7,
            width: 2.0,
            wheelbase: 2.7,
            max_steer: 0.6,
            rear_overhang: 1.0,
        }
    }
}

impl VehicleGeometry {
    pub fn validate(&self) -> Result<()> {
        let ok = self.length > self.wheelbase
            && self.wheelbase > 0.0
            && self.width > 0.0
            && self.max_steer > 0.0
            && self.max_steer < PI / 2.0
            && self.rear_overhang >= 0.0
            && self.rear_overhang < self.length;
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("invalid vehicle geometry {self:?}")))
        }
    }

    pub fn min_turn_radius(&self) -> f64 {
        self.wheelbase / self.max_steer.tan()
    }

    pub fn max_curvature(&self) -> f64 {
        self.max_steer.tan() / self.wheelbase
    }

    /// Path curvature produced by a steering angle.
    pub fn curvature(&self, steer: f64) -> f64 {
        steer.tan() / self.wheelbase
    }

    /// Footprint at the identity pose.
    pub fn body(&self) -> ConvexPolytope {
        let (r, f, h) = (-self.rear_overhang, self.length - self.rear_overhang, self.width / 2.0);
        ConvexPolytope::from_ccw_unchecked(vec![
            Vec2::new(r, -h),
            Vec2::new(f, -h),
            Vec2::new(f, h),
            Vec2::new(r, h),
        ])
    }

    /// Offset from the rear axle to the body center, along the heading.
    pub fn center_offset(&self) -> f64 {
        self.length / 2.0 - self.rear_overhang
    }

    /// Largest speed of any body corner per unit path length while moving on
    /// an arc of the given curvature.
    pub fn corner_speed(&self, curvature: f64) -> f64 {
        self.body()
            .vertices()
            .iter()
            .map(|v| ((v.y * curvature).powi(2) + (1.0 - v.x * curvature).powi(2)).sqrt())
            .fold(0.0, f64::max)
    }
}

pub fn vehicle_footprint(geom: &VehicleGeometry, pose: &Pose) -> ConvexPolytope {
    geom.body().transformed(pose)
}

/// True when the footprint at `pose` is within `margin` of any obstacle.
/// A non-converging distance query counts as a collision.
pub fn footprint_collides(
    geom: &VehicleGeometry,
    pose: &Pose,
    obstacles: &[ConvexPolytope],
    margin: f64,
) -> bool {
    let body = vehicle_footprint(geom, pose);
    obstacles.iter().any(|o| {
        let gap = (body.center - o.center).norm() - body.radius - o.radius;
        gap <= margin && polytope_distance(&body, o).map_or(true, |d| d <= margin)
    })
}
