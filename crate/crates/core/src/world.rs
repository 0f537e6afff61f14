//! Static obstacle scene and continuous collision checks along arcs.

use crate::geometry::{
    advance, bounding_box, box_gap, polytope_distance, ConvexPolytope, Direction, Pose, Vec2, VehicleGeometry,
};

/// Axis-aligned rectangle the rear axle must stay inside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Bounds {
    pub fn contains(&self, p: &Pose) -> bool {
        p.x >= self.x.0 && p.x <= self.x.1 && p.y >= self.y.0 && p.y <= self.y.1
    }
}

#[derive(Clone, Debug)]
pub struct World {
    pub geometry: VehicleGeometry,
    pub obstacles: Vec<ConvexPolytope>,
    pub margin: f64,
    /// Sampling step along motions, in meters of path.
    pub step: f64,
    pub bounds: Option<Bounds>,
    body: ConvexPolytope,
}

const MAX_BISECTIONS: u32 = 8;

impl World {
    pub fn new(geometry: VehicleGeometry, obstacles: Vec<ConvexPolytope>, margin: f64) -> Self {
        World {
            body: geometry.body(),
            geometry,
            obstacles,
            margin,
            step: 0.1,
            bounds: None,
        }
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn footprint(&self, pose: &Pose) -> ConvexPolytope {
        self.body.transformed(pose)
    }

    /// Distance from the footprint to the nearest obstacle, or `cap` if every
    /// obstacle is at least that far. Returns as soon as some obstacle is
    /// within the margin. Out-of-bounds poses report `-1`.
    pub fn clearance(&self, pose: &Pose, cap: f64) -> f64 {
        if let Some(b) = &self.bounds {
            if !b.contains(pose) {
                return -1.0;
            }
        }
        let center = pose.transform_point(self.body.center());
        let radius = self.body.bounding_radius();
        let corners: Vec<Vec2> = self.body.vertices().iter().map(|&v| pose.transform_point(v)).collect();
        let aabb = bounding_box(&corners);
        let mut fp: Option<ConvexPolytope> = None;
        let mut best = cap;
        for o in &self.obstacles {
            let lower = (center - o.center()).norm() - radius - o.bounding_radius();
            if lower >= best || box_gap(aabb, o.aabb()) >= best {
                continue;
            }
            let body = fp.get_or_insert_with(|| self.body.transformed(pose));
            let d = polytope_distance(body, o).unwrap_or(-1.0);
            if d < best {
                best = d;
                if best <= self.margin {
                    return best;
                }
            }
        }
        best
    }

    pub fn pose_is_free(&self, pose: &Pose) -> bool {
        self.clearance(pose, self.margin + 1.0) > self.margin
    }

    /// Certifies a constant-curvature motion as collision-free over its whole
    /// length, not just at the samples. Between two samples no body point
    /// moves farther than `speed * h`, so the clearances at both ends bound
    /// the clearance in between; intervals that cannot be certified that way
    /// are bisected.
    pub fn motion_is_free(&self, start: Pose, curvature: f64, direction: Direction, length: f64) -> bool {
        if length <= 0.0 {
            return self.pose_is_free(&start);
        }
        let speed = self.geometry.corner_speed(curvature);
        let n = ((length / self.step) - 1e-9).ceil().max(1.0) as usize;
        let h = length / n as f64;
        let cap = self.margin + 1.01 * speed * h + 1e-6;
        let at = |s: f64| advance(start, curvature, direction, s);

        // Coarse pass first so blocked motions are rejected cheaply.
        let mut c = vec![f64::NAN; n + 1];
        let stride = 8usize.min(n);
        let mut order: Vec<usize> = (0..=n).step_by(stride).collect();
        if n % stride != 0 {
            order.push(n);
        }
        order.extend((0..=n).filter(|k| k % stride != 0 && *k != n));
        for k in order {
            let v = self.clearance(&at(k as f64 * h), cap);
            if v <= self.margin {
                return false;
            }
            c[k] = v;
        }
        (0..n).all(|k| {
            self.interval_is_free(&at, k as f64 * h, (k + 1) as f64 * h, c[k], c[k + 1], speed, cap, 0)
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn interval_is_free(
        &self,
        at: &impl Fn(f64) -> Pose,
        s0: f64,
        s1: f64,
        c0: f64,
        c1: f64,
        speed: f64,
        cap: f64,
        depth: u32,
    ) -> bool {
        let m = self.margin;
        if (c0 - m) + (c1 - m) > speed * (s1 - s0) {
            return true;
        }
        if depth >= MAX_BISECTIONS {
            return false;
        }
        let mid = 0.5 * (s0 + s1);
        let cm = self.clearance(&at(mid), cap);
        cm > m
            && self.interval_is_free(at, s0, mid, c0, cm, speed, cap, depth + 1)
            && self.interval_is_free(at, mid, s1, cm, c1, speed, cap, depth + 1)
    }

    /// Obstacles clipped to those touching the given rectangle.
    pub fn obstacles_near(&self, lo: Vec2, hi: Vec2, pad: f64) -> Vec<ConvexPolytope> {
        self.obstacles
            .iter()
            .filter(|o| {
                let c = o.center();
                let r = o.bounding_radius() + pad;
                c.x + r >= lo.x && c.x - r <= hi.x && c.y + r >= lo.y && c.y - r <= hi.y
            })
            .cloned()
            .collect()
    }
}
