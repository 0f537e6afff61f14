//! Shortest bounded-curvature paths with reversals.
//!
//! Words are solved in the unit-radius frame of the start pose and searched
//! over the CSC, CCC, CCCC, CCSC and CCSCC families together with their
//! time-flip, reflection and backwards variants.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::geometry::{advance, Direction, Pose};
use crate::path::Piece;
use crate::world::World;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SegmentKind {
    Left,
    Straight,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RsSegment {
    pub kind: SegmentKind,
    pub direction: Direction,
    /// Meters of travel, never negative.
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RsPath {
    pub segments: Vec<RsSegment>,
    pub turn_radius: f64,
    pub total_length: f64,
}

impl RsPath {
    pub fn curvature(&self, kind: SegmentKind) -> f64 {
        match kind {
            SegmentKind::Left => 1.0 / self.turn_radius,
            SegmentKind::Straight => 0.0,
            SegmentKind::Right => -1.0 / self.turn_radius,
        }
    }

    pub fn cusp_count(&self) -> usize {
        self.segments
            .windows(2)
            .filter(|w| w[0].direction != w[1].direction)
            .count()
    }

    /// Constant-curvature pieces when driven from `from`.
    pub fn pieces(&self, from: Pose) -> Vec<Piece> {
        let mut out = Vec::with_capacity(self.segments.len());
        let mut pose = from;
        for s in &self.segments {
            let kappa = self.curvature(s.kind);
            out.push(Piece { start: pose, curvature: kappa, direction: s.direction, length: s.length });
            pose = advance(pose, kappa, s.direction, s.length);
        }
        out
    }

    pub fn end_pose(&self, from: Pose) -> Pose {
        self.pieces(from)
            .last()
            .map_or(from, |p| advance(p.start, p.curvature, p.direction, p.length))
    }

    /// The same curve traversed from its end back to its start.
    pub fn reversed(&self) -> RsPath {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| RsSegment { direction: s.direction.flip(), ..*s })
            .collect();
        RsPath { segments, ..*self }
    }
}

const ZERO: f64 = 10.0 * f64::EPSILON;
/// Normalized segment lengths below this are dropped.
const DROP: f64 = 1e-10;

/// Wraps into `[-π, π]`.
fn mod2pi(x: f64) -> f64 {
    let v = x % (2.0 * PI);
    if v < -PI {
        v + 2.0 * PI
    } else if v > PI {
        v - 2.0 * PI
    } else {
        v
    }
}

fn polar(x: f64, y: f64) -> (f64, f64) {
    ((x * x + y * y).sqrt(), y.atan2(x))
}

fn tau_omega(u: f64, v: f64, xi: f64, eta: f64, phi: f64) -> (f64, f64) {
    let delta = mod2pi(u - v);
    let a = u.sin() - delta.sin();
    let b = u.cos() - delta.cos() - 1.0;
    let t1 = (eta * a - xi * b).atan2(xi * a + eta * b);
    let t2 = 2.0 * (delta.cos() - v.cos() - u.cos()) + 3.0;
    let tau = if t2 < 0.0 { mod2pi(t1 + PI) } else { mod2pi(t1) };
    (tau, mod2pi(tau - u + v - phi))
}

fn lp_sp_lp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (u, t) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if t >= -ZERO {
        let v = mod2pi(phi - t);
        if v >= -ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_sp_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (u1, t1) = polar(x + phi.sin(), y - 1.0 - phi.cos());
    let u1 = u1 * u1;
    if u1 >= 4.0 {
        let u = (u1 - 4.0).sqrt();
        let t = mod2pi(t1 + 2f64.atan2(u));
        let v = mod2pi(t - phi);
        if t >= -ZERO && v >= -ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_l(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (u1, theta) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if u1 <= 4.0 {
        let u = -2.0 * (0.25 * u1).asin();
        let t = mod2pi(theta + 0.5 * u + PI);
        let v = mod2pi(phi - t + u);
        if t >= -ZERO && u <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rup_lum_rm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let rho = 0.25 * (2.0 + (xi * xi + eta * eta).sqrt());
    if rho <= 1.0 {
        let u = rho.acos();
        let (t, v) = tau_omega(u, -u, xi, eta, phi);
        if t >= -ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rum_lum_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let rho = (20.0 - xi * xi - eta * eta) / 16.0;
    if (0.0..=1.0).contains(&rho) {
        let u = -rho.acos();
        if u >= -FRAC_PI_2 {
            let (t, v) = tau_omega(u, u, xi, eta, phi);
            if t >= -ZERO && v >= -ZERO {
                return Some((t, u, v));
            }
        }
    }
    None
}

fn lp_rm_sm_lm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (rho, theta) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if rho >= 2.0 {
        let r = (rho * rho - 4.0).sqrt();
        let u = 2.0 - r;
        let t = mod2pi(theta + r.atan2(-2.0));
        let v = mod2pi(phi - FRAC_PI_2 - t);
        if t >= -ZERO && u <= ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_sm_rm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let (rho, theta) = polar(-eta, xi);
    if rho >= 2.0 {
        let t = theta;
        let u = 2.0 - rho;
        let v = mod2pi(t + FRAC_PI_2 - phi);
        if t >= -ZERO && u <= ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_s_lm_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let (rho, _) = polar(xi, eta);
    if rho >= 2.0 {
        let u = 4.0 - (rho * rho - 4.0).sqrt();
        if u <= ZERO {
            let t = mod2pi(((4.0 - u) * xi - 2.0 * eta).atan2(-2.0 * xi + (u - 4.0) * eta));
            let v = mod2pi(t - phi);
            if t >= -ZERO && v >= -ZERO {
                return Some((t, u, v));
            }
        }
    }
    None
}

use SegmentKind::{Left as L, Right as R, Straight as S};

const WORDS: [&[SegmentKind]; 18] = [
    &[L, R, L],
    &[R, L, R],
    &[L, R, L, R],
    &[R, L, R, L],
    &[L, R, S, L],
    &[R, L, S, R],
    &[L, S, R, L],
    &[R, S, L, R],
    &[L, R, S, R],
    &[R, L, S, L],
    &[R, S, R, L],
    &[L, S, L, R],
    &[L, S, R],
    &[R, S, L],
    &[L, S, L],
    &[R, S, R],
    &[L, R, S, L, R],
    &[R, L, S, R, L],
];

/// Best word found so far, in normalized (unit radius) lengths.
struct Best {
    word: usize,
    lengths: [f64; 5],
    total: f64,
}

impl Best {
    fn offer(&mut self, word: usize, lengths: &[f64]) {
        let total: f64 = lengths.iter().map(|l| l.abs()).sum();
        if total < self.total {
            self.word = word;
            self.total = total;
            self.lengths = [0.0; 5];
            self.lengths[..lengths.len()].copy_from_slice(lengths);
        }
    }
}

type Solver = fn(f64, f64, f64) -> Option<(f64, f64, f64)>;

/// Applies a solver to the pose and to its time-flip, reflection and combined
/// variants. `build` maps `(t, u, v)` to segment lengths; time-flipped
/// variants drive every segment the other way.
fn four_ways(
    best: &mut Best,
    (x, y, phi): (f64, f64, f64),
    solver: Solver,
    words: (usize, usize),
    build: impl Fn(f64, f64, f64) -> Vec<f64>,
) {
    let variants = [(x, y, phi, words.0, false), (-x, y, -phi, words.0, true), (x, -y, -phi, words.1, false), (-x, -y, phi, words.1, true)];
    for (vx, vy, vphi, word, flip) in variants {
        if let Some((t, u, v)) = solver(vx, vy, vphi) {
            let mut lengths = build(t, u, v);
            if flip {
                lengths.iter_mut().for_each(|l| *l = -*l);
            }
            best.offer(word, &lengths);
        }
    }
}

fn solve_normalized(x: f64, y: f64, phi: f64) -> Best {
    let mut best = Best { word: 0, lengths: [0.0; 5], total: f64::INFINITY };
    let fwd = (x, y, phi);
    let bwd = (x * phi.cos() + y * phi.sin(), x * phi.sin() - y * phi.cos(), phi);
    let h = FRAC_PI_2;

    // CSC
    four_ways(&mut best, fwd, lp_sp_lp, (14, 15), |t, u, v| vec![t, u, v]);
    four_ways(&mut best, fwd, lp_sp_rp, (12, 13), |t, u, v| vec![t, u, v]);
    // CCC
    four_ways(&mut best, fwd, lp_rm_l, (0, 1), |t, u, v| vec![t, u, v]);
    four_ways(&mut best, bwd, lp_rm_l, (0, 1), |t, u, v| vec![v, u, t]);
    // CCCC
    four_ways(&mut best, fwd, lp_rup_lum_rm, (2, 3), |t, u, v| vec![t, u, -u, v]);
    four_ways(&mut best, fwd, lp_rum_lum_rp, (2, 3), |t, u, v| vec![t, u, u, v]);
    // CCSC
    four_ways(&mut best, fwd, lp_rm_sm_lm, (4, 5), |t, u, v| vec![t, -h, u, v]);
    four_ways(&mut best, fwd, lp_rm_sm_rm, (8, 9), |t, u, v| vec![t, -h, u, v]);
    four_ways(&mut best, bwd, lp_rm_sm_lm, (6, 7), |t, u, v| vec![v, u, -h, t]);
    four_ways(&mut best, bwd, lp_rm_sm_rm, (10, 11), |t, u, v| vec![v, u, -h, t]);
    // CCSCC
    four_ways(&mut best, fwd, lp_rm_s_lm_rp, (16, 17), |t, u, v| vec![t, -h, u, -h, v]);
    best
}

pub fn rs_shortest(from: Pose, to: Pose, turn_radius: f64) -> RsPath {
    assert!(turn_radius > 0.0, "turn radius must be positive");
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    let (s, c) = from.theta.sin_cos();
    let x = (c * dx + s * dy) / turn_radius;
    let y = (-s * dx + c * dy) / turn_radius;
    let phi = to.theta - from.theta;
    let best = solve_normalized(x, y, phi);
    let word = WORDS[best.word];
    let mut segments = Vec::with_capacity(word.len());
    for (&kind, &len) in word.iter().zip(&best.lengths) {
        if len.abs() < DROP {
            continue;
        }
        let direction = if len > 0.0 { Direction::Forward } else { Direction::Backward };
        segments.push(RsSegment { kind, direction, length: len.abs() * turn_radius });
    }
    let total_length = segments.iter().map(|s| s.length).sum();
    RsPath { segments, turn_radius, total_length }
}

/// Poses along the path no farther apart than `step`, including both ends,
/// each tagged with the direction of the motion that reaches it.
pub fn rs_sample(path: &RsPath, from: Pose, step: f64) -> Vec<(Pose, Direction)> {
    assert!(step > 0.0, "step must be positive");
    let pieces = path.pieces(from);
    let mut out = vec![(from, pieces.first().map_or(Direction::Forward, |p| p.direction))];
    for p in &pieces {
        out.extend(p.sample(step).into_iter().skip(1).map(|q| (q, p.direction)));
    }
    out
}

/// Shortest path from `from` to `to` if it is collision-free in `world`.
pub fn rs_expansion(from: Pose, to: Pose, turn_radius: f64, world: &World) -> Option<RsPath> {
    let path = rs_shortest(from, to, turn_radius);
    if !world.pose_is_free(&to) {
        return None;
    }
    let free = path
        .pieces(from)
        .iter()
        .all(|p| world.motion_is_free(p.start, p.curvature, p.direction, p.length));
    free.then_some(path)
}
