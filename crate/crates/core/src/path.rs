//! Planned paths built from constant-curvature pieces.

use serde::{Deserialize, Serialize};

use crate::geometry::{advance, angle_diff, Direction, Pose};

/// A constant-curvature motion: `length` meters from `start`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub start: Pose,
    pub curvature: f64,
    pub direction: Direction,
    pub length: f64,
}

impl Piece {
    pub fn end(&self) -> Pose {
        advance(self.start, self.curvature, self.direction, self.length)
    }

    pub fn pose_at(&self, s: f64) -> Pose {
        advance(self.start, self.curvature, self.direction, s)
    }

    /// Poses at equal spacing no larger than `step`, both ends included.
    pub fn sample(&self, step: f64) -> Vec<Pose> {
        let n = ((self.length / step) - 1e-9).ceil().max(1.0) as usize;
        let h = self.length / n as f64;
        (0..=n).map(|k| self.pose_at(k as f64 * h)).collect()
    }

    /// The same motion driven from its end back to its start.
    pub fn reversed(&self) -> Piece {
        Piece { start: self.end(), direction: self.direction.flip(), ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    ForwardExpansion,
    ForwardRs,
    BackwardRs,
    BackwardExpansion,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Waypoint {
    pub pose: Pose,
    /// Direction of travel on the motion that arrives here (the first
    /// waypoint takes the direction of the first motion).
    pub direction: Direction,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannedPath {
    pub pieces: Vec<(Piece, Provenance)>,
    pub waypoints: Vec<Waypoint>,
    pub total_length: f64,
    pub cusp_count: usize,
    pub step: f64,
}

const MIN_PIECE: f64 = 1e-9;

impl PlannedPath {
    /// Concatenates pieces and samples them at `step`. The junction pose
    /// shared by consecutive pieces is emitted once.
    pub fn from_pieces(start: Pose, pieces: Vec<(Piece, Provenance)>, step: f64) -> Self {
        let pieces: Vec<(Piece, Provenance)> = pieces.into_iter().filter(|(p, _)| p.length > MIN_PIECE).collect();
        let mut waypoints = Vec::new();
        match pieces.first() {
            Some((p, prov)) => waypoints.push(Waypoint { pose: p.start, direction: p.direction, provenance: *prov }),
            None => waypoints.push(Waypoint { pose: start, direction: Direction::Forward, provenance: Provenance::ForwardRs }),
        }
        for (p, prov) in &pieces {
            for pose in p.sample(step).into_iter().skip(1) {
                waypoints.push(Waypoint { pose, direction: p.direction, provenance: *prov });
            }
        }
        let cusp_count = waypoints.windows(2).filter(|w| w[0].direction != w[1].direction).count();
        let total_length = pieces.iter().map(|(p, _)| p.length).sum();
        PlannedPath { pieces, waypoints, total_length, cusp_count, step }
    }

    pub fn start(&self) -> Pose {
        self.waypoints[0].pose
    }

    pub fn end(&self) -> Pose {
        self.waypoints[self.waypoints.len() - 1].pose
    }

    /// Re-samples the exact curve at a different step.
    pub fn resample(&self, step: f64) -> Vec<(Pose, Direction)> {
        let mut out = vec![(self.start(), self.waypoints[0].direction)];
        for (p, _) in &self.pieces {
            out.extend(p.sample(step).into_iter().skip(1).map(|q| (q, p.direction)));
        }
        out
    }

    /// Length contributed by pieces of one provenance.
    pub fn length_of(&self, provenance: Provenance) -> f64 {
        self.pieces.iter().filter(|(_, p)| *p == provenance).map(|(p, _)| p.length).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuityRow {
    /// Arc length from the start of the path.
    pub s: f64,
    pub dx: f64,
    pub dy: f64,
    pub curvature: f64,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityReport {
    pub rows: Vec<ContinuityRow>,
    pub max_gap: f64,
    pub max_curvature: f64,
}

/// Finite-difference derivatives along the path, computed separately on each
/// run of constant travel direction.
pub fn continuity_report(path: &PlannedPath) -> ContinuityReport {
    let w: Vec<(Pose, Direction)> = path.waypoints.iter().map(|w| (w.pose, w.direction)).collect();
    continuity_of(&w)
}

/// As [`continuity_report`], for bare directed poses such as a loaded
/// waypoint file. Each direction tags the motion arriving at its pose.
pub fn continuity_of(w: &[(Pose, Direction)]) -> ContinuityReport {
    let mut s = vec![0.0; w.len()];
    let mut max_gap: f64 = 0.0;
    for i in 1..w.len() {
        let gap = w[i].0.distance(&w[i - 1].0);
        max_gap = max_gap.max(gap);
        s[i] = s[i - 1] + gap;
    }
    let mut rows = Vec::new();
    let mut max_curvature: f64 = 0.0;
    let mut begin = 0;
    while begin + 1 < w.len() {
        let dir = w[begin + 1].1;
        let mut end = begin + 1;
        while end + 1 < w.len() && w[end + 1].1 == dir {
            end += 1;
        }
        for i in begin..=end {
            if i == begin && begin > 0 {
                continue;
            }
            let (a, b) = (i.saturating_sub(1).max(begin), (i + 1).min(end));
            let ds = s[b] - s[a];
            let (dx, dy, k) = if ds > 0.0 {
                let (pa, pb) = (w[a].0, w[b].0);
                (
                    (pb.x - pa.x) / ds,
                    (pb.y - pa.y) / ds,
                    dir.sign() * angle_diff(pb.theta, pa.theta) / ds,
                )
            } else {
                (0.0, 0.0, 0.0)
            };
            max_curvature = max_curvature.max(k.abs());
            rows.push(ContinuityRow { s: s[i], dx, dy, curvature: k, direction: dir });
        }
        begin = end;
    }
    ContinuityReport { rows, max_gap, max_curvature }
}
