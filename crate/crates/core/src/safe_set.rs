//! Collision-free cells of the grid, their intersection with a reachable
//! tube, and seeded sampling of connected states from it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, polytope_distance, ConvexPolytope, Pose, Vec2, VehicleGeometry};
use crate::grid::{Grid3, ValueField};
use crate::reach::{goal_level_set, solve_brt_from, BrtResult, DubinsParams, GoalSet, SolverOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct SafetyMask {
    pub grid: Grid3,
    pub safe: Vec<bool>,
}

impl SafetyMask {
    pub fn safe_count(&self) -> usize {
        self.safe.iter().filter(|&&s| s).count()
    }
}

/// Flags each cell whose footprint keeps more than `margin` from every
/// obstacle. Obstacles that cannot reach any footprint on the grid are
/// dropped first.
pub fn compute_safety_mask(
    grid: &Grid3,
    geom: &VehicleGeometry,
    obstacles: &[ConvexPolytope],
    margin: f64,
) -> Result<SafetyMask> {
    let body = geom.body();
    let reach = body.center().norm() + body.bounding_radius() + margin;
    let (lo, hi) = (Vec2::new(grid.lo[0] - reach, grid.lo[1] - reach), Vec2::new(grid.hi[0] + reach, grid.hi[1] + reach));
    let near: Vec<&ConvexPolytope> = obstacles
        .iter()
        .filter(|o| {
            let (c, r) = (o.center(), o.bounding_radius());
            c.x + r >= lo.x && c.x - r <= hi.x && c.y + r >= lo.y && c.y - r <= hi.y
        })
        .collect();
    let flags = grid.par_map(|idx| -> Result<bool> {
        let pose = grid.cell_pose(idx);
        let center = pose.transform_point(body.center());
        let mut fp = None;
        for o in &near {
            if (center - o.center()).norm() - body.bounding_radius() - o.bounding_radius() > margin {
                continue;
            }
            let f = fp.get_or_insert_with(|| body.transformed(&pose));
            if polytope_distance(f, o)? <= margin {
                return Ok(false);
            }
        }
        Ok(true)
    });
    let safe = flags.into_iter().collect::<Result<Vec<bool>>>()?;
    Ok(SafetyMask { grid: grid.clone(), safe })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SafeReachableSet {
    pub grid: Grid3,
    pub member: Vec<bool>,
    /// Cell-center poses of the members, in flat cell order.
    pub member_poses: Vec<Pose>,
}

impl SafeReachableSet {
    pub fn len(&self) -> usize {
        self.member_poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_poses.is_empty()
    }
}

pub fn intersect(mask: &SafetyMask, brt: &BrtResult) -> Result<SafeReachableSet> {
    if mask.grid != brt.field.grid {
        return Err(Error::GridMismatch);
    }
    let grid = mask.grid.clone();
    let member: Vec<bool> = mask.safe.iter().zip(&brt.field.values).map(|(&s, &v)| s && v <= 0.0).collect();
    let member_poses = member
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(f, _)| grid.cell_pose(grid.unflat(f)))
        .collect();
    Ok(SafeReachableSet { grid, member, member_poses })
}

/// `a x + b y ≥ c`, or `>` when strict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(default)]
    pub strict: bool,
}

impl HalfPlane {
    pub fn x_at_least(c: f64) -> Self {
        HalfPlane { a: 1.0, b: 0.0, c, strict: false }
    }
    pub fn x_above(c: f64) -> Self {
        HalfPlane { a: 1.0, b: 0.0, c, strict: true }
    }
    pub fn x_below(c: f64) -> Self {
        HalfPlane { a: -1.0, b: 0.0, c: -c, strict: true }
    }
    pub fn y_above(c: f64) -> Self {
        HalfPlane { a: 0.0, b: 1.0, c, strict: true }
    }

    pub fn holds(&self, x: f64, y: f64) -> bool {
        let v = self.a * x + self.b * y;
        if self.strict {
            v > self.c
        } else {
            v >= self.c
        }
    }
}

/// Conjunction of halfplanes in world coordinates plus an optional heading
/// window `[lo, hi]` (wrapping when `lo > hi`).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplingPredicate {
    #[serde(default)]
    pub halfplanes: Vec<HalfPlane>,
    #[serde(default)]
    pub theta_range: Option<(f64, f64)>,
}

impl SamplingPredicate {
    pub fn accepts(&self, p: &Pose) -> bool {
        if !self.halfplanes.iter().all(|h| h.holds(p.x, p.y)) {
            return false;
        }
        match self.theta_range {
            None => true,
            Some((lo, hi)) => {
                let (lo, hi, t) = (normalize_angle(lo), normalize_angle(hi), normalize_angle(p.theta));
                if lo <= hi {
                    (lo..=hi).contains(&t)
                } else {
                    t >= lo || t <= hi
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectedState {
    pub pose: Pose,
    pub id: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub states: Vec<ConnectedState>,
    /// Set when fewer members passed the predicate than were asked for.
    pub truncated: bool,
}

/// Uniform draw without replacement among members accepted by `predicate`.
pub fn sample_connected_states(
    s: &SafeReachableSet,
    predicate: &SamplingPredicate,
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    let pool: Vec<Pose> = s.member_poses.iter().copied().filter(|p| predicate.accepts(p)).collect();
    if pool.is_empty() {
        return Err(Error::EmptySampleSpace);
    }
    let amount = count.min(pool.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, pool.len(), amount);
    let states = picks.iter().enumerate().map(|(id, i)| ConnectedState { pose: pool[i], id }).collect();
    Ok(SampleBatch { states, truncated: amount < count })
}

/// Second solve for spots that need a staged approach: the target is the
/// stage-one set restricted to `interior`, and the result replaces the tube.
pub fn second_stage(
    first: &SafeReachableSet,
    interior: &GoalSet,
    params: &DubinsParams,
    opts: &SolverOptions,
) -> Result<BrtResult> {
    let base = goal_level_set(&first.grid, interior)?;
    let floor = first.grid.spacing(0).min(first.grid.spacing(1));
    let values = base
        .values
        .iter()
        .zip(&first.member)
        .map(|(&v, &m)| if m { v } else { v.max(floor) })
        .collect();
    solve_brt_from(ValueField::new(first.grid.clone(), values)?, params, opts)
}
