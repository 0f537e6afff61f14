//! Hybrid A* baseline: one search from the start with reversing primitives,
//! penalized costs and a max(Reeds-Shepp, holonomic) heuristic.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::{advance, Direction, Pose, Vec2};
use crate::path::{Piece, PlannedPath, Provenance};
use crate::reeds_shepp::{rs_expansion, rs_shortest};
use crate::search::{
    DirectionsAllowed, Failure, FailureReason, Frontier, LatticeResolution, Motion, MotionPrimitiveSet, SearchNode,
    SearchOutcome, SearchStats,
};
use crate::world::World;

/// Obstacle-aware 8-connected distance to the goal over a 2D occupancy grid
/// whose obstacles are inflated by half the vehicle width.
#[derive(Clone, Debug, PartialEq)]
pub struct HolonomicCostMap {
    pub origin: Vec2,
    pub resolution: f64,
    pub nx: usize,
    pub ny: usize,
    pub cost: Vec<f64>,
}

impl HolonomicCostMap {
    pub fn cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let i = ((x - self.origin.x) / self.resolution).round();
        let j = ((y - self.origin.y) / self.resolution).round();
        if i < 0.0 || j < 0.0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        Some((i as usize, j as usize))
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.origin.x + i as f64 * self.resolution, self.origin.y + j as f64 * self.resolution)
    }

    /// Cost at the nearest cell; infinite off the map or on blocked cells.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        match self.cell(x, y) {
            Some((i, j)) => self.cost[i * self.ny + j],
            None => f64::INFINITY,
        }
    }
}

#[derive(PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Dist {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// Dijkstra from the goal cell over the world's bounds at `resolution`.
pub fn build_holonomic_map(world: &World, goal: &Pose, resolution: f64) -> Result<HolonomicCostMap> {
    let b = world
        .bounds
        .ok_or_else(|| Error::Validation("holonomic map needs world bounds".into()))?;
    let nx = ((b.x.1 - b.x.0) / resolution).round() as usize + 1;
    let ny = ((b.y.1 - b.y.0) / resolution).round() as usize + 1;
    let mut map = HolonomicCostMap { origin: Vec2::new(b.x.0, b.y.0), resolution, nx, ny, cost: vec![f64::INFINITY; nx * ny] };
    let inflate = world.geometry.width / 2.0;
    let blocked: Vec<bool> = (0..nx * ny)
        .map(|f| {
            let p = map.cell_center(f / ny, f % ny);
            world.obstacles.iter().any(|o| o.point_distance(p) <= inflate)
        })
        .collect();
    let (gi, gj) = map.cell(goal.x, goal.y).ok_or(Error::GoalBlocked)?;
    if blocked[gi * ny + gj] {
        return Err(Error::GoalBlocked);
    }
    let mut heap = BinaryHeap::new();
    map.cost[gi * ny + gj] = 0.0;
    heap.push(Reverse((Dist(0.0), gi, gj)));
    while let Some(Reverse((Dist(d), i, j))) = heap.pop() {
        if d > map.cost[i * ny + j] {
            continue;
        }
        for (di, dj) in [(-1i64, -1i64), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)] {
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if ni < 0 || nj < 0 || ni as usize >= nx || nj as usize >= ny {
                continue;
            }
            let f = ni as usize * ny + nj as usize;
            if blocked[f] {
                continue;
            }
            let nd = d + resolution * if di != 0 && dj != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
            if nd < map.cost[f] {
                map.cost[f] = nd;
                heap.push(Reverse((Dist(nd), ni as usize, nj as usize)));
            }
        }
    }
    Ok(map)
}

/// Cost of one motion given the motion that arrived at its start.
pub trait CostModel {
    fn motion_cost(&self, previous: Option<&Motion>, motion: &Motion) -> f64;
}

/// Length scaled by reversing and steering penalties, plus fixed charges
/// for each direction switch and steering change.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Penalties {
    pub switch_back: f64,
    pub back: f64,
    pub steer_change: f64,
    pub steer: f64,
}

impl Default for Penalties {
    fn default() -> Self {
        Penalties { switch_back: 5.0, back: 5.0, steer_change: 5.0, steer: 5.0 }
    }
}

impl Penalties {
    pub fn none() -> Self {
        Penalties { switch_back: 0.0, back: 0.0, steer_change: 0.0, steer: 0.0 }
    }
}

impl CostModel for Penalties {
    fn motion_cost(&self, previous: Option<&Motion>, m: &Motion) -> f64 {
        let back = if m.direction == Direction::Backward { self.back } else { 0.0 };
        let mut c = m.length * (1.0 + back + self.steer * m.steer.abs());
        if let Some(p) = previous {
            if p.direction != m.direction {
                c += self.switch_back;
            }
            c += self.steer_change * (m.steer - p.steer).abs();
        }
        c
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HastarOptions {
    pub resolution: LatticeResolution,
    pub arc_factor: f64,
    pub steer_count: usize,
    pub node_budget: usize,
    pub penalties: Penalties,
}

impl Default for HastarOptions {
    fn default() -> Self {
        HastarOptions {
            resolution: LatticeResolution::new(0.5, 5.0),
            arc_factor: 1.2,
            steer_count: 5,
            node_budget: 5000,
            penalties: Penalties::default(),
        }
    }
}

/// Heuristic: the larger of the obstacle-free Reeds-Shepp length and the
/// holonomic map value, falling back to the former off the map.
pub fn hybrid_heuristic(p: &Pose, goal: &Pose, radius: f64, map: &HolonomicCostMap) -> f64 {
    let rs = rs_shortest(*p, *goal, radius).total_length;
    let h = map.value(p.x, p.y);
    if h.is_finite() {
        rs.max(h)
    } else {
        rs
    }
}

pub fn hastar_plan(
    start: Pose,
    goal: Pose,
    world: &World,
    map: &HolonomicCostMap,
    opts: &HastarOptions,
) -> std::result::Result<SearchOutcome, Failure> {
    let radius = world.geometry.min_turn_radius();
    let prims = MotionPrimitiveSet::new(&world.geometry, opts.steer_count, opts.resolution, opts.arc_factor, DirectionsAllowed::Both);
    let mut frontier = Frontier::new(opts.resolution);
    frontier.insert(SearchNode { pose: start, g: 0.0, h: hybrid_heuristic(&start, &goal, radius, map), parent: None, arrival: None });
    let mut stats = SearchStats::default();
    loop {
        let Some(idx) = frontier.pop() else {
            stats.forward_closed = frontier.closed_len();
            return Err(Failure { reason: FailureReason::Exhausted, stats });
        };
        stats.rs_attempts += 1;
        let pose = frontier.nodes[idx].pose;
        if let Some(rs) = rs_expansion(pose, goal, radius, world) {
            stats.forward_closed = frontier.closed_len();
            let mut pieces: Vec<(Piece, Provenance)> = frontier
                .backtrack(idx)
                .into_iter()
                .map(|(from, m)| {
                    (Piece { start: from, curvature: m.curvature, direction: m.direction, length: m.length }, Provenance::ForwardExpansion)
                })
                .collect();
            pieces.extend(rs.pieces(pose).into_iter().map(|p| (p, Provenance::ForwardRs)));
            return Ok(SearchOutcome { path: PlannedPath::from_pieces(start, pieces, world.step), stats });
        }
        if frontier.closed_len() >= opts.node_budget {
            stats.forward_closed = frontier.closed_len();
            return Err(Failure { reason: FailureReason::NodeBudget, stats });
        }
        stats.forward_expansions += 1;
        let node = frontier.nodes[idx].clone();
        for direction in [Direction::Forward, Direction::Backward] {
            for (i, (&k, &d)) in prims.curvatures.iter().zip(&prims.steer_angles).enumerate() {
                let m = Motion { curvature: k, steer: d, direction, length: prims.arc_length, steer_index: i };
                if !world.motion_is_free(node.pose, k, direction, m.length) {
                    continue;
                }
                let next = advance(node.pose, k, direction, m.length);
                let g = node.g + opts.penalties.motion_cost(node.arrival.as_ref(), &m);
                let h = hybrid_heuristic(&next, &goal, radius, map);
                frontier.insert(SearchNode { pose: next, g, h, parent: Some(idx), arrival: Some(m) });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexPolytope, VehicleGeometry};
    use crate::world::Bounds;
    use std::f64::consts::FRAC_PI_2;

    fn bounded(obstacles: Vec<ConvexPolytope>) -> World {
        World::new(VehicleGeometry::default(), obstacles, 0.0).with_bounds(Bounds { x: (-15.0, 15.0), y: (-5.0, 15.0) })
    }

    fn octile(a: Vec2, b: Vec2) -> f64 {
        let (dx, dy) = ((a.x - b.x).abs(), (a.y - b.y).abs());
        dx.max(dy) + (2f64.sqrt() - 1.0) * dx.min(dy)
    }

    #[test]
    fn empty_map_is_octile() {
        let goal = Pose::new(1.0, 2.0, 0.0);
        let map = build_holonomic_map(&bounded(vec![]), &goal, 0.5).unwrap();
        let g = map.cell_center(map.cell(1.0, 2.0).unwrap().0, map.cell(1.0, 2.0).unwrap().1);
        for i in (0..map.nx).step_by(7) {
            for j in (0..map.ny).step_by(5) {
                let c = map.cell_center(i, j);
                assert!((map.cost[i * map.ny + j] - octile(c, g)).abs() < 1e-9);
            }
        }
        assert_eq!(map.value(1.0, 2.0), 0.0);
    }

    #[test]
    fn walled_goal_is_isolated_and_blocked_goal_errors() {
        let goal = Pose::new(0.0, 5.0, 0.0);
        let ring = vec![
            ConvexPolytope::rectangle(-4.0, 8.0, 4.0, 9.0).unwrap(),
            ConvexPolytope::rectangle(-4.0, 1.0, 4.0, 2.0).unwrap(),
            ConvexPolytope::rectangle(-4.0, 1.0, -3.0, 9.0).unwrap(),
            ConvexPolytope::rectangle(3.0, 1.0, 4.0, 9.0).unwrap(),
        ];
        let map = build_holonomic_map(&bounded(ring), &goal, 0.5).unwrap();
        assert!(map.value(10.0, 10.0).is_infinite());
        assert!(map.value(-10.0, 0.0).is_infinite());
        assert!(map.value(0.5, 5.0).is_finite());
        let block = vec![ConvexPolytope::rectangle(-1.0, 4.0, 1.0, 6.0).unwrap()];
        assert!(matches!(build_holonomic_map(&bounded(block), &goal, 0.5), Err(Error::GoalBlocked)));
    }

    #[test]
    fn l_wall_detour_matches_hand_trace() {
        // Wall |x| <= 0.5, y in [-5, 10]; inflation 1.0 blocks cells with
        // |x| <= 1.5 below y = 10, and the bounds close the way underneath.
        // Cheapest 8-connected route from (3, 0): straight up to (3, 9), five
        // diagonals to (0.5, 11.5), two straight steps across, then the mirror.
        let wall = vec![ConvexPolytope::rectangle(-0.5, -5.0, 0.5, 10.0).unwrap()];
        let goal = Pose::new(-3.0, 0.0, 0.0);
        let map = build_holonomic_map(&bounded(wall), &goal, 0.5).unwrap();
        let traced = 2.0 * (9.0 + 2.5 * 2f64.sqrt()) + 1.0;
        assert!((map.value(3.0, 0.0) - traced).abs() < 1e-9);
        assert!(map.value(0.0, 5.0).is_infinite());
    }

    #[test]
    fn penalties_reduce_to_arc_length() {
        let m = Motion { curvature: 0.1, steer: 0.3, direction: Direction::Backward, length: 0.8, steer_index: 3 };
        let prev = Motion { direction: Direction::Forward, steer: -0.6, ..m };
        assert_eq!(Penalties::none().motion_cost(Some(&prev), &m), 0.8);
        let full = Penalties::default().motion_cost(Some(&prev), &m);
        assert!((full - (0.8 * (1.0 + 5.0 + 5.0 * 0.3) + 5.0 + 5.0 * 0.9)).abs() < 1e-12);
    }

    #[test]
    fn open_space_is_one_node() {
        let w = bounded(vec![]);
        let (start, goal) = (Pose::new(-10.0, 8.0, 0.3), Pose::new(0.0, 1.3, FRAC_PI_2));
        let map = build_holonomic_map(&w, &goal, 0.5).unwrap();
        let out = hastar_plan(start, goal, &w, &map, &HastarOptions::default()).unwrap();
        assert_eq!(out.stats.node_count(), 1);
        assert_eq!(out.stats.expansions(), 0);
        let rs = rs_shortest(start, goal, w.geometry.min_turn_radius()).total_length;
        assert!((out.path.total_length - rs).abs() < 1e-6);
    }

    #[test]
    fn detours_around_a_blocking_wall() {
        let w = bounded(vec![ConvexPolytope::rectangle(-2.0, 2.5, 2.0, 3.5).unwrap()]);
        let (start, goal) = (Pose::new(0.0, 8.0, -FRAC_PI_2), Pose::new(0.0, 0.0, -FRAC_PI_2));
        assert!(w.pose_is_free(&start) && w.pose_is_free(&goal));
        let map = build_holonomic_map(&w, &goal, 0.5).unwrap();
        let out = hastar_plan(start, goal, &w, &map, &HastarOptions::default()).unwrap();
        assert!(out.stats.expansions() > 0);
        let r = w.geometry.min_turn_radius();
        assert!(out.path.total_length >= rs_shortest(start, goal, r).total_length - 1e-9);
        for (p, _) in out.path.resample(0.05) {
            assert!(w.pose_is_free(&p));
        }
    }
}
