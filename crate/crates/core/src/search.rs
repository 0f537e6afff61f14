//! Bidirectional lattice A* between a start, a connected state and the goal,
//! with analytic Reeds-Shepp completion on every pop.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::geometry::{advance, normalize_angle, Direction, Pose, VehicleGeometry};
use crate::path::{Piece, PlannedPath, Provenance};
use crate::reeds_shepp::{rs_expansion, rs_shortest, RsPath};
use crate::safe_set::ConnectedState;
use crate::world::World;

/// Octile distance on the position difference; heading is ignored.
pub fn heuristic(from: &Pose, to: &Pose) -> f64 {
    let dx = (to.x - from.x).abs();
    let dy = (to.y - from.y).abs();
    dx.max(dy) + (std::f64::consts::SQRT_2 - 1.0) * dx.min(dy)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeResolution {
    pub xy: f64,
    pub yaw: f64,
}

impl LatticeResolution {
    pub fn new(xy: f64, yaw_degrees: f64) -> Self {
        LatticeResolution { xy, yaw: yaw_degrees.to_radians() }
    }

    pub fn cell(&self, p: &Pose) -> CellKey {
        let t = normalize_angle(p.theta) + std::f64::consts::PI;
        CellKey(
            (p.x / self.xy).floor() as i64,
            (p.y / self.xy).floor() as i64,
            (t / self.yaw).floor() as i64,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CellKey(pub i64, pub i64, pub i64);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectionsAllowed {
    ForwardOnly,
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MotionPrimitiveSet {
    pub steer_angles: Vec<f64>,
    pub curvatures: Vec<f64>,
    pub arc_length: f64,
    pub directions_allowed: DirectionsAllowed,
}

impl MotionPrimitiveSet {
    /// `steer_count` evenly spaced angles over `[-max_steer, max_steer]` and
    /// arcs `arc_factor` times the lattice cell diagonal.
    pub fn new(
        geom: &VehicleGeometry,
        steer_count: usize,
        lattice: LatticeResolution,
        arc_factor: f64,
        directions_allowed: DirectionsAllowed,
    ) -> Self {
        let steer_count = steer_count.max(3) | 1;
        let half = (steer_count / 2) as f64;
        let steer_angles: Vec<f64> = (0..steer_count)
            .map(|i| geom.max_steer * (i as f64 - half) / half)
            .collect();
        let curvatures = steer_angles.iter().map(|&d| geom.curvature(d)).collect();
        MotionPrimitiveSet {
            steer_angles,
            curvatures,
            arc_length: arc_factor * lattice.xy * std::f64::consts::SQRT_2,
            directions_allowed,
        }
    }
}

/// Edge from a parent node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Motion {
    pub curvature: f64,
    pub steer: f64,
    pub direction: Direction,
    pub length: f64,
    pub steer_index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchNode {
    pub pose: Pose,
    pub g: f64,
    pub h: f64,
    pub parent: Option<usize>,
    pub arrival: Option<Motion>,
}

impl SearchNode {
    pub fn cost(&self) -> f64 {
        self.g + self.h
    }
    pub fn arrival_direction(&self) -> Option<Direction> {
        self.arrival.map(|m| m.direction)
    }
    pub fn arrival_primitive(&self) -> Option<usize> {
        self.arrival.map(|m| m.steer_index)
    }
}

#[derive(Debug, PartialEq)]
struct OpenEntry {
    c: f64,
    h: f64,
    seq: u64,
    node: usize,
}

impl Eq for OpenEntry {}

impl Ord for OpenEntry {
    // Reversed so the std max-heap pops the smallest c, then h, then seq.
    fn cmp(&self, o: &Self) -> Ordering {
        o.c.total_cmp(&self.c)
            .then_with(|| o.h.total_cmp(&self.h))
            .then_with(|| o.seq.cmp(&self.seq))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertOutcome {
    Inserted,
    Replaced,
    Rejected,
    Closed,
}

/// Open and closed lists over a discretized lattice. Nodes live in an arena
/// and are referred to by index.
#[derive(Debug)]
pub struct Frontier {
    pub resolution: LatticeResolution,
    pub nodes: Vec<SearchNode>,
    heap: BinaryHeap<OpenEntry>,
    open: HashMap<CellKey, usize>,
    closed: HashMap<CellKey, usize>,
    seq: u64,
}

impl Frontier {
    pub fn new(resolution: LatticeResolution) -> Self {
        Frontier {
            resolution,
            nodes: Vec::new(),
            heap: BinaryHeap::new(),
            open: HashMap::new(),
            closed: HashMap::new(),
            seq: 0,
        }
    }

    pub fn closed_len(&self) -> usize {
        self.closed.len()
    }

    pub fn open_len(&self) -> usize {
        self.open.len()
    }

    pub fn is_closed(&self, p: &Pose) -> bool {
        self.closed.contains_key(&self.resolution.cell(p))
    }

    pub fn open_node(&self, p: &Pose) -> Option<&SearchNode> {
        self.open.get(&self.resolution.cell(p)).map(|&i| &self.nodes[i])
    }

    /// Inserts unless the cell is closed or already holds a cheaper node.
    pub fn insert(&mut self, node: SearchNode) -> InsertOutcome {
        let key = self.resolution.cell(&node.pose);
        if self.closed.contains_key(&key) {
            return InsertOutcome::Closed;
        }
        let outcome = match self.open.get(&key) {
            Some(&i) if self.nodes[i].cost() <= node.cost() => return InsertOutcome::Rejected,
            Some(_) => InsertOutcome::Replaced,
            None => InsertOutcome::Inserted,
        };
        let idx = self.nodes.len();
        self.heap.push(OpenEntry { c: node.cost(), h: node.h, seq: self.seq, node: idx });
        self.seq += 1;
        self.nodes.push(node);
        self.open.insert(key, idx);
        outcome
    }

    /// Moves the cheapest open node to the closed list.
    pub fn pop(&mut self) -> Option<usize> {
        while let Some(e) = self.heap.pop() {
            let key = self.resolution.cell(&self.nodes[e.node].pose);
            if self.open.get(&key) == Some(&e.node) {
                self.open.remove(&key);
                self.closed.insert(key, e.node);
                return Some(e.node);
            }
        }
        None
    }

    /// Motions from the root to `idx`, in driving order.
    pub fn backtrack(&self, idx: usize) -> Vec<(Pose, Motion)> {
        let mut out = Vec::new();
        let mut cur = idx;
        while let (Some(parent), Some(m)) = (self.nodes[cur].parent, self.nodes[cur].arrival) {
            out.push((self.nodes[parent].pose, m));
            cur = parent;
        }
        out.reverse();
        out
    }
}

fn successor(
    frontier: &mut Frontier,
    parent: usize,
    target: &Pose,
    motion: Motion,
    world: &World,
) -> bool {
    let from = frontier.nodes[parent].pose;
    if !world.motion_is_free(from, motion.curvature, motion.direction, motion.length) {
        return false;
    }
    let pose = advance(from, motion.curvature, motion.direction, motion.length);
    let node = SearchNode {
        pose,
        g: frontier.nodes[parent].g + motion.length,
        h: heuristic(&pose, target),
        parent: Some(parent),
        arrival: Some(motion),
    };
    frontier.insert(node);
    true
}

/// Forward-only successors toward the connected state; if every one of them
/// collides, the two full-lock reversing arcs are tried instead. Returns the
/// number of collision-free successors.
pub fn expand_forward(
    node: usize,
    target: &ConnectedState,
    prims: &MotionPrimitiveSet,
    frontier: &mut Frontier,
    world: &World,
) -> usize {
    let mut free = 0;
    for (i, (&k, &d)) in prims.curvatures.iter().zip(&prims.steer_angles).enumerate() {
        let m = Motion { curvature: k, steer: d, direction: Direction::Forward, length: prims.arc_length, steer_index: i };
        free += successor(frontier, node, &target.pose, m, world) as usize;
    }
    if free == 0 {
        let last = prims.curvatures.len() - 1;
        for i in [0, last] {
            let m = Motion {
                curvature: prims.curvatures[i],
                steer: prims.steer_angles[i],
                direction: Direction::Backward,
                length: prims.arc_length,
                steer_index: i,
            };
            free += successor(frontier, node, &target.pose, m, world) as usize;
        }
    }
    free
}

/// Successors in both travel directions for every steering angle.
pub fn expand_backward(
    node: usize,
    target: &ConnectedState,
    prims: &MotionPrimitiveSet,
    frontier: &mut Frontier,
    world: &World,
) -> usize {
    let mut free = 0;
    for direction in [Direction::Forward, Direction::Backward] {
        if direction == Direction::Backward && prims.directions_allowed == DirectionsAllowed::ForwardOnly {
            continue;
        }
        for (i, (&k, &d)) in prims.curvatures.iter().zip(&prims.steer_angles).enumerate() {
            let m = Motion { curvature: k, steer: d, direction, length: prims.arc_length, steer_index: i };
            free += successor(frontier, node, &target.pose, m, world) as usize;
        }
    }
    free
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    ShortestLength,
    FirstFinished,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub forward_resolution: LatticeResolution,
    pub backward_resolution: LatticeResolution,
    pub arc_factor: f64,
    pub steer_count: usize,
    pub node_budget: usize,
    pub threads: usize,
    pub criterion: Criterion,
    /// Skip candidates whose obstacle-free lower bound already exceeds the
    /// best length found. Only used with `ShortestLength`; never changes the
    /// selected path.
    pub prune: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            forward_resolution: LatticeResolution::new(0.5, 5.0),
            backward_resolution: LatticeResolution::new(0.3, 5.0),
            arc_factor: 1.2,
            steer_count: 5,
            node_budget: 5000,
            threads: 12,
            criterion: Criterion::ShortestLength,
            prune: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub forward_closed: usize,
    pub backward_closed: usize,
    pub forward_expansions: usize,
    pub backward_expansions: usize,
    pub rs_attempts: usize,
}

impl SearchStats {
    /// Closed nodes on both sides.
    pub fn node_count(&self) -> usize {
        self.forward_closed + self.backward_closed
    }
    pub fn expansions(&self) -> usize {
        self.forward_expansions + self.backward_expansions
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureReason {
    NodeBudget,
    Exhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Failure {
    pub reason: FailureReason,
    pub stats: SearchStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub path: PlannedPath,
    pub stats: SearchStats,
}

struct Side {
    frontier: Frontier,
    prims: MotionPrimitiveSet,
    found: Option<(usize, RsPath)>,
    expansions: usize,
}

impl Side {
    fn new(root: Pose, target: &Pose, resolution: LatticeResolution, prims: MotionPrimitiveSet) -> Self {
        let mut frontier = Frontier::new(resolution);
        frontier.insert(SearchNode { pose: root, g: 0.0, h: heuristic(&root, target), parent: None, arrival: None });
        Side { frontier, prims, found: None, expansions: 0 }
    }

    /// One iteration: pop, try the analytic connection, otherwise expand.
    fn step(
        &mut self,
        connected: &ConnectedState,
        world: &World,
        budget: usize,
        rs_attempts: &mut usize,
        expand: fn(usize, &ConnectedState, &MotionPrimitiveSet, &mut Frontier, &World) -> usize,
    ) -> std::result::Result<(), FailureReason> {
        let Some(idx) = self.frontier.pop() else {
            return Err(FailureReason::Exhausted);
        };
        *rs_attempts += 1;
        let pose = self.frontier.nodes[idx].pose;
        if let Some(rs) = rs_expansion(pose, connected.pose, world.geometry.min_turn_radius(), world) {
            self.found = Some((idx, rs));
            return Ok(());
        }
        if self.frontier.closed_len() >= budget {
            return Err(FailureReason::NodeBudget);
        }
        expand(idx, connected, &self.prims, &mut self.frontier, world);
        self.expansions += 1;
        Ok(())
    }
}

/// Searches forward from `start` and backward from `goal` until both sides
/// connect analytically to `connected`, then joins the halves there.
pub fn bidirectional_search(
    start: Pose,
    goal: Pose,
    connected: &ConnectedState,
    world: &World,
    opts: &SearchOptions,
) -> std::result::Result<SearchOutcome, Failure> {
    let g = &world.geometry;
    let fwd_prims = MotionPrimitiveSet::new(g, opts.steer_count, opts.forward_resolution, opts.arc_factor, DirectionsAllowed::ForwardOnly);
    let bwd_prims = MotionPrimitiveSet::new(g, opts.steer_count, opts.backward_resolution, opts.arc_factor, DirectionsAllowed::Both);
    let mut fwd = Side::new(start, &connected.pose, opts.forward_resolution, fwd_prims);
    let mut bwd = Side::new(goal, &connected.pose, opts.backward_resolution, bwd_prims);
    let mut rs_attempts = 0;

    let stats = |f: &Side, b: &Side, rs: usize| SearchStats {
        forward_closed: f.frontier.closed_len(),
        backward_closed: b.frontier.closed_len(),
        forward_expansions: f.expansions,
        backward_expansions: b.expansions,
        rs_attempts: rs,
    };

    while fwd.found.is_none() || bwd.found.is_none() {
        if fwd.found.is_none() {
            if let Err(reason) = fwd.step(connected, world, opts.node_budget, &mut rs_attempts, expand_forward) {
                return Err(Failure { reason, stats: stats(&fwd, &bwd, rs_attempts) });
            }
        }
        if bwd.found.is_none() {
            if let Err(reason) = bwd.step(connected, world, opts.node_budget, &mut rs_attempts, expand_backward) {
                return Err(Failure { reason, stats: stats(&fwd, &bwd, rs_attempts) });
            }
        }
    }

    let (f_idx, f_rs) = fwd.found.take().unwrap();
    let (b_idx, b_rs) = bwd.found.take().unwrap();
    let mut pieces = Vec::new();
    for (from, m) in fwd.frontier.backtrack(f_idx) {
        let piece = Piece { start: from, curvature: m.curvature, direction: m.direction, length: m.length };
        pieces.push((piece, Provenance::ForwardExpansion));
    }
    let f_end = fwd.frontier.nodes[f_idx].pose;
    pieces.extend(f_rs.pieces(f_end).into_iter().map(|p| (p, Provenance::ForwardRs)));
    pieces.extend(b_rs.reversed().pieces(connected.pose).into_iter().map(|p| (p, Provenance::BackwardRs)));
    for (from, m) in bwd.frontier.backtrack(b_idx).into_iter().rev() {
        let piece = Piece { start: from, curvature: m.curvature, direction: m.direction, length: m.length };
        pieces.push((piece.reversed(), Provenance::BackwardExpansion));
    }
    let path = PlannedPath::from_pieces(start, pieces, world.step);
    Ok(SearchOutcome { path, stats: stats(&fwd, &bwd, rs_attempts) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CandidateOutcome {
    /// Path length of a successful search.
    Success(f64),
    Failed(FailureReason),
    /// Not searched: the obstacle-free bound was already longer than the best path.
    Pruned { bound: f64 },
}

impl CandidateOutcome {
    pub fn length(&self) -> Option<f64> {
        match *self {
            CandidateOutcome::Success(len) => Some(len),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateReport {
    pub id: usize,
    pub outcome: CandidateOutcome,
    pub stats: SearchStats,
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanResult {
    pub path: PlannedPath,
    /// Id of the connected state the selected path passes through.
    pub selected: usize,
    pub stats: SearchStats,
    pub report: Vec<CandidateReport>,
}

/// Length no path from `start` through `via` to `goal` can beat.
pub fn candidate_bound(start: Pose, via: Pose, goal: Pose, turn_radius: f64) -> f64 {
    rs_shortest(start, via, turn_radius).total_length + rs_shortest(via, goal, turn_radius).total_length
}

// Slack on the bound so rounding in the RS solver never prunes a winner.
const PRUNE_SLACK: f64 = 1e-9;

type Slot = (std::result::Result<SearchOutcome, Failure>, Duration, Instant);

/// Runs one bidirectional search per connected state on a pool of
/// `opts.threads` workers and picks a result by `opts.criterion`.
///
/// With pruning, candidates are visited in order of their lower bound and a
/// candidate is skipped once that bound is strictly longer than the best path
/// so far. Such a candidate can never win, so the selection matches the
/// exhaustive one for any thread count.
pub fn plan(
    start: Pose,
    goal: Pose,
    batch: &[ConnectedState],
    world: &World,
    opts: &SearchOptions,
) -> Result<PlanResult> {
    if batch.is_empty() {
        return Err(Error::Validation("connected-state batch is empty".into()));
    }
    if !world.pose_is_free(&start) {
        return Err(Error::Validation(format!("start pose ({:.3}, {:.3}, {:.3}) collides", start.x, start.y, start.theta)));
    }
    if !world.pose_is_free(&goal) {
        return Err(Error::Validation("goal pose collides".into()));
    }
    let prune = opts.prune && opts.criterion == Criterion::ShortestLength;
    let radius = world.geometry.min_turn_radius();
    let bounds: Vec<f64> = if prune {
        batch.iter().map(|c| candidate_bound(start, c.pose, goal, radius)).collect()
    } else {
        vec![0.0; batch.len()]
    };
    let mut order: Vec<usize> = (0..batch.len()).collect();
    if prune {
        order.sort_by(|&a, &b| bounds[a].total_cmp(&bounds[b]).then(a.cmp(&b)));
    }

    let slots: Vec<Mutex<Option<Slot>>> = batch.iter().map(|_| Mutex::new(None)).collect();
    let best_len = Mutex::new(f64::INFINITY);
    let next = AtomicUsize::new(0);
    let work = || loop {
        let k = next.fetch_add(1, AtomicOrdering::Relaxed);
        let Some(&i) = order.get(k) else { break };
        if prune && bounds[i] - PRUNE_SLACK > *best_len.lock().unwrap() {
            continue;
        }
        let t0 = Instant::now();
        let r = bidirectional_search(start, goal, &batch[i], world, opts);
        if let Ok(o) = &r {
            let mut b = best_len.lock().unwrap();
            *b = b.min(o.path.total_length);
        }
        *slots[i].lock().unwrap() = Some((r, t0.elapsed(), Instant::now()));
    };
    let threads = opts.threads.clamp(1, batch.len());
    if threads == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(work);
            }
        });
    }

    let results: Vec<Option<Slot>> = slots.into_iter().map(|m| m.into_inner().unwrap()).collect();
    let report = batch
        .iter()
        .zip(&results)
        .zip(&bounds)
        .map(|((c, r), &bound)| match r {
            Some((Ok(o), wall, _)) => CandidateReport {
                id: c.id,
                outcome: CandidateOutcome::Success(o.path.total_length),
                stats: o.stats,
                wall_time: *wall,
            },
            Some((Err(f), wall, _)) => {
                CandidateReport { id: c.id, outcome: CandidateOutcome::Failed(f.reason), stats: f.stats, wall_time: *wall }
            }
            None => CandidateReport {
                id: c.id,
                outcome: CandidateOutcome::Pruned { bound },
                stats: SearchStats::default(),
                wall_time: Duration::ZERO,
            },
        })
        .collect();

    let mut best: Option<(usize, f64, Instant)> = None;
    for (i, slot) in results.iter().enumerate() {
        if let Some((Ok(o), _, done)) = slot {
            let better = match (best, opts.criterion) {
                (None, _) => true,
                (Some((_, len, _)), Criterion::ShortestLength) => o.path.total_length < len,
                (Some((_, _, at)), Criterion::FirstFinished) => *done < at,
            };
            if better {
                best = Some((i, o.path.total_length, *done));
            }
        }
    }
    let Some((i, _, _)) = best else {
        return Err(Error::AllCandidatesFailed { candidates: batch.len() });
    };
    let outcome = results.into_iter().nth(i).unwrap().unwrap().0.unwrap();
    Ok(PlanResult { path: outcome.path, selected: batch[i].id, stats: outcome.stats, report })
}
