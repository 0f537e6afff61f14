//! Acceptance suite: one PASS/FAIL line per criterion, then a single
//! assertion over all of them. Lines go straight to stderr so they show up
//! whether or not the harness captures output.

use std::f64::consts::{PI, TAU};
use std::io::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hjbastar::bench::svg::{scene_svg, Scene};
use hjbastar::bench::OfflineCache;
use hjbastar::geometry::{normalize_angle, polytope_distance, vehicle_footprint, ConvexPolytope, Direction, Pose, Vec2};
use hjbastar::grid::Grid3;
use hjbastar::hastar::{build_holonomic_map, hastar_plan, HastarOptions};
use hjbastar::path::{continuity_report, PlannedPath};
use hjbastar::pipeline::{precompute, PrecomputeOptions, Precomputed};
use hjbastar::reach::{goal_value, solve_brt, DubinsParams, GoalSet, SolverOptions};
use hjbastar::reeds_shepp::rs_shortest;
use hjbastar::scenario::{random_request, Scenario};
use hjbastar::search::{plan, SearchOptions};

/// Nodes per axis for the batch criteria.
const BATCH_GRID: usize = 41;
const TRIALS: u64 = 100;

struct Verdict {
    id: usize,
    pass: bool,
    detail: String,
}

fn report(v: &Verdict) {
    let tag = if v.pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "ACC{} {tag} {}", v.id, v.detail);
}

fn setup(id: &str) -> (Scenario, Precomputed) {
    let sc = Scenario::named(id).unwrap().with_grid_resolution(BATCH_GRID).unwrap();
    let pre = precompute(&sc, &PrecomputeOptions::default()).unwrap();
    (sc, pre)
}

fn opts(sc: &Scenario) -> SearchOptions {
    SearchOptions { node_budget: sc.node_budget, ..Default::default() }
}

/// One HJBA* trial: `None` on failure.
struct Run {
    path: Option<PlannedPath>,
    ms: f64,
    nodes: usize,
}

fn batch(sc: &Scenario, pre: &Precomputed, seeds: std::ops::Range<u64>) -> Vec<Run> {
    let world = sc.world();
    seeds
        .map(|seed| {
            let start = random_request(sc, seed).unwrap();
            let t = Instant::now();
            let r = plan(start, sc.goal, &pre.connected, &world, &opts(sc));
            let ms = t.elapsed().as_secs_f64() * 1e3;
            match r {
                Ok(r) => Run { nodes: r.stats.node_count(), path: Some(r.path), ms },
                Err(_) => Run { path: None, ms, nodes: 0 },
            }
        })
        .collect()
}

// ---------------------------------------------------------------- ACC1

fn acc1() -> Verdict {
    let mut sc = Scenario::named("a").unwrap().with_grid_resolution(21).unwrap();
    sc.obstacles.clear();
    let pre = precompute(&sc, &PrecomputeOptions::default()).unwrap();
    // no walls either: the grid extent would otherwise act as one
    let mut world = sc.world();
    world.bounds = None;
    let map = build_holonomic_map(&sc.world(), &sc.goal, 0.5).unwrap();
    let r = sc.vehicle.min_turn_radius();
    let mut worst: f64 = 0.0;
    let mut expansions = 0;
    let mut pure = true;
    let mut elapsed: f64 = 0.0;
    for seed in 0..10 {
        let start = random_request(&sc, seed).unwrap();
        let t = Instant::now();
        let hj = plan(start, sc.goal, &pre.connected, &world, &SearchOptions::default()).unwrap();
        let ha = hastar_plan(start, sc.goal, &world, &map, &HastarOptions::default()).unwrap();
        elapsed = elapsed.max(t.elapsed().as_secs_f64());
        let z = pre.connected.iter().find(|c| c.id == hj.selected).unwrap().pose;
        let expect = rs_shortest(start, z, r).total_length + rs_shortest(z, sc.goal, r).total_length;
        worst = worst.max((hj.path.total_length - expect).abs());
        expansions += hj.stats.expansions() + ha.stats.expansions();
        pure &= hj.path.pieces.iter().chain(&ha.path.pieces).all(|(_, prov)| {
            matches!(prov, hjbastar::path::Provenance::ForwardRs | hjbastar::path::Provenance::BackwardRs)
        });
        let ha_rs = rs_shortest(start, sc.goal, r).total_length;
        worst = worst.max((ha.path.total_length - ha_rs).abs());
    }
    Verdict {
        id: 1,
        pass: worst <= 1e-6 && expansions == 0 && pure && elapsed < 1.0,
        detail: format!("length error {worst:.2e}, expansions {expansions}, pure RS {pure}, slowest request {elapsed:.3} s"),
    }
}

// ---------------------------------------------------------------- ACC2, 3, 4 (failure rate), 5

/// Resampled poses of a path at `step`, with collision check against the
/// scenario obstacles at margin 0.
fn violations(sc: &Scenario, path: &PlannedPath) -> usize {
    path.resample(0.05)
        .iter()
        .filter(|(p, _)| {
            let fp = vehicle_footprint(&sc.vehicle, p);
            sc.obstacles.iter().any(|o| polytope_distance(&fp, o).unwrap() <= 0.0)
        })
        .count()
}

fn flips(path: &PlannedPath) -> usize {
    path.waypoints.windows(2).filter(|w| w[0].direction != w[1].direction).count()
}

struct FreeBatches {
    violations: usize,
    successes: usize,
    continuity_bad: Vec<String>,
    failures: Vec<(String, usize)>,
    cusp_le1: usize,
    cusp_total: usize,
    cusp_hist: [usize; 8],
}

fn free_batches() -> FreeBatches {
    let kmax = 0.6f64.tan() / 2.7 + 1e-3;
    let mut out = FreeBatches {
        violations: 0,
        successes: 0,
        continuity_bad: vec![],
        failures: vec![],
        cusp_le1: 0,
        cusp_total: 0,
        cusp_hist: [0; 8],
    };
    for id in ["a", "d", "g"] {
        let (sc, pre) = setup(id);
        let runs = batch(&sc, &pre, 0..TRIALS);
        let mut failed = 0;
        for run in &runs {
            let Some(p) = &run.path else {
                failed += 1;
                continue;
            };
            out.successes += 1;
            out.violations += violations(&sc, p);
            let c = continuity_report(p);
            if c.max_gap > p.step + 1e-6 || flips(p) != p.cusp_count || c.max_curvature > kmax {
                out.continuity_bad.push(format!(
                    "{id}: gap {:.4} curvature {:.4} flips {} cusps {}",
                    c.max_gap,
                    c.max_curvature,
                    flips(p),
                    p.cusp_count
                ));
            }
            if id == "a" {
                out.cusp_total += 1;
                out.cusp_le1 += (p.cusp_count <= 1) as usize;
                out.cusp_hist[p.cusp_count.min(7)] += 1;
            }
        }
        out.failures.push((id.to_string(), failed));
    }
    out
}

// ---------------------------------------------------------------- ACC4 ordering

/// Fraction of bootstrap resamples in which mean(a) < mean(b).
fn bootstrap_less(a: &[f64], b: &[f64], rounds: usize, seed: u64) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = |v: &[f64]| (0..v.len()).map(|_| v[rng.gen_range(0..v.len())]).sum::<f64>() / v.len() as f64;
    (0..rounds).filter(|_| mean(a) < mean(b)).count() as f64 / rounds as f64
}

fn acc4_ordering() -> (bool, String) {
    let (sc, pre) = setup("h");
    let world = sc.world();
    let map = build_holonomic_map(&world, &sc.goal, 0.5).unwrap();
    let (mut hj_ms, mut hj_n, mut ha_ms, mut ha_n) = (vec![], vec![], vec![], vec![]);
    let (mut hj_fail, mut ha_fail) = (0, 0);
    for run in batch(&sc, &pre, 0..TRIALS) {
        match run.path {
            Some(_) => {
                hj_ms.push(run.ms);
                hj_n.push(run.nodes as f64);
            }
            None => hj_fail += 1,
        }
    }
    for seed in 0..TRIALS {
        let start = random_request(&sc, seed).unwrap();
        let t = Instant::now();
        let r = hastar_plan(start, sc.goal, &world, &map, &HastarOptions { node_budget: sc.node_budget, ..Default::default() });
        let ms = t.elapsed().as_secs_f64() * 1e3;
        match r {
            Ok(o) => {
                ha_ms.push(ms);
                ha_n.push(o.stats.node_count() as f64);
            }
            Err(_) => ha_fail += 1,
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    let conf_t = bootstrap_less(&hj_ms, &ha_ms, 2000, 1);
    let conf_n = bootstrap_less(&hj_n, &ha_n, 2000, 2);
    let pass = conf_t >= 0.95 && conf_n >= 0.95;
    let detail = format!(
        "h: HJBA* {:.1} ms / {:.1} nodes ({hj_fail} failed), HA* {:.1} ms / {:.1} nodes ({ha_fail} failed), bootstrap {:.3} / {:.3}",
        mean(&hj_ms),
        mean(&hj_n),
        mean(&ha_ms),
        mean(&ha_n),
        conf_t,
        conf_n
    );
    (pass, detail)
}

// ---------------------------------------------------------------- ACC6

/// Greedy descent on the interpolated value function: at each step pick the
/// control whose one-step successor has the lowest value.
fn greedy_reaches(field: &hjbastar::grid::ValueField, goal: &GoalSet, p: &DubinsParams, start: Pose, horizon: f64) -> bool {
    let dt = 0.05;
    let mut z = start;
    let steps = (horizon / dt).ceil() as usize;
    for _ in 0..=steps {
        if goal_value(goal, &z) <= 0.0 {
            return true;
        }
        let mut best: Option<(f64, Pose)> = None;
        for v in [p.speed, -p.speed] {
            if v < 0.0 && !p.allow_reverse {
                continue;
            }
            for w in [-p.omega_max, 0.0, p.omega_max] {
                // exact unicycle step
                let th = z.theta + w * dt;
                let (x, y) = if w == 0.0 {
                    (z.x + v * dt * z.theta.cos(), z.y + v * dt * z.theta.sin())
                } else {
                    (z.x + v / w * (th.sin() - z.theta.sin()), z.y - v / w * (th.cos() - z.theta.cos()))
                };
                let next = Pose::new(x, y, th);
                let Ok(val) = field.interpolate(&next) else { continue };
                if best.map_or(true, |(b, _)| val < b) {
                    best = Some((val, next));
                }
            }
        }
        match best {
            Some((_, next)) => z = next,
            None => return false,
        }
    }
    false
}

fn acc6() -> Verdict {
    let t0 = Instant::now();
    let grid = Grid3::cubic((-10.0, 10.0), (-10.0, 10.0), 41).unwrap();
    let goal = GoalSet { center: Pose::new(0.0, 0.0, 0.0), half_widths: [1.0, 1.0, 0.5] };
    let params = DubinsParams::default();
    let opts = SolverOptions { checkpoint_every: Some(5.0), ..Default::default() };
    let brt = solve_brt(&grid, &goal, &params, &opts).unwrap();
    let horizon = brt.horizon * 1.2;
    let (mut checked, mut confirmed) = (0usize, 0usize);
    let (mut interior, mut interior_ok) = (0usize, 0usize);
    for f in 0..grid.len() {
        let z = grid.cell_pose(grid.unflat(f));
        let v = brt.field.values[f];
        if goal_value(&goal, &z) <= 0.0 {
            interior += 1;
            interior_ok += (v <= 0.0) as usize;
        }
        if v <= -0.05 {
            checked += 1;
            confirmed += greedy_reaches(&brt.field, &goal, &params, z, horizon) as usize;
        }
    }
    let mut monotone = true;
    for (i, (_, a)) in brt.checkpoints.iter().enumerate() {
        for (_, b) in &brt.checkpoints[i + 1..] {
            monotone &= b.values.iter().zip(&a.values).all(|(vb, va)| vb <= va);
        }
    }
    let frac = confirmed as f64 / checked.max(1) as f64;
    let secs = t0.elapsed().as_secs_f64();
    Verdict {
        id: 6,
        pass: checked > 0 && frac >= 0.99 && interior_ok == interior && monotone && secs < 600.0,
        detail: format!(
            "greedy oracle {confirmed}/{checked} ({:.2}%), goal interior {interior_ok}/{interior}, monotone over {} checkpoints {monotone}, {secs:.1} s",
            100.0 * frac,
            brt.checkpoints.len()
        ),
    }
}

// ---------------------------------------------------------------- ACC7

/// Endpoint of a constant-control segment of signed length `s` (negative is
/// reverse) and curvature `k`, integrated in closed form.
fn drive(z: Pose, k: f64, s: f64) -> Pose {
    if k == 0.0 {
        Pose::new(z.x + s * z.theta.cos(), z.y + s * z.theta.sin(), z.theta)
    } else {
        let th = z.theta + k * s;
        Pose::new(z.x + (th.sin() - z.theta.sin()) / k, z.y - (th.cos() - z.theta.cos()) / k, th)
    }
}

fn m2pi(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

/// The six forward Dubins words for a unit turning radius, each as
/// `(curvature signs, normalized lengths)`.
fn dubins_words(x: f64, y: f64, phi: f64) -> Vec<([f64; 3], [f64; 3])> {
    let d = x.hypot(y);
    let th = m2pi(y.atan2(x));
    let a = m2pi(-th);
    let b = m2pi(phi - th);
    let (sa, ca, sb, cb) = (a.sin(), a.cos(), b.sin(), b.cos());
    let cab = (a - b).cos();
    let mut out = Vec::new();
    let p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb);
    if p2 >= 0.0 {
        let tmp = (cb - ca).atan2(d + sa - sb);
        out.push(([1.0, 0.0, 1.0], [m2pi(-a + tmp), p2.sqrt(), m2pi(b - tmp)]));
    }
    let p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa);
    if p2 >= 0.0 {
        let tmp = (ca - cb).atan2(d - sa + sb);
        out.push(([-1.0, 0.0, -1.0], [m2pi(a - tmp), p2.sqrt(), m2pi(-b + tmp)]));
    }
    let p2 = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb);
    if p2 >= 0.0 {
        let p = p2.sqrt();
        let tmp = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
        out.push(([1.0, 0.0, -1.0], [m2pi(-a + tmp), p, m2pi(-m2pi(b) + tmp)]));
    }
    let p2 = -2.0 + d * d + 2.0 * cab - 2.0 * d * (sa + sb);
    if p2 >= 0.0 {
        let p = p2.sqrt();
        let tmp = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
        out.push(([-1.0, 0.0, 1.0], [m2pi(a - tmp), p, m2pi(b - tmp)]));
    }
    let tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0;
    if tmp.abs() <= 1.0 {
        let p = m2pi(TAU - tmp.acos());
        let t = m2pi(a - (ca - cb).atan2(d - sa + sb) + p / 2.0);
        out.push(([-1.0, 1.0, -1.0], [t, p, m2pi(a - b - t + p)]));
    }
    let tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0;
    if tmp.abs() <= 1.0 {
        let p = m2pi(TAU - tmp.acos());
        let t = m2pi(-a - (ca - cb).atan2(d + sa - sb) + p / 2.0);
        out.push(([1.0, -1.0, 1.0], [t, p, m2pi(m2pi(b) - a - t + p)]));
    }
    out
}

fn close(a: &Pose, b: &Pose) -> bool {
    a.distance(b) < 1e-6 && normalize_angle(a.theta - b.theta).abs() < 1e-6
}

/// Shortest verified single-direction Dubins path from `a` to `b`, driving
/// forward (`sign = 1`) or in reverse (`sign = -1`).
fn dubins(a: Pose, b: Pose, r: f64, sign: f64) -> f64 {
    // a reverse path from a to b is a forward path from b to a, driven backwards
    let (from, to) = if sign > 0.0 { (a, b) } else { (b, a) };
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    let (s, c) = from.theta.sin_cos();
    let (x, y) = ((c * dx + s * dy) / r, (-s * dx + c * dy) / r);
    let mut best = f64::INFINITY;
    for (ks, ls) in dubins_words(x, y, to.theta - from.theta) {
        let mut z = from;
        for (k, l) in ks.iter().zip(ls) {
            z = drive(z, k / r, l * r);
        }
        let len = ls.iter().sum::<f64>() * r;
        if close(&z, &to) && len < best {
            best = len;
        }
    }
    best
}

/// Best bang-bang path: up to two discretized full-steer or straight
/// segments in either direction, closed by a single-direction Dubins path.
fn bang_bang_best(a: Pose, b: Pose, r: f64) -> f64 {
    let controls: Vec<(f64, f64)> =
        [-1.0 / r, 0.0, 1.0 / r].iter().flat_map(|&k| [(k, 1.0), (k, -1.0)]).collect();
    let fine: Vec<f64> = (1..=24).map(|i| i as f64 * PI * r / 12.0).collect();
    let coarse: Vec<f64> = (1..=8).map(|i| i as f64 * PI * r / 4.0).collect();
    let finish = |z: Pose, used: f64| used + dubins(z, b, r, 1.0).min(dubins(z, b, r, -1.0));
    let mut best = finish(a, 0.0);
    for &(k1, d1) in &controls {
        for &l1 in &fine {
            let z1 = drive(a, k1, d1 * l1);
            best = best.min(finish(z1, l1));
        }
        for &l1 in &coarse {
            let z1 = drive(a, k1, d1 * l1);
            for &(k2, d2) in &controls {
                for &l2 in &coarse {
                    best = best.min(finish(drive(z1, k2, d2 * l2), l1 + l2));
                }
            }
        }
    }
    best
}

fn acc7() -> Verdict {
    let r = 2.7 / 0.6f64.tan();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_excess, mut worst_sym): (f64, f64) = (f64::NEG_INFINITY, 0.0);
    let (mut beaten, mut tight) = (0, 0);
    for _ in 0..1000 {
        let a = Pose::new(rng.gen_range(-15.0..15.0), rng.gen_range(-15.0..15.0), rng.gen_range(-PI..PI));
        let b = Pose::new(rng.gen_range(-15.0..15.0), rng.gen_range(-15.0..15.0), rng.gen_range(-PI..PI));
        let rs = rs_shortest(a, b, r).total_length;
        let oracle = bang_bang_best(a, b, r);
        worst_excess = worst_excess.max(rs - oracle);
        beaten += (rs > oracle + 1e-6) as usize;
        tight += ((rs - oracle).abs() <= 1e-6) as usize;
        worst_sym = worst_sym.max((rs - rs_shortest(b, a, r).total_length).abs());
    }
    Verdict {
        id: 7,
        pass: beaten == 0 && worst_sym <= 1e-9,
        detail: format!("oracle shorter in {beaten}/1000 (matched in {tight}), worst rs - oracle {worst_excess:.2e} m, reversal asymmetry {worst_sym:.1e}"),
    }
}

// ---------------------------------------------------------------- ACC8

fn seg_dist(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o = |p: Vec2, q: Vec2, r: Vec2| (q - p).cross(r - p);
    let (d1, d2, d3, d4) = (o(c, d, a), o(c, d, b), o(a, b, c), o(a, b, d));
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

fn inside(p: Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    let s: Vec<f64> = (0..n).map(|i| (poly[(i + 1) % n] - poly[i]).cross(p - poly[i])).collect();
    s.iter().all(|&v| v >= 0.0) || s.iter().all(|&v| v <= 0.0)
}

/// Sample one boundary densely and measure exact distances to the other's
/// edges; zero when the shapes overlap.
fn sampled_distance(p: &[Vec2], q: &[Vec2]) -> f64 {
    let edges = |v: &[Vec2]| (0..v.len()).map(|i| (v[i], v[(i + 1) % v.len()])).collect::<Vec<_>>();
    let (ep, eq) = (edges(p), edges(q));
    let overlap = p.iter().any(|&v| inside(v, q))
        || q.iter().any(|&v| inside(v, p))
        || ep.iter().any(|&(a, b)| eq.iter().any(|&(c, d)| segments_cross(a, b, c, d)));
    if overlap {
        return 0.0;
    }
    let one_way = |es: &[(Vec2, Vec2)], other: &[(Vec2, Vec2)]| {
        let mut best = f64::INFINITY;
        for &(a, b) in es {
            let n = ((b - a).norm() / 1e-3).ceil() as usize;
            for i in 0..=n {
                let pt = a + (b - a) * (i as f64 / n as f64);
                for &(c, d) in other {
                    best = best.min(seg_dist(pt, c, d));
                }
            }
        }
        best
    };
    one_way(&ep, &eq).min(one_way(&eq, &ep))
}

fn random_rect(rng: &mut ChaCha8Rng) -> ConvexPolytope {
    let (w, h) = (rng.gen_range(0.2..5.0), rng.gen_range(0.2..5.0));
    let pose = Pose::new(rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0), rng.gen_range(-PI..PI));
    ConvexPolytope::rectangle(-w / 2.0, -h / 2.0, w / 2.0, h / 2.0).unwrap().transformed(&pose)
}

fn acc8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst, mut worst_sym): (f64, f64) = (0.0, 0.0);
    let mut overlapping = 0;
    for _ in 0..500 {
        let (p, q) = (random_rect(&mut rng), random_rect(&mut rng));
        let d = polytope_distance(&p, &q).unwrap();
        let oracle = sampled_distance(p.vertices(), q.vertices());
        overlapping += (oracle == 0.0) as usize;
        worst = worst.max((d - oracle).abs());
        worst_sym = worst_sym.max((d - polytope_distance(&q, &p).unwrap()).abs());
    }
    Verdict {
        id: 8,
        pass: worst <= 1e-3 && worst_sym <= 1e-9,
        detail: format!("worst |d - oracle| {worst:.2e} ({overlapping} overlapping pairs), asymmetry {worst_sym:.1e}"),
    }
}

// ---------------------------------------------------------------- ACC9

fn acc9() -> Verdict {
    let sc = Scenario::named("a").unwrap().with_grid_resolution(31).unwrap();
    let a = precompute(&sc, &PrecomputeOptions { seed: 3, ..Default::default() }).unwrap();
    let b = precompute(&sc, &PrecomputeOptions { seed: 3, ..Default::default() }).unwrap();
    let same_states = a.connected == b.connected;
    let bytes_a = OfflineCache::new(sc.clone(), a.clone()).to_bytes().unwrap();
    let bytes_b = OfflineCache::new(sc.clone(), b).to_bytes().unwrap();
    let same_cache = bytes_a == bytes_b && OfflineCache::from_bytes(&bytes_a).unwrap().to_bytes().unwrap() == bytes_a;

    let world = sc.world();
    let mut same_paths = true;
    let mut svgs = true;
    for seed in 0..10 {
        let start = random_request(&sc, seed).unwrap();
        let one = plan(start, sc.goal, &a.connected, &world, &SearchOptions { threads: 1, ..Default::default() });
        let many = plan(start, sc.goal, &a.connected, &world, &SearchOptions { threads: 12, ..Default::default() });
        match (one, many) {
            (Ok(x), Ok(y)) => {
                same_paths &= x.path == y.path && x.selected == y.selected;
                let pts: Vec<(Pose, Direction)> = x.path.waypoints.iter().map(|w| (w.pose, w.direction)).collect();
                let scene = Scene {
                    x_range: (sc.grid.lo[0], sc.grid.hi[0]),
                    y_range: (sc.grid.lo[1], sc.grid.hi[1]),
                    obstacles: &sc.obstacles,
                    set: Some((&a.field, &a.mask)),
                    connected: &a.connected,
                    path: &pts,
                    start: Some(start),
                    goal: Some(sc.goal),
                    vehicle: Some(sc.vehicle),
                };
                svgs &= scene_svg(&scene) == scene_svg(&scene.clone());
            }
            (Err(_), Err(_)) => {}
            _ => same_paths = false,
        }
    }
    Verdict {
        id: 9,
        pass: same_states && same_cache && same_paths && svgs,
        detail: format!("connected states {same_states}, cache bytes {same_cache}, paths across thread counts {same_paths}, SVG {svgs}"),
    }
}

#[test]
fn acceptance() {
    let mut verdicts = Vec::new();
    let mut push = |v: Verdict| {
        report(&v);
        verdicts.push(v);
    };

    push(acc1());

    let free = free_batches();
    push(Verdict {
        id: 2,
        pass: free.violations == 0,
        detail: format!("{} successes on a, d, g; {} colliding resampled poses", free.successes, free.violations),
    });
    push(Verdict {
        id: 3,
        pass: free.continuity_bad.is_empty(),
        detail: if free.continuity_bad.is_empty() {
            format!("{} paths within gap, flip and curvature bounds", free.successes)
        } else {
            format!("{} bad paths, first: {}", free.continuity_bad.len(), free.continuity_bad[0])
        },
    });
    let zero_failures = free.failures.iter().all(|(_, f)| *f == 0);
    let (order_ok, order_detail) = acc4_ordering();
    let failures: Vec<String> = free.failures.iter().map(|(id, f)| format!("{id} {f}/{TRIALS}")).collect();
    push(Verdict {
        id: 4,
        pass: zero_failures && order_ok,
        detail: format!("HJBA* failures {}; {order_detail}", failures.join(", ")),
    });
    let frac = free.cusp_le1 as f64 / free.cusp_total.max(1) as f64;
    push(Verdict {
        id: 5,
        pass: frac >= 0.9,
        detail: format!(
            "a: {}/{} successes with at most one direction change ({:.0}%), histogram 0..7+ {:?}",
            free.cusp_le1,
            free.cusp_total,
            100.0 * frac,
            free.cusp_hist
        ),
    });
    push(acc6());
    push(acc7());
    push(acc8());
    push(acc9());

    let failed: Vec<usize> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    assert!(failed.is_empty(), "failed acceptance criteria: {failed:?}");
}
