//! Parking scenarios: archetype layouts, random start requests and the
//! TOML scenario file format.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polytope_distance, ConvexPolytope, Pose, Vec2, VehicleGeometry};
use crate::grid::Grid3;
use crate::reach::GoalSet;
use crate::safe_set::{HalfPlane, SamplingPredicate};
use crate::world::{Bounds, World};

/// Spot width `w`, depth `d`, driving-aisle height `h` and angle `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpotSpec {
    pub w: f64,
    pub d: f64,
    pub h: f64,
    pub alpha: f64,
}

impl SpotSpec {
    pub fn perpendicular() -> Self {
        SpotSpec { w: 2.6, d: 5.0, h: 6.0, alpha: FRAC_PI_2 }
    }
    pub fn angle() -> Self {
        SpotSpec { w: 2.6, d: 5.0, h: 6.0, alpha: FRAC_PI_4 }
    }
    pub fn parallel() -> Self {
        SpotSpec { w: 6.0, d: 2.5, h: 6.0, alpha: FRAC_PI_2 }
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.w, self.d, self.h, self.alpha].iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::InvalidSpot("w, d, h and alpha must be positive".into()));
        }
        if self.alpha > PI {
            return Err(Error::InvalidSpot("alpha must not exceed pi".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Archetype {
    Perpendicular,
    Angle,
    Parallel,
}

impl Archetype {
    pub fn default_spot(self) -> SpotSpec {
        match self {
            Archetype::Perpendicular => SpotSpec::perpendicular(),
            Archetype::Angle => SpotSpec::angle(),
            Archetype::Parallel => SpotSpec::parallel(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clutter {
    Free,
    /// A barrier in the aisle beside the spot.
    Constrained,
    /// A barrier across from the spot and starts approaching from the other side.
    Swapped,
}

/// Box of rear-axle start poses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartRegion {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub theta: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub archetype: Archetype,
    pub spot: SpotSpec,
    pub vehicle: VehicleGeometry,
    pub obstacles: Vec<ConvexPolytope>,
    pub goal: Pose,
    /// Half widths of the goal box used as the reachability target.
    pub goal_tolerance: [f64; 3],
    pub grid: Grid3,
    pub sampling_predicate: SamplingPredicate,
    pub start_region: StartRegion,
    pub node_budget: usize,
    pub margin: f64,
    pub samples: usize,
    pub two_stage: bool,
}

pub const DEFAULT_NODE_BUDGET: usize = 5000;
const BARRIER_DEPTH: f64 = 1.5;
const KERB: f64 = 0.25;

/// Short ids of the nine built-in scenarios.
pub const SCENARIO_IDS: [&str; 9] = ["a", "b", "c", "d", "e", "f", "g", "h", "i"];

impl Scenario {
    /// Built-in scenario by id `a`..`i`: perpendicular, angle and parallel,
    /// each free, constrained and swapped.
    pub fn named(id: &str) -> Result<Scenario> {
        let pos = SCENARIO_IDS
            .iter()
            .position(|s| *s == id)
            .ok_or_else(|| Error::Validation(format!("unknown scenario id {id:?}")))?;
        let archetype = [Archetype::Perpendicular, Archetype::Angle, Archetype::Parallel][pos / 3];
        let clutter = [Clutter::Free, Clutter::Constrained, Clutter::Swapped][pos % 3];
        let mut s = build_archetype(archetype, archetype.default_spot(), clutter)?;
        s.name = format!("{id}-{}", s.name);
        Ok(s)
    }

    pub fn world(&self) -> World {
        World::new(self.vehicle, self.obstacles.clone(), self.margin).with_bounds(self.bounds())
    }

    /// Rear-axle bounds: the grid's x-y extent.
    pub fn bounds(&self) -> Bounds {
        Bounds { x: (self.grid.lo[0], self.grid.hi[0]), y: (self.grid.lo[1], self.grid.hi[1]) }
    }

    pub fn goal_set(&self) -> GoalSet {
        GoalSet { center: self.goal, half_widths: self.goal_tolerance }
    }

    /// Box around the goal spanning the spot, used as the second-stage target.
    pub fn spot_interior(&self) -> GoalSet {
        GoalSet { center: self.goal, half_widths: [self.spot.w / 2.0, self.spot.d / 2.0, PI / 6.0] }
    }

    pub fn with_grid_resolution(mut self, n: usize) -> Result<Scenario> {
        self.grid = Grid3::cubic((self.grid.lo[0], self.grid.hi[0]), (self.grid.lo[1], self.grid.hi[1]), n)?;
        Ok(self)
    }

    /// Reflection about `x = 0`.
    pub fn mirrored(&self) -> Scenario {
        let mut s = self.clone();
        s.obstacles = self.obstacles.iter().map(|o| o.mirrored_x()).collect();
        s.goal = Pose::new(-self.goal.x, self.goal.y, PI - self.goal.theta);
        s.grid.lo[0] = -self.grid.hi[0];
        s.grid.hi[0] = -self.grid.lo[0];
        let r = &self.start_region;
        s.start_region = StartRegion { x: (-r.x.1, -r.x.0), y: r.y, theta: (PI - r.theta.1, PI - r.theta.0) };
        s.sampling_predicate.halfplanes = self
            .sampling_predicate
            .halfplanes
            .iter()
            .map(|h| HalfPlane { a: -h.a, ..*h })
            .collect();
        s.sampling_predicate.theta_range = self.sampling_predicate.theta_range.map(|(lo, hi)| (PI - hi, PI - lo));
        s
    }

    /// Checks every scenario invariant.
    pub fn validate(&self) -> Result<()> {
        self.spot.validate().map_err(|e| Error::Validation(e.to_string()))?;
        self.vehicle.validate()?;
        if self.node_budget == 0 || self.samples == 0 {
            return Err(Error::Validation("node_budget and samples must be positive".into()));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::Validation("margin must be non-negative".into()));
        }
        if self.goal_tolerance.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::Validation("goal_tolerance must be positive".into()));
        }
        let world = self.world();
        if !world.pose_is_free(&self.goal) {
            return Err(Error::Validation("goal footprint collides or leaves the grid".into()));
        }
        let r = &self.start_region;
        if !(r.x.0 <= r.x.1 && r.y.0 <= r.y.1 && r.theta.0 <= r.theta.1) {
            return Err(Error::Validation("start_region ranges must be ordered".into()));
        }
        if !(self.grid.contains_xy(r.x.0, r.y.0) && self.grid.contains_xy(r.x.1, r.y.1)) {
            return Err(Error::Validation("start_region must lie within the grid bounds".into()));
        }
        let region = region_polygon(r)?;
        for o in &self.obstacles {
            let d = match &region {
                Some(p) => polytope_distance(p, o)?,
                None => o.point_distance(Vec2::new(r.x.0, r.y.0)),
            };
            if d <= self.margin {
                return Err(Error::Validation("start_region overlaps an obstacle".into()));
            }
        }
        Ok(())
    }
}

fn region_polygon(r: &StartRegion) -> Result<Option<ConvexPolytope>> {
    if r.x.1 - r.x.0 > 1e-9 && r.y.1 - r.y.0 > 1e-9 {
        Ok(Some(ConvexPolytope::rectangle(r.x.0, r.y.0, r.x.1, r.y.1)?))
    } else {
        Ok(None)
    }
}

/// Lays out a spot centered near `x = 0` with a row line at `y = d` (a kerb
/// line for parallel spots), neighbors on both sides, a wall behind the row
/// and a wall closing the aisle `h` beyond it.
pub fn build_archetype(archetype: Archetype, spot: SpotSpec, clutter: Clutter) -> Result<Scenario> {
    spot.validate()?;
    let vehicle = VehicleGeometry::default();
    let (l, w, r) = (vehicle.length, vehicle.width, vehicle.rear_overhang);
    let rect = |x0: f64, y0: f64, x1: f64, y1: f64| ConvexPolytope::rectangle(x0, y0, x1, y1);
    let (goal, pitch, row, back_top) = match archetype {
        Archetype::Perpendicular => {
            if spot.w <= w || spot.d < l {
                return Err(Error::InvalidSpot("vehicle does not fit the spot".into()));
            }
            (Pose::new(0.0, spot.d - (l - r), FRAC_PI_2), spot.w, spot.d, 0.0)
        }
        Archetype::Angle => {
            let (s, c) = (spot.alpha.sin(), spot.alpha.cos());
            if spot.w <= w || spot.d < l {
                return Err(Error::InvalidSpot("vehicle does not fit the spot".into()));
            }
            // Car centered at x = 0, its highest corner on the row line.
            let y = spot.d - r * s - (w / 2.0) * c.abs();
            let x = -(l / 2.0 - r) * c;
            (Pose::new(x, y, -spot.alpha), spot.w / s, spot.d, 0.0)
        }
        Archetype::Parallel => {
            if spot.w <= l || spot.d <= w {
                return Err(Error::InvalidSpot("vehicle does not fit the spot".into()));
            }
            let goal = Pose::new(-(l / 2.0 - r), KERB + spot.d / 2.0, 0.0);
            (goal, spot.w / 2.0 + l / 2.0, KERB + spot.d, KERB)
        }
    };
    let top = row + spot.h;
    let body = vehicle.body().transformed(&goal);
    let mut obstacles = vec![
        body.translated(Vec2::new(-pitch, 0.0)),
        body.translated(Vec2::new(pitch, 0.0)),
        rect(-40.0, -3.0, 40.0, back_top)?,
        rect(-40.0, top, 40.0, top + 1.0)?,
    ];
    let (x_span, y_lo, start_region, predicate) = match archetype {
        Archetype::Perpendicular => (
            15.0,
            -1.0,
            StartRegion { x: (-14.0, 14.0), y: (6.0, 9.0), theta: (0.0, FRAC_PI_4) },
            vec![HalfPlane::x_at_least(goal.x)],
        ),
        Archetype::Angle => (
            20.0,
            -1.0,
            StartRegion { x: (-18.0, 18.0), y: (6.0, 8.0), theta: (0.0, PI / 9.0) },
            vec![HalfPlane::x_below(goal.x)],
        ),
        Archetype::Parallel => (
            15.0,
            -1.0,
            StartRegion { x: (-14.0, 14.0), y: (4.0, 6.5), theta: (0.0, PI / 9.0) },
            vec![HalfPlane::x_above(goal.x), HalfPlane::y_above(spot.w)],
        ),
    };
    let mut start_region = start_region;
    let name = match clutter {
        Clutter::Free => "free",
        Clutter::Constrained => {
            obstacles.push(rect(3.0, top - BARRIER_DEPTH, 3.0 + l, top)?);
            "constrained"
        }
        Clutter::Swapped => {
            obstacles.push(rect(-l / 2.0, top - BARRIER_DEPTH, l / 2.0, top)?);
            start_region.theta = (PI - start_region.theta.1, PI - start_region.theta.0);
            "swapped"
        }
    };
    let n = match archetype {
        Archetype::Perpendicular => 61,
        _ => 101,
    };
    let kind = match archetype {
        Archetype::Perpendicular => "perpendicular",
        Archetype::Angle => "angle",
        Archetype::Parallel => "parallel",
    };
    let scenario = Scenario {
        name: format!("{kind}-{name}"),
        archetype,
        spot,
        vehicle,
        obstacles,
        goal,
        goal_tolerance: [0.8, 0.8, 0.25],
        grid: Grid3::cubic((-x_span, x_span), (y_lo, top), n)?,
        sampling_predicate: SamplingPredicate { halfplanes: predicate, theta_range: None },
        start_region,
        node_budget: DEFAULT_NODE_BUDGET,
        margin: 0.0,
        samples: 20,
        two_stage: archetype == Archetype::Parallel,
    };
    scenario.validate().map_err(|e| Error::InvalidSpot(e.to_string()))?;
    Ok(scenario)
}

pub const MAX_DRAWS: usize = 1000;

/// Uniform start pose in the region whose footprint is collision-free.
pub fn random_request(scenario: &Scenario, seed: u64) -> Result<Pose> {
    let world = scenario.world();
    let r = &scenario.start_region;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |(lo, hi): (f64, f64)| if hi > lo { rng.gen_range(lo..=hi) } else { lo };
    for _ in 0..MAX_DRAWS {
        let p = Pose::new(draw(r.x), draw(r.y), draw(r.theta));
        if world.pose_is_free(&p) {
            return Ok(p);
        }
    }
    Err(Error::RegionInfeasible { attempts: MAX_DRAWS })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    x: (f64, f64),
    y: (f64, f64),
    n: [usize; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleFile {
    vertices: Vec<(f64, f64)>,
}

fn default_budget() -> usize {
    DEFAULT_NODE_BUDGET
}
fn default_samples() -> usize {
    20
}
fn default_tolerance() -> [f64; 3] {
    [0.8, 0.8, 0.25]
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    archetype: Archetype,
    #[serde(default = "default_budget")]
    node_budget: usize,
    #[serde(default)]
    margin: f64,
    #[serde(default = "default_samples")]
    samples: usize,
    #[serde(default)]
    two_stage: bool,
    #[serde(default = "default_tolerance")]
    goal_tolerance: [f64; 3],
    spot: SpotSpec,
    goal: Pose,
    #[serde(default)]
    vehicle: Option<VehicleGeometry>,
    grid: GridFile,
    start_region: StartRegion,
    #[serde(default)]
    sampling_predicate: SamplingPredicate,
    #[serde(default)]
    obstacles: Vec<ObstacleFile>,
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let f: ScenarioFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
        Error::Parse { line, message: e.message().to_string() }
    })?;
    let obstacles = f
        .obstacles
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let pts: Vec<Vec2> = o.vertices.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
            ConvexPolytope::from_vertices(&pts).map_err(|e| Error::Validation(format!("obstacle {i}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let s = Scenario {
        name: f.name,
        archetype: f.archetype,
        spot: f.spot,
        vehicle: f.vehicle.unwrap_or_default(),
        obstacles,
        goal: Pose::new(f.goal.x, f.goal.y, f.goal.theta),
        goal_tolerance: f.goal_tolerance,
        grid: Grid3::new(f.grid.x, f.grid.y, f.grid.n)?,
        sampling_predicate: f.sampling_predicate,
        start_region: f.start_region,
        node_budget: f.node_budget,
        margin: f.margin,
        samples: f.samples,
        two_stage: f.two_stage,
    };
    s.validate()?;
    Ok(s)
}

pub fn scenario_to_toml(s: &Scenario) -> String {
    let f = ScenarioFile {
        name: s.name.clone(),
        archetype: s.archetype,
        node_budget: s.node_budget,
        margin: s.margin,
        samples: s.samples,
        two_stage: s.two_stage,
        goal_tolerance: s.goal_tolerance,
        spot: s.spot,
        goal: s.goal,
        vehicle: Some(s.vehicle),
        grid: GridFile { x: (s.grid.lo[0], s.grid.hi[0]), y: (s.grid.lo[1], s.grid.hi[1]), n: s.grid.n },
        start_region: s.start_region,
        sampling_predicate: s.sampling_predicate.clone(),
        obstacles: s
            .obstacles
            .iter()
            .map(|o| ObstacleFile { vertices: o.vertices().iter().map(|v| (v.x, v.y)).collect() })
            .collect(),
    };
    toml::to_string(&f).expect("scenario serializes")
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

pub fn save_scenario(s: &Scenario, path: &Path) -> Result<()> {
    std::fs::write(path, scenario_to_toml(s))?;
    Ok(())
}

/// A built-in id or a path to a scenario file.
pub fn resolve_scenario(spec: &str) -> Result<Scenario> {
    if SCENARIO_IDS.contains(&spec) {
        Scenario::named(spec)
    } else {
        load_scenario(Path::new(spec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{angle_diff, footprint_collides};

    #[test]
    fn default_goals() {
        let p = build_archetype(Archetype::Perpendicular, SpotSpec::perpendicular(), Clutter::Free).unwrap();
        assert!((p.goal.x).abs() < 1e-12 && (p.goal.y - 1.3).abs() < 1e-12);
        assert!((p.goal.theta - FRAC_PI_2).abs() < 1e-12);
        let q = build_archetype(Archetype::Parallel, SpotSpec::parallel(), Clutter::Free).unwrap();
        assert!((q.goal.x + 1.35).abs() < 1e-12 && (q.goal.y - 1.5).abs() < 1e-12 && q.goal.theta == 0.0);
        let a = build_archetype(Archetype::Angle, SpotSpec::angle(), Clutter::Free).unwrap();
        assert!((a.goal.theta + FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn neighbors_flank_the_spot() {
        let p = build_archetype(Archetype::Perpendicular, SpotSpec::perpendicular(), Clutter::Free).unwrap();
        let xs: Vec<f64> = p.obstacles[..2].iter().map(|o| o.center().x).collect();
        assert!((xs[0] + 2.6).abs() < 1e-9 && (xs[1] - 2.6).abs() < 1e-9);
        let q = build_archetype(Archetype::Parallel, SpotSpec::parallel(), Clutter::Free).unwrap();
        let fore = q.obstacles[1].vertices().iter().map(|v| v.x).fold(f64::INFINITY, f64::min);
        let aft = q.obstacles[0].vertices().iter().map(|v| v.x).fold(f64::NEG_INFINITY, f64::max);
        assert!((fore - 3.0).abs() < 1e-9 && (aft + 3.0).abs() < 1e-9);
    }

    #[test]
    fn all_builtins_are_valid() {
        for id in SCENARIO_IDS {
            let s = Scenario::named(id).unwrap();
            s.validate().unwrap();
            assert!(s.name.starts_with(id));
        }
    }

    #[test]
    fn bad_spots_are_rejected() {
        let tiny = SpotSpec { w: 1.5, ..SpotSpec::perpendicular() };
        assert!(matches!(build_archetype(Archetype::Perpendicular, tiny, Clutter::Free), Err(Error::InvalidSpot(_))));
        let neg = SpotSpec { h: -1.0, ..SpotSpec::angle() };
        assert!(matches!(build_archetype(Archetype::Angle, neg, Clutter::Free), Err(Error::InvalidSpot(_))));
        let wide = SpotSpec { alpha: 4.0, ..SpotSpec::angle() };
        assert!(wide.validate().is_err());
    }

    #[test]
    fn requests_respect_region_and_obstacles() {
        let s = Scenario::named("a").unwrap();
        for seed in 0..100 {
            let p = random_request(&s, seed).unwrap();
            assert!((-14.0..=14.0).contains(&p.x) && (6.0..=9.0).contains(&p.y));
            assert!((0.0..=FRAC_PI_4).contains(&p.theta));
            assert!(!footprint_collides(&s.vehicle, &p, &s.obstacles, 0.0));
        }
        assert_eq!(random_request(&s, 7).unwrap(), random_request(&s, 7).unwrap());
    }

    #[test]
    fn degenerate_region_returns_the_point() {
        let mut s = Scenario::named("a").unwrap();
        s.start_region = StartRegion { x: (-5.0, -5.0), y: (7.0, 7.0), theta: (0.2, 0.2) };
        assert_eq!(random_request(&s, 3).unwrap(), Pose::new(-5.0, 7.0, 0.2));
        s.start_region = StartRegion { x: (0.0, 0.0), y: (1.3, 1.3), theta: (0.0, 0.0) };
        assert!(matches!(random_request(&s, 3), Err(Error::RegionInfeasible { attempts: 1000 })));
    }

    #[test]
    fn round_trip_through_toml() {
        for id in SCENARIO_IDS {
            let s = Scenario::named(id).unwrap();
            assert_eq!(parse_scenario(&scenario_to_toml(&s)).unwrap(), s);
        }
    }

    const MINIMAL: &str = r#"
name = "custom"
archetype = "perpendicular"
spot = { w = 2.6, d = 5.0, h = 6.0, alpha = 1.5707963267948966 }
goal = { x = 0.0, y = 1.3, theta = 1.5707963267948966 }
grid = { x = [-15.0, 15.0], y = [-1.0, 11.0], n = [21, 21, 21] }
start_region = { x = [-14.0, 14.0], y = [6.0, 9.0], theta = [0.0, 0.5] }
"#;

    #[test]
    fn defaults_fill_in() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.node_budget, 5000);
        assert_eq!(s.samples, 20);
        assert_eq!(s.margin, 0.0);
        assert!(s.obstacles.is_empty());
    }

    #[test]
    fn non_convex_obstacle_is_a_validation_error() {
        let text = format!("{MINIMAL}\n[[obstacles]]\nvertices = [[0, -5], [4, -5], [1, -4], [4, -3], [0, -3]]\n");
        let text = text.replace("[0, ", "[0.0, ").replace("[4, ", "[4.0, ").replace("[1, ", "[1.0, ");
        match parse_scenario(&text) {
            Err(Error::Validation(m)) => assert!(m.contains("convex"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_report_a_line() {
        let text = MINIMAL.replace("h = 6.0", "h = ");
        match parse_scenario(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let missing = MINIMAL.replace("name = \"custom\"\n", "");
        assert!(matches!(parse_scenario(&missing), Err(Error::Parse { .. })));
    }

    #[test]
    fn colliding_goal_fails_validation() {
        let text = MINIMAL.replace("y = 1.3", "y = -3.0");
        let text = format!("{text}\n[[obstacles]]\nvertices = [[-40.0, -3.0], [40.0, -3.0], [40.0, 0.0], [-40.0, 0.0]]\n");
        assert!(matches!(parse_scenario(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn mirroring_is_consistent() {
        for id in ["a", "d", "h"] {
            let s = Scenario::named(id).unwrap();
            let m = s.mirrored();
            m.validate().unwrap();
            let probe = [Pose::new(1.0, 6.0, 0.3), Pose::new(-4.0, 3.0, 2.0), Pose::new(0.5, 1.0, 1.4), Pose::new(8.0, 9.0, -0.3)];
            for p in probe {
                let q = Pose::new(-p.x, p.y, PI - p.theta);
                assert_eq!(
                    footprint_collides(&s.vehicle, &p, &s.obstacles, 0.0),
                    footprint_collides(&m.vehicle, &q, &m.obstacles, 0.0)
                );
            }
            assert!(angle_diff(m.mirrored().goal.theta, s.goal.theta).abs() < 1e-12);
        }
    }
}
