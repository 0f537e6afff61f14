//! Batch trials, CSV records, aggregate tables and waypoint files.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Direction, Pose};
use crate::hastar::{build_holonomic_map, hastar_plan, HastarOptions, HolonomicCostMap};
use crate::path::PlannedPath;
use crate::pipeline::{precompute, PrecomputeOptions, Precomputed};
use crate::scenario::{random_request, resolve_scenario, Scenario};
use crate::search::{plan, SearchOptions};
use crate::world::World;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "HJBA*")]
    HjbaStar,
    #[serde(rename = "HA*")]
    HaStar,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::HjbaStar => "HJBA*",
            Algorithm::HaStar => "HA*",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hjba*" | "hjba" | "hjbastar" => Ok(Algorithm::HjbaStar),
            "ha*" | "ha" | "hastar" => Ok(Algorithm::HaStar),
            _ => Err(Error::Validation(format!("unknown algorithm {s:?} (use hjba or ha)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Failure,
}

/// One row of the benchmark CSV. Metrics are empty on failures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scenario: String,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub outcome: Outcome,
    pub compute_ms: Option<f64>,
    pub node_count: Option<usize>,
    pub path_length_m: Option<f64>,
    pub direction_changes: Option<usize>,
    pub selected_connected_state: Option<usize>,
}

impl TrialRecord {
    fn failure(scenario: &str, seed: u64, algorithm: Algorithm) -> Self {
        TrialRecord {
            scenario: scenario.to_string(),
            seed,
            algorithm,
            outcome: Outcome::Failure,
            compute_ms: None,
            node_count: None,
            path_length_m: None,
            direction_changes: None,
            selected_connected_state: None,
        }
    }

    fn success(scenario: &str, seed: u64, algorithm: Algorithm, ms: f64, nodes: usize, path: &PlannedPath) -> Self {
        TrialRecord {
            outcome: Outcome::Success,
            compute_ms: Some(ms),
            node_count: Some(nodes),
            path_length_m: Some(path.total_length),
            direction_changes: Some(path.cusp_count),
            ..Self::failure(scenario, seed, algorithm)
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    /// Built-in ids or scenario file paths.
    pub scenarios: Vec<String>,
    pub trials: usize,
    /// Trial `k` draws its start pose with seed `seed + k`.
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub search: SearchOptions,
    pub hastar: HastarOptions,
    pub precompute: PrecomputeOptions,
    /// Override the nodes per axis of every scenario grid.
    pub grid_resolution: Option<usize>,
    /// Run trials concurrently. Timings are then not comparable.
    pub parallel_trials: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            scenarios: vec!["a".into()],
            trials: 10,
            seed: 0,
            algorithms: vec![Algorithm::HjbaStar, Algorithm::HaStar],
            search: SearchOptions::default(),
            hastar: HastarOptions::default(),
            precompute: PrecomputeOptions::default(),
            grid_resolution: None,
            parallel_trials: false,
        }
    }
}

/// Offline state for one scenario, built once and shared by its trials.
pub struct PreparedScenario {
    pub id: String,
    pub scenario: Scenario,
    pub world: World,
    pub precomputed: Option<Precomputed>,
    pub holonomic: Option<HolonomicCostMap>,
}

impl PreparedScenario {
    pub fn new(spec: &str, cfg: &BenchConfig) -> Result<Self> {
        let mut scenario = resolve_scenario(spec)?;
        if let Some(n) = cfg.grid_resolution {
            scenario = scenario.with_grid_resolution(n)?;
        }
        let world = scenario.world();
        let precomputed = if cfg.algorithms.contains(&Algorithm::HjbaStar) {
            Some(precompute(&scenario, &cfg.precompute)?)
        } else {
            None
        };
        let holonomic = if cfg.algorithms.contains(&Algorithm::HaStar) {
            Some(build_holonomic_map(&world, &scenario.goal, cfg.hastar.resolution.xy)?)
        } else {
            None
        };
        Ok(PreparedScenario { id: spec.to_string(), scenario, world, precomputed, holonomic })
    }

    /// Runs one trial. Only the planner call is timed. Planner failures are
    /// recorded; an infeasible start region is an error.
    pub fn trial(&self, seed: u64, algorithm: Algorithm, cfg: &BenchConfig) -> Result<TrialRecord> {
        let start = random_request(&self.scenario, seed)?;
        let goal = self.scenario.goal;
        let id = self.id.as_str();
        match algorithm {
            Algorithm::HjbaStar => {
                let pre = self.precomputed.as_ref().expect("prepared for HJBA*");
                let opts = SearchOptions { node_budget: self.scenario.node_budget, ..cfg.search.clone() };
                let t0 = Instant::now();
                let r = plan(start, goal, &pre.connected, &self.world, &opts);
                let ms = t0.elapsed().as_secs_f64() * 1e3;
                match r {
                    Ok(r) => Ok(TrialRecord {
                        selected_connected_state: Some(r.selected),
                        ..TrialRecord::success(id, seed, algorithm, ms, r.stats.node_count(), &r.path)
                    }),
                    Err(Error::AllCandidatesFailed { .. }) => Ok(TrialRecord::failure(id, seed, algorithm)),
                    Err(e) => Err(e),
                }
            }
            Algorithm::HaStar => {
                let map = self.holonomic.as_ref().expect("prepared for HA*");
                let opts = HastarOptions { node_budget: self.scenario.node_budget, ..cfg.hastar.clone() };
                let t0 = Instant::now();
                let r = hastar_plan(start, goal, &self.world, map, &opts);
                let ms = t0.elapsed().as_secs_f64() * 1e3;
                Ok(match r {
                    Ok(o) => TrialRecord::success(id, seed, algorithm, ms, o.stats.node_count(), &o.path),
                    Err(_) => TrialRecord::failure(id, seed, algorithm),
                })
            }
        }
    }
}

/// Runs every algorithm on every trial seed of every scenario. Records are
/// ordered by scenario, then seed, then algorithm.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for spec in &cfg.scenarios {
        let prepared = PreparedScenario::new(spec, cfg)?;
        let jobs: Vec<(u64, Algorithm)> = (0..cfg.trials as u64)
            .flat_map(|k| cfg.algorithms.iter().map(move |&a| (cfg.seed + k, a)))
            .collect();
        let records: Vec<TrialRecord> = if cfg.parallel_trials {
            jobs.par_iter().map(|&(s, a)| prepared.trial(s, a, cfg)).collect::<Result<_>>()?
        } else {
            jobs.iter().map(|&(s, a)| prepared.trial(s, a, cfg)).collect::<Result<_>>()?
        };
        out.extend(records);
    }
    Ok(out)
}

pub fn write_csv<W: std::io::Write>(records: &[TrialRecord], w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(CSV_HEADER).map_err(csv_error)?;
    for r in records {
        wr.serialize(r).map_err(csv_error)?;
    }
    wr.flush()?;
    Ok(())
}

pub const CSV_HEADER: [&str; 9] = [
    "scenario",
    "seed",
    "algorithm",
    "outcome",
    "compute_ms",
    "node_count",
    "path_length_m",
    "direction_changes",
    "selected_connected_state",
];

pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<TrialRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(csv_error)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse { line: 1, message: "unexpected CSV header".into() });
    }
    rd.deserialize().collect::<std::result::Result<Vec<_>, _>>().map_err(csv_error)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse { line, message: format!("{kind:?}") },
    }
}

/// Mean, min and max of one metric over the successes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Summary> {
        let (mut n, mut sum, mut min, mut max) = (0usize, 0.0, f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            n += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        (n > 0).then(|| Summary { mean: sum / n as f64, min, max })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub failures: usize,
    pub compute_ms: Option<Summary>,
    pub node_count: Option<Summary>,
    pub path_length_m: Option<Summary>,
    pub direction_changes: Option<Summary>,
}

impl AggregateRow {
    pub fn failure_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.failures as f64 / self.trials as f64
        }
    }
}

/// Groups by (scenario, algorithm) in order of first appearance.
pub fn aggregate(records: &[TrialRecord]) -> Vec<AggregateRow> {
    let mut index: HashMap<(&str, Algorithm), usize> = HashMap::new();
    let mut groups: Vec<Vec<&TrialRecord>> = Vec::new();
    for r in records {
        let g = *index.entry((r.scenario.as_str(), r.algorithm)).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(r);
    }
    groups
        .into_iter()
        .map(|rs| {
            let ok: Vec<&TrialRecord> = rs.iter().copied().filter(|r| r.outcome == Outcome::Success).collect();
            AggregateRow {
                scenario: rs[0].scenario.clone(),
                algorithm: rs[0].algorithm,
                trials: rs.len(),
                failures: rs.len() - ok.len(),
                compute_ms: Summary::of(ok.iter().filter_map(|r| r.compute_ms)),
                node_count: Summary::of(ok.iter().filter_map(|r| r.node_count.map(|v| v as f64))),
                path_length_m: Summary::of(ok.iter().filter_map(|r| r.path_length_m)),
                direction_changes: Summary::of(ok.iter().filter_map(|r| r.direction_changes.map(|v| v as f64))),
            }
        })
        .collect()
}

pub fn format_table(rows: &[AggregateRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<24} {:<6} {:>7} | {:>24} | {:>24} | {:>20} | {:>17}",
        "scenario", "algo", "fail", "time ms (mean/min/max)", "nodes (mean/min/max)", "length m", "direction changes"
    );
    let cell = |m: Option<Summary>, prec: usize| match m {
        Some(m) => format!("{:.p$} / {:.p$} / {:.p$}", m.mean, m.min, m.max, p = prec),
        None => "-".into(),
    };
    for r in rows {
        let _ = writeln!(
            s,
            "{:<24} {:<6} {:>6.1}% | {:>24} | {:>24} | {:>20} | {:>17}",
            r.scenario,
            r.algorithm.to_string(),
            100.0 * r.failure_rate(),
            cell(r.compute_ms, 1),
            cell(r.node_count, 1),
            cell(r.path_length_m, 1),
            cell(r.direction_changes, 1),
        );
    }
    s
}

/// One `x y theta direction` line per waypoint, six decimals; direction is
/// `1` forward and `-1` backward.
pub fn format_waypoints(path: &PlannedPath) -> String {
    let mut s = String::new();
    for w in &path.waypoints {
        let _ = writeln!(s, "{:.6} {:.6} {:.6} {}", w.pose.x, w.pose.y, w.pose.theta, w.direction.sign() as i32);
    }
    s
}

pub fn parse_waypoints(text: &str) -> Result<Vec<(Pose, Direction)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: &str| Error::Parse { line: i + 1, message: message.into() };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(bad("expected `x y theta direction`"));
        }
        let num = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad("bad number"));
        let dir = match f[3] {
            "1" => Direction::Forward,
            "-1" => Direction::Backward,
            _ => return Err(bad("direction must be 1 or -1")),
        };
        out.push((Pose::new(num(f[0])?, num(f[1])?, num(f[2])?), dir));
    }
    Ok(out)
}

/// Parses `"x,y,theta"`.
pub fn parse_pose(s: &str) -> Result<Pose> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Validation(format!("pose {s:?} is not three numbers")))?;
    match v[..] {
        [x, y, t] => Ok(Pose::new(x, y, t)),
        _ => Err(Error::Validation(format!("pose {s:?} needs exactly x,y,theta"))),
    }
}
