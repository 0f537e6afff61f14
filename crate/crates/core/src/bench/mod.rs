//! Offline cache files, batch benchmarks, plots, and the command
//! implementations behind the `hjbastar` binary.

pub mod cache;
pub mod svg;
pub mod trial;

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::path::continuity_of;
use crate::pipeline::{precompute, PrecomputeOptions};
use crate::scenario::resolve_scenario;
use crate::search::{plan, PlanResult, SearchOptions};

pub use cache::OfflineCache;
pub use trial::{aggregate, format_table, run_bench, Algorithm, BenchConfig, Outcome, TrialRecord};

/// Solves the offline layer for a scenario and writes the cache. Returns a
/// short summary.
pub fn cmd_precompute(scenario: &str, out: &Path, opts: &PrecomputeOptions) -> Result<String> {
    let sc = resolve_scenario(scenario)?;
    let pre = precompute(&sc, opts)?;
    let cache = OfflineCache::new(sc, pre);
    cache.save(out)?;
    let mut msg = format!(
        "tube cells {}\nsafe reachable cells {}\nconnected states {}\n",
        cache.tube_cells(),
        cache.safe_reachable_cells(),
        cache.connected.len()
    );
    if cache.truncated {
        msg.push_str("note: fewer cells passed the sampling predicate than requested\n");
    }
    Ok(msg)
}

#[derive(Clone, Debug)]
pub struct PlanCommand {
    pub cache: PathBuf,
    pub start: Pose,
    pub search: SearchOptions,
    pub out: PathBuf,
    pub svg: Option<PathBuf>,
}

/// Plans from a cache, writes the waypoint file and optional scene SVG.
pub fn cmd_plan(cmd: &PlanCommand) -> Result<(PlanResult, String)> {
    let cache = OfflineCache::load(&cmd.cache)?;
    let sc = &cache.scenario;
    let world = sc.world();
    let opts = SearchOptions { node_budget: sc.node_budget, ..cmd.search.clone() };
    let r = plan(cmd.start, sc.goal, &cache.connected, &world, &opts)?;
    std::fs::write(&cmd.out, trial::format_waypoints(&r.path))?;
    if let Some(svg_path) = &cmd.svg {
        let pts: Vec<_> = r.path.waypoints.iter().map(|w| (w.pose, w.direction)).collect();
        let scene = svg::Scene {
            x_range: (sc.grid.lo[0], sc.grid.hi[0]),
            y_range: (sc.grid.lo[1], sc.grid.hi[1]),
            obstacles: &sc.obstacles,
            set: Some((&cache.field, &cache.mask)),
            connected: &cache.connected,
            path: &pts,
            start: Some(cmd.start),
            goal: Some(sc.goal),
            vehicle: Some(sc.vehicle),
        };
        std::fs::write(svg_path, svg::scene_svg(&scene))?;
    }
    let msg = format!(
        "length {:.3} m, direction changes {}, nodes {}, connected state {}\n",
        r.path.total_length,
        r.path.cusp_count,
        r.stats.node_count(),
        r.selected
    );
    Ok((r, msg))
}

/// Runs a batch, writes the CSV and returns the aggregate table.
pub fn cmd_bench(cfg: &BenchConfig, out: &Path) -> Result<String> {
    let records = run_bench(cfg)?;
    trial::write_csv(&records, std::fs::File::create(out)?)?;
    let mut table = format_table(&aggregate(&records));
    if cfg.parallel_trials {
        table.push_str("note: trials ran in parallel; timing columns are unreliable\n");
    }
    Ok(table)
}

/// Renders a benchmark CSV as strip charts or a waypoint file as a
/// continuity chart, chosen by content.
pub fn cmd_plot(input: &Path, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input)?;
    let svg = if text.starts_with(trial::CSV_HEADER[0]) {
        svg::bench_svg(&trial::read_csv(text.as_bytes())?)
    } else {
        let pts = trial::parse_waypoints(&text)?;
        if pts.is_empty() {
            return Err(Error::Parse { line: 1, message: "no waypoints".into() });
        }
        svg::continuity_svg(&continuity_of(&pts))
    };
    std::fs::write(out, svg)?;
    Ok(())
}
