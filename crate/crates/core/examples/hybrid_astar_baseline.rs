//! Side-by-side runs of the reachability-guided planner and the Hybrid A*
//! baseline on a constrained scene.

use std::time::Instant;

use hjbastar::hastar::{build_holonomic_map, hastar_plan, HastarOptions};
use hjbastar::pipeline::{precompute, PrecomputeOptions};
use hjbastar::scenario::{random_request, Scenario};
use hjbastar::search::{plan, SearchOptions};

fn main() -> hjbastar::Result<()> {
    let sc = Scenario::named("h")?.with_grid_resolution(41)?;
    let world = sc.world();
    let pre = precompute(&sc, &PrecomputeOptions::default())?;
    let map = build_holonomic_map(&world, &sc.goal, 0.5)?;
    let hj_opts = SearchOptions { node_budget: sc.node_budget, ..Default::default() };
    let ha_opts = HastarOptions { node_budget: sc.node_budget, ..Default::default() };

    println!("seed  planner  ms       nodes  length  changes");
    for seed in 0..5 {
        let start = random_request(&sc, seed)?;
        let t = Instant::now();
        let hj = plan(start, sc.goal, &pre.connected, &world, &hj_opts);
        let hj_ms = t.elapsed().as_secs_f64() * 1e3;
        let t = Instant::now();
        let ha = hastar_plan(start, sc.goal, &world, &map, &ha_opts);
        let ha_ms = t.elapsed().as_secs_f64() * 1e3;
        match hj {
            Ok(r) => println!(
                "{seed:<5} HJBA*    {hj_ms:<8.1} {:<6} {:<7.2} {}",
                r.stats.node_count(),
                r.path.total_length,
                r.path.cusp_count
            ),
            Err(e) => println!("{seed:<5} HJBA*    {hj_ms:<8.1} failed: {e}"),
        }
        match ha {
            Ok(r) => println!(
                "{seed:<5} HA*      {ha_ms:<8.1} {:<6} {:<7.2} {}",
                r.stats.node_count(),
                r.path.total_length,
                r.path.cusp_count
            ),
            Err(e) => println!("{seed:<5} HA*      {ha_ms:<8.1} {:<6} failed: {:?}", e.stats.node_count(), e.reason),
        }
    }
    Ok(())
}
