//! Heading derivatives and curvature along a planned path. Each run of
//! constant travel direction is differentiated on its own, so cusps show up
//! as breaks rather than spikes.

use hjbastar::path::continuity_report;
use hjbastar::pipeline::{precompute, PrecomputeOptions};
use hjbastar::scenario::{random_request, Scenario};
use hjbastar::search::{plan, SearchOptions};

fn main() -> hjbastar::Result<()> {
    let sc = Scenario::named("d")?.with_grid_resolution(41)?;
    let pre = precompute(&sc, &PrecomputeOptions::default())?;
    let start = random_request(&sc, 4)?;
    let r = plan(start, sc.goal, &pre.connected, &sc.world(), &SearchOptions::default())?;
    let c = continuity_report(&r.path);

    println!("{} waypoints, {} direction changes", r.path.waypoints.len(), r.path.cusp_count);
    println!("largest step {:.4} m, largest curvature {:.4} 1/m", c.max_gap, c.max_curvature);
    println!("     s      dx/ds   dy/ds   kappa   dir");
    for row in c.rows.iter().step_by((c.rows.len() / 20).max(1)) {
        println!(
            "{:7.2} {:7.3} {:7.3} {:7.3}   {:?}",
            row.s, row.dx, row.dy, row.curvature, row.direction
        );
    }
    Ok(())
}
