//! Parks the demo start pose in the perpendicular scene and optionally draws
//! the result: `cargo run --release --example perpendicular_demo -- out.svg`.

use hjbastar::bench::svg::{scene_svg, Scene};
use hjbastar::geometry::Pose;
use hjbastar::pipeline::{precompute, PrecomputeOptions};
use hjbastar::scenario::Scenario;
use hjbastar::search::{plan, SearchOptions};

fn main() -> hjbastar::Result<()> {
    let sc = Scenario::named("a")?;
    let pre = precompute(&sc, &PrecomputeOptions::default())?;
    println!("tube cells {}, connected states {}", pre.tube_cells(), pre.connected.len());

    let start = Pose::new(-12.0, 7.5, 0.0);
    let opts = SearchOptions { node_budget: sc.node_budget, ..Default::default() };
    let r = plan(start, sc.goal, &pre.connected, &sc.world(), &opts)?;
    println!(
        "length {:.2} m, direction changes {}, nodes {}, via state {}",
        r.path.total_length,
        r.path.cusp_count,
        r.stats.node_count(),
        r.selected
    );

    if let Some(out) = std::env::args().nth(1) {
        let pts: Vec<_> = r.path.waypoints.iter().map(|w| (w.pose, w.direction)).collect();
        let scene = Scene {
            x_range: (sc.grid.lo[0], sc.grid.hi[0]),
            y_range: (sc.grid.lo[1], sc.grid.hi[1]),
            obstacles: &sc.obstacles,
            set: Some((&pre.field, &pre.mask)),
            connected: &pre.connected,
            path: &pts,
            start: Some(start),
            goal: Some(sc.goal),
            vehicle: Some(sc.vehicle),
        };
        std::fs::write(&out, scene_svg(&scene))?;
        println!("wrote {out}");
    }
    Ok(())
}
