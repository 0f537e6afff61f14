//! Builds the safe reachable set of a cluttered scene step by step and
//! samples connected states from it.

use hjbastar::reach::{solve_brt, DubinsParams, SolverOptions};
use hjbastar::safe_set::{compute_safety_mask, intersect, sample_connected_states};
use hjbastar::scenario::Scenario;

fn main() -> hjbastar::Result<()> {
    let sc = Scenario::named("b")?.with_grid_resolution(41)?;
    let params = DubinsParams::for_vehicle(&sc.vehicle, 1.0, true);
    let brt = solve_brt(&sc.grid, &sc.goal_set(), &params, &SolverOptions::default())?;
    let mask = compute_safety_mask(&sc.grid, &sc.vehicle, &sc.obstacles, sc.margin)?;
    let s = intersect(&mask, &brt)?;
    println!("grid cells {}", sc.grid.len());
    println!("collision-free cells {}", mask.safe_count());
    println!("safe reachable cells {}", s.len());

    let batch = sample_connected_states(&s, &sc.sampling_predicate, sc.samples, 0)?;
    println!("sampled {} states (truncated: {})", batch.states.len(), batch.truncated);
    for c in batch.states.iter().take(5) {
        println!("  #{:<5} x {:6.2}  y {:6.2}  theta {:5.2}", c.id, c.pose.x, c.pose.y, c.pose.theta);
    }
    Ok(())
}
