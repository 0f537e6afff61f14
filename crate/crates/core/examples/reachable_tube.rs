//! Growth of the backward reachable tube around a goal box at the origin.

use hjbastar::geometry::Pose;
use hjbastar::grid::Grid3;
use hjbastar::reach::{solve_brt, DubinsParams, GoalSet, SolverOptions};

fn main() -> hjbastar::Result<()> {
    let grid = Grid3::cubic((-10.0, 10.0), (-10.0, 10.0), 41)?;
    let goal = GoalSet { center: Pose::new(0.0, 0.0, 0.0), half_widths: [1.0, 1.0, 0.5] };
    let opts = SolverOptions { checkpoint_every: Some(2.0), ..Default::default() };
    let brt = solve_brt(&grid, &goal, &DubinsParams::default(), &opts)?;

    for (t, field) in &brt.checkpoints {
        let inside = field.values.iter().filter(|&&v| v <= 0.0).count();
        println!("t = {t:5.1} s  {inside:6} of {} cells", grid.len());
        if inside == grid.len() {
            break;
        }
    }
    println!(
        "horizon {:.1} s after {} steps, converged {}",
        brt.horizon, brt.iterations, brt.converged
    );
    for p in [Pose::new(5.0, 0.0, 0.0), Pose::new(-5.0, 0.0, 0.0), Pose::new(0.0, 6.0, 1.0)] {
        println!("V{p:?} = {:.3}", brt.field.interpolate(&p)?);
    }
    Ok(())
}
