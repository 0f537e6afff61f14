//! Writes a built-in scene to TOML, edits it and reads it back.

use hjbastar::scenario::{load_scenario, save_scenario, Scenario, SCENARIO_IDS};

fn main() -> hjbastar::Result<()> {
    for id in SCENARIO_IDS {
        let sc = Scenario::named(id)?;
        println!("{id}: {:<28} {} obstacles, grid {:?}", sc.name, sc.obstacles.len(), sc.grid.n);
    }

    let path = std::env::temp_dir().join("hjbastar-scene.toml");
    let mut sc = Scenario::named("e")?.with_grid_resolution(31)?;
    sc.node_budget = 2000;
    save_scenario(&sc, &path)?;
    let back = load_scenario(&path)?;
    assert_eq!(back.node_budget, 2000);
    println!("\n{}:\n{}", path.display(), std::fs::read_to_string(&path)?);
    Ok(())
}
