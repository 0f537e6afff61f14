//! A small benchmark batch over two scenes, printed as an aggregate table
//! and written as CSV to stdout.

use hjbastar::bench::trial::write_csv;
use hjbastar::bench::{aggregate, format_table, run_bench, BenchConfig};

fn main() -> hjbastar::Result<()> {
    let cfg = BenchConfig {
        scenarios: vec!["a".into(), "g".into()],
        trials: 5,
        grid_resolution: Some(31),
        ..Default::default()
    };
    let records = run_bench(&cfg)?;
    print!("{}", format_table(&aggregate(&records)));
    println!();
    write_csv(&records, std::io::stdout())?;
    Ok(())
}
