//! Shortest Reeds-Shepp words between a few pose pairs.

use std::f64::consts::{FRAC_PI_2, PI};

use hjbastar::geometry::{Direction, Pose};
use hjbastar::reeds_shepp::{rs_sample, rs_shortest};

fn main() {
    let r = 4.0;
    let pairs = [
        (Pose::new(0.0, 0.0, 0.0), Pose::new(10.0, 0.0, 0.0)),
        (Pose::new(0.0, 0.0, 0.0), Pose::new(0.0, 0.0, PI)),
        (Pose::new(0.0, 0.0, 0.0), Pose::new(-3.0, 2.0, 0.0)),
        (Pose::new(-12.0, 7.5, 0.0), Pose::new(0.0, 1.3, FRAC_PI_2)),
    ];
    for (a, b) in pairs {
        let p = rs_shortest(a, b, r);
        let word: Vec<String> = p
            .segments
            .iter()
            .map(|s| {
                let sign = if s.direction == Direction::Forward { '+' } else { '-' };
                format!("{:?}{sign}{:.2}", s.kind, s.length)
            })
            .collect();
        let end = p.end_pose(a);
        let samples = rs_sample(&p, a, 0.1).len();
        println!(
            "{a:?} -> {b:?}\n  {} m, {} cusps: {}\n  end error {:.1e}, {samples} samples",
            format_args!("{:.3}", p.total_length),
            p.cusp_count(),
            word.join(" "),
            end.distance(&b)
        );
    }
}
