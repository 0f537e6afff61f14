use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hjbastar::bench::{cmd_bench, cmd_plan, cmd_plot, cmd_precompute, Algorithm, BenchConfig, PlanCommand};
use hjbastar::bench::trial::parse_pose;
use hjbastar::pipeline::PrecomputeOptions;
use hjbastar::reach::SolverOptions;
use hjbastar::search::{Criterion, SearchOptions};

#[derive(Parser)]
#[command(name = "hjbastar", version, about = "Reachability-guided parking planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Shortest,
    First,
}

#[derive(clap::Args)]
struct SolverArgs {
    /// CFL number of the explicit time steps.
    #[arg(long, default_value_t = 0.5)]
    cfl: f64,
    /// Convergence threshold on the largest per-step change.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Longest horizon to integrate, in seconds.
    #[arg(long, default_value_t = 120.0)]
    max_horizon: f64,
    /// Forward-only tube dynamics.
    #[arg(long)]
    no_reverse: bool,
    /// Tube speed in m/s.
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
    /// Connected states to sample (default: the scenario's count).
    #[arg(long)]
    samples: Option<usize>,
    /// Seed for connected-state sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn options(&self, seed: u64) -> PrecomputeOptions {
        PrecomputeOptions {
            solver: SolverOptions { cfl: self.cfl, tol: self.tol, max_horizon: self.max_horizon, ..Default::default() },
            allow_reverse: !self.no_reverse,
            speed: self.speed,
            samples: self.samples,
            seed,
        }
    }
}

#[derive(clap::Args)]
struct SearchArgs {
    /// Worker threads for the candidate searches.
    #[arg(long, default_value_t = 12)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = CriterionArg::Shortest)]
    criterion: CriterionArg,
    /// Search every candidate instead of skipping ones that cannot win.
    #[arg(long)]
    no_prune: bool,
}

impl SearchArgs {
    fn options(&self) -> SearchOptions {
        SearchOptions {
            threads: self.threads,
            criterion: match self.criterion {
                CriterionArg::Shortest => Criterion::ShortestLength,
                CriterionArg::First => Criterion::FirstFinished,
            },
            prune: !self.no_prune,
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the tube and safe set for a scenario and write a cache file.
    Precompute {
        /// Built-in id (a..i) or scenario TOML file.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Plan one parking request against a cache.
    Plan {
        #[arg(long)]
        cache: PathBuf,
        /// Start pose as "x,y,theta".
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[command(flatten)]
        search: SearchArgs,
        /// Waypoint file to write.
        #[arg(long, default_value = "path.txt")]
        out: PathBuf,
        /// Also draw the scene and path.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run random trials and write one CSV row per trial.
    Bench {
        /// Comma-separated ids or scenario files.
        #[arg(long, value_delimiter = ',', default_value = "a")]
        scenarios: Vec<String>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated: hjba, ha.
        #[arg(long, value_delimiter = ',', default_value = "hjba,ha")]
        algos: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Override grid nodes per axis.
        #[arg(long)]
        resolution: Option<usize>,
        /// Run trials concurrently (timings become unreliable).
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Render a benchmark CSV or a waypoint file as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> hjbastar::Result<()> {
    match cli.command {
        Command::Precompute { scenario, out, solver } => {
            print!("{}", cmd_precompute(&scenario, &out, &solver.options(solver.seed))?);
        }
        Command::Plan { cache, start, search, out, svg } => {
            let cmd = PlanCommand { cache, start: parse_pose(&start)?, search: search.options(), out, svg };
            print!("{}", cmd_plan(&cmd)?.1);
        }
        Command::Bench { scenarios, trials, seed, algos, out, resolution, parallel, search } => {
            let algorithms = algos.iter().map(|a| a.parse::<Algorithm>()).collect::<hjbastar::Result<_>>()?;
            let cfg = BenchConfig {
                scenarios,
                trials,
                seed,
                algorithms,
                search: search.options(),
                grid_resolution: resolution,
                parallel_trials: parallel,
                ..Default::default()
            };
            print!("{}", cmd_bench(&cfg, &out)?);
        }
        Command::Plot { input, out } => cmd_plot(&input, &out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
