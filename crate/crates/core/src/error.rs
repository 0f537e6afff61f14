use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distance iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("({x:.3}, {y:.3}) lies outside the grid")]
    OutOfBounds { x: f64, y: f64 },
    #[error("value function became non-finite at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("grids do not match")]
    GridMismatch,
    #[error("no safe reachable cell satisfies the sampling predicate")]
    EmptySampleSpace,
    #[error("invalid spot: {0}")]
    InvalidSpot(String),
    #[error("no collision-free start found in the region after {attempts} draws")]
    RegionInfeasible { attempts: usize },
    #[error("goal cell is blocked")]
    GoalBlocked,
    #[error("every candidate search failed ({candidates} candidates)")]
    AllCandidatesFailed { candidates: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::AllCandidatesFailed { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
