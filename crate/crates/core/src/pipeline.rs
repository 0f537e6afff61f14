//! Offline layer end to end: tube, safety mask, safe reachable set and the
//! connected-state batch for one scenario.

use crate::error::Result;
use crate::grid::ValueField;
use crate::reach::{solve_brt, BrtResult, DubinsParams, SolverOptions};
use crate::safe_set::{
    compute_safety_mask, intersect, sample_connected_states, second_stage, ConnectedState, SafeReachableSet,
    SafetyMask,
};
use crate::scenario::Scenario;

#[derive(Clone, Debug, PartialEq)]
pub struct PrecomputeOptions {
    pub solver: SolverOptions,
    pub allow_reverse: bool,
    /// Tube speed in m/s; the turn-rate bound follows from the vehicle.
    pub speed: f64,
    pub samples: Option<usize>,
    pub seed: u64,
}

impl Default for PrecomputeOptions {
    fn default() -> Self {
        PrecomputeOptions { solver: SolverOptions::default(), allow_reverse: true, speed: 1.0, samples: None, seed: 0 }
    }
}

/// Everything the online layer needs from the offline one.
#[derive(Clone, Debug, PartialEq)]
pub struct Precomputed {
    pub field: ValueField,
    pub mask: SafetyMask,
    pub connected: Vec<ConnectedState>,
    pub seed: u64,
    /// Fewer members than requested passed the sampling predicate.
    pub truncated: bool,
}

impl Precomputed {
    pub fn tube_cells(&self) -> usize {
        self.field.values.iter().filter(|&&v| v <= 0.0).count()
    }

    pub fn safe_reachable(&self) -> SafeReachableSet {
        let brt = as_brt(self.field.clone());
        intersect(&self.mask, &brt).expect("field and mask share a grid")
    }
}

fn as_brt(field: ValueField) -> BrtResult {
    BrtResult { field, horizon: 0.0, converged: true, iterations: 0, checkpoints: vec![] }
}

pub fn precompute(scenario: &Scenario, opts: &PrecomputeOptions) -> Result<Precomputed> {
    let params = DubinsParams::for_vehicle(&scenario.vehicle, opts.speed, opts.allow_reverse);
    let mut brt = solve_brt(&scenario.grid, &scenario.goal_set(), &params, &opts.solver)?;
    let mask = compute_safety_mask(&scenario.grid, &scenario.vehicle, &scenario.obstacles, scenario.margin)?;
    let mut s = intersect(&mask, &brt)?;
    if scenario.two_stage {
        brt = second_stage(&s, &scenario.spot_interior(), &params, &opts.solver)?;
        s = intersect(&mask, &brt)?;
    }
    let count = opts.samples.unwrap_or(scenario.samples);
    let batch = sample_connected_states(&s, &scenario.sampling_predicate, count, opts.seed)?;
    Ok(Precomputed { field: brt.field, mask, connected: batch.states, seed: opts.seed, truncated: batch.truncated })
}
