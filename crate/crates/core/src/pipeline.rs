//! Request plus inventory in, optimal itinerary out.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::milp::{build_model, evaluate_cost, ModelError, ModelParams, Verdict};
use crate::model::{Inventory, Itinerary, SymbolicRequest};
use crate::solver::{load, solve_loaded, SolveStats, SolveStatus, SolverConfig};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanTimings {
    pub build_ms: f64,
    pub load_ms: f64,
    pub solve_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub status: SolveStatus,
    pub itinerary: Option<Itinerary>,
    /// Model objective of the returned itinerary.
    pub objective: Option<i64>,
    /// Independent check of the returned itinerary.
    pub verdict: Option<Verdict>,
    pub stats: SolveStats,
    pub timings: PlanTimings,
    pub num_vars: usize,
    pub num_constraints: usize,
}

/// Builds, loads and solves the model, decodes the best assignment and
/// re-checks it with the simulator.
pub fn plan(
    request: &SymbolicRequest,
    inventory: &Inventory,
    params: &ModelParams,
    config: &SolverConfig,
) -> Result<PlanOutcome, ModelError> {
    let started = Instant::now();
    let relevant = inventory.relevant_to(request);
    let model = build_model(request, &relevant, params)?;
    let build_ms = started.elapsed().as_secs_f64() * 1000.0;

    let (loaded, load_ms) = load(&model);
    let result = solve_loaded(&loaded, config);
    let itinerary = result
        .assignment
        .as_ref()
        .map(|values| model.decode(values, request));
    let verdict = itinerary
        .as_ref()
        .map(|it| evaluate_cost(it, request, &relevant, params));
    let mut stats = result.stats;
    stats.load_ms = load_ms;
    Ok(PlanOutcome {
        status: result.status,
        itinerary,
        objective: result.objective,
        verdict,
        timings: PlanTimings {
            build_ms,
            load_ms,
            solve_ms: stats.solve_ms,
        },
        stats,
        num_vars: model.num_vars(),
        num_constraints: model.constraints.len(),
    })
}
