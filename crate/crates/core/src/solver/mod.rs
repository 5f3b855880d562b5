//! Exact optimization of compiled models, plus a brute-force reference.

mod brute;
mod engine;

pub use brute::{brute_force, BruteForceError, BruteForceResult};
pub use engine::LoadedModel;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::milp::{evaluate_cost, MilpModel, ModelParams, Verdict};
use crate::model::{Inventory, Itinerary, SymbolicRequest};

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchOrder {
    /// Selection variables by column index, trying 1 first. Among optimal
    /// solutions the one whose selected columns sort first is returned.
    #[default]
    IndexAscending,
    /// Most expensive selection first, trying 0 first. Same tie-break.
    ObjectiveDescending,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub time_limit_ms: u64,
    pub node_limit: Option<u64>,
    pub branch_order: BranchOrder,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            time_limit_ms: 10_000,
            node_limit: None,
            branch_order: BranchOrder::IndexAscending,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// The time or node limit stopped the search; any assignment returned is
    /// the best found so far.
    TimeLimit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub propagations: u64,
    pub load_ms: f64,
    pub solve_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub assignment: Option<Vec<bool>>,
    pub objective: Option<i64>,
    pub stats: SolveStats,
}

/// Loads `model` into the search engine.
pub fn load(model: &MilpModel) -> (LoadedModel, f64) {
    let started = Instant::now();
    let loaded = LoadedModel::new(model);
    (loaded, started.elapsed().as_secs_f64() * 1000.0)
}

/// Loads and solves `model`.
pub fn solve(model: &MilpModel, config: &SolverConfig) -> SolveResult {
    let (loaded, load_ms) = load(model);
    let mut result = solve_loaded(&loaded, config);
    result.stats.load_ms = load_ms;
    result
}

pub fn solve_loaded(loaded: &LoadedModel, config: &SolverConfig) -> SolveResult {
    let (status, assignment, objective, stats) = loaded.solve(config);
    SolveResult {
        status,
        assignment,
        objective,
        stats,
    }
}

/// Judges an itinerary against every hard rule of the request.
pub fn check_feasible(
    itinerary: &Itinerary,
    request: &SymbolicRequest,
    inventory: &Inventory,
    params: &ModelParams,
) -> Verdict {
    evaluate_cost(itinerary, request, inventory, params)
}
