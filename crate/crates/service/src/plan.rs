use std::time::Instant;

use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use itinera_core::eval::{corrupt_request, Corruption, CORRUPTIBLE_FIELDS};
use itinera_core::milp::{ModelParams, ObjectiveMode};
use itinera_core::model::{
    long_date, CostBreakdown, FlightOption, HotelOption, Inventory, Itinerary, SymbolicRequest,
};
use itinera_core::pipeline::plan;
use itinera_core::solver::{SolveStatus, SolverConfig};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionStatus {
    Optimal,
    /// The solver stopped early; the itinerary is the best one it found.
    TimeLimit,
    Infeasible,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionError {
    /// HTTP-style code for this option alone.
    pub code: u16,
    pub kind: String,
    pub message: String,
    /// Fields whose removal on its own would make the request feasible.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocking_fields: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OptionStats {
    pub nodes: u64,
    pub propagations: u64,
    pub num_vars: usize,
    pub num_constraints: usize,
    pub build_ms: f64,
    pub load_ms: f64,
    pub solve_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanOption {
    pub status: OptionStatus,
    pub itinerary: Option<Itinerary>,
    pub cost: Option<CostBreakdown>,
    pub objective: Option<i64>,
    /// Booked flights in leg order and hotels in stay order.
    pub flights: Vec<FlightOption>,
    pub hotels: Vec<HotelOption>,
    pub error: Option<OptionError>,
    pub stats: OptionStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    pub min_cost: PlanOption,
    pub better_hotel: PlanOption,
    pub better_flight: PlanOption,
}

impl PlanOptions {
    pub fn get(&self, mode: ObjectiveMode) -> &PlanOption {
        match mode {
            ObjectiveMode::MinCost => &self.min_cost,
            ObjectiveMode::BetterHotel => &self.better_hotel,
            ObjectiveMode::BetterFlight => &self.better_flight,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanTimings {
    pub translate_ms: f64,
    pub solve_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanResponse {
    pub session_id: String,
    pub request_echo: SymbolicRequest,
    pub options: PlanOptions,
    pub timings: PlanTimings,
}

fn failed(code: u16, kind: &str, message: String, stats: OptionStats) -> PlanOption {
    PlanOption {
        status: if kind == "infeasible" {
            OptionStatus::Infeasible
        } else {
            OptionStatus::Failed
        },
        itinerary: None,
        cost: None,
        objective: None,
        flights: Vec::new(),
        hotels: Vec::new(),
        error: Some(OptionError {
            code,
            kind: kind.to_string(),
            message,
            blocking_fields: Vec::new(),
        }),
        stats,
    }
}

fn solve_mode(
    request: &SymbolicRequest,
    inventory: &Inventory,
    params: &ModelParams,
    config: &SolverConfig,
) -> PlanOption {
    let outcome = match plan(request, inventory, params, config) {
        Ok(o) => o,
        Err(e) => return failed(422, "model_error", e.to_string(), OptionStats::default()),
    };
    let stats = OptionStats {
        nodes: outcome.stats.nodes,
        propagations: outcome.stats.propagations,
        num_vars: outcome.num_vars,
        num_constraints: outcome.num_constraints,
        build_ms: outcome.timings.build_ms,
        load_ms: outcome.timings.load_ms,
        solve_ms: outcome.timings.solve_ms,
    };
    let (itinerary, verdict) = match (outcome.status, outcome.itinerary, outcome.verdict) {
        (SolveStatus::Infeasible, _, _) => {
            let msg = "no itinerary satisfies every constraint".to_string();
            return failed(422, "infeasible", msg, stats);
        }
        (_, Some(it), Some(v)) => (it, v),
        _ => {
            let msg = format!(
                "solver stopped after {} ms without finding an itinerary",
                config.time_limit_ms
            );
            return failed(504, "solver_time_limit", msg, stats);
        }
    };
    if !verdict.is_feasible() {
        // Never hand out a plan the simulator rejects.
        let codes: Vec<_> = verdict.violations.iter().map(|v| v.code.as_str()).collect();
        let msg = format!("solver plan failed verification: {}", codes.join(", "));
        return failed(500, "unverified_plan", msg, stats);
    }
    let flights = itinerary
        .chosen_flights
        .iter()
        .filter_map(|c| inventory.flight(&c.flight_id).cloned())
        .collect();
    let hotels = itinerary
        .chosen_hotels
        .iter()
        .filter_map(|c| inventory.hotel(&c.hotel_id).cloned())
        .collect();
    PlanOption {
        status: if outcome.status == SolveStatus::Optimal {
            OptionStatus::Optimal
        } else {
            OptionStatus::TimeLimit
        },
        cost: Some(itinerary.cost.clone()),
        itinerary: Some(itinerary),
        objective: Some(verdict.objective),
        flights,
        hotels,
        error: None,
        stats,
    }
}

/// Explains an infeasible request: missing inventory first, otherwise the
/// constraints that are each enough, on their own, to rule out every plan.
pub fn diagnose_infeasible(
    request: &SymbolicRequest,
    inventory: &Inventory,
    params: &ModelParams,
    config: &SolverConfig,
) -> (String, Vec<String>) {
    let relevant = inventory.relevant_to(request);
    for (k, leg) in request.legs.iter().enumerate() {
        if !relevant.flights.iter().any(|f| f.serves(leg)) {
            return (
                format!(
                    "no flight in the inventory serves leg {} ({} to {} on {})",
                    k + 1,
                    leg.origin,
                    leg.destination,
                    long_date(leg.date)
                ),
                Vec::new(),
            );
        }
    }
    for stay in request.stays() {
        if !relevant.hotels.iter().any(|h| h.city == stay.city) {
            return (
                format!("no hotel in the inventory is in {}", stay.city),
                Vec::new(),
            );
        }
    }
    let mut rng = StdRng::seed_from_u64(0);
    let mut blocking = Vec::new();
    for field in CORRUPTIBLE_FIELDS {
        let Ok(relaxed) = corrupt_request(request, field, &Corruption::Drop, &mut rng) else {
            continue;
        };
        if relaxed == *request {
            continue;
        }
        let feasible = plan(&relaxed, &relevant, params, config)
            .is_ok_and(|o| o.status != SolveStatus::Infeasible);
        if feasible {
            blocking.push(field.to_string());
        }
    }
    let message = if blocking.is_empty() {
        "no itinerary satisfies every constraint; no single constraint is to blame".to_string()
    } else {
        format!(
            "no itinerary satisfies every constraint; relaxing {} would allow one",
            blocking.join(" or ")
        )
    };
    (message, blocking)
}

/// Solves the request under all three objective modes. Modes run in turn
/// unless `parallel` is set. Feasibility does not depend on the mode, so an
/// infeasible request is diagnosed once and the reason shared.
pub fn plan_options(
    request: &SymbolicRequest,
    inventory: &Inventory,
    params: &ModelParams,
    config: &SolverConfig,
    parallel: bool,
) -> (PlanOptions, f64) {
    let started = Instant::now();
    let run = |mode| solve_mode(request, inventory, &params.with_mode(mode), config);
    let mut solved: Vec<PlanOption> = if parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = ObjectiveMode::ALL
                .map(|m| s.spawn(move || run(m)))
                .into_iter()
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("solver thread panicked"))
                .collect()
        })
    } else {
        ObjectiveMode::ALL.into_iter().map(run).collect()
    };
    if solved.iter().any(|o| o.status == OptionStatus::Infeasible) {
        let (message, blocking) = diagnose_infeasible(request, inventory, params, config);
        for o in &mut solved {
            if let Some(e) = o.error.as_mut().filter(|e| e.kind == "infeasible") {
                e.message = message.clone();
                e.blocking_fields = blocking.clone();
            }
        }
    }
    let mut it = solved.into_iter();
    let options = PlanOptions {
        min_cost: it.next().expect("three modes"),
        better_hotel: it.next().expect("three modes"),
        better_flight: it.next().expect("three modes"),
    };
    (options, started.elapsed().as_secs_f64() * 1000.0)
}
