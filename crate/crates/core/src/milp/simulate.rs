//! Direct evaluation of an itinerary against a request.
//!
//! Nothing here looks at model rows: the timeline is replayed from the chosen
//! flights and every rule is checked on it. Agreement between this module and
//! the solver is what the equivalence tests measure.

use serde::{Deserialize, Serialize};

use crate::model::{
    CostBreakdown, FlightOption, HotelOption, Inventory, Itinerary, Money, SymbolicRequest,
};

use super::build::{flight_violations, hotel_violations};
use super::grid::{build_time_grid, TimeGrid};
use super::schedule::{Schedule, AIR};
use super::{ModelParams, OBJECTIVE_SCALE};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: String,
    pub message: String,
}

impl Violation {
    fn new(code: &str, message: impl Into<String>) -> Self {
        Violation {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub cost: CostBreakdown,
    /// Objective value under `params.objective_mode`, in model units.
    pub objective: i64,
    pub violations: Vec<Violation>,
    /// Replayed timeline, with sleep in every slot where it is allowed.
    /// Absent when the flights cannot be placed on the grid.
    pub schedule: Option<Schedule>,
}

impl Verdict {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

struct Placed<'a> {
    leg: usize,
    flight: &'a FlightOption,
    dep: usize,
    land: usize,
}

/// Checks every hard rule for `itinerary` and prices it.
///
/// If the itinerary carries a timeline, that timeline is checked as given;
/// otherwise only the selections are judged, and sleep is assumed wherever
/// the rules allow it.
pub fn evaluate_cost(
    itinerary: &Itinerary,
    request: &SymbolicRequest,
    inventory: &Inventory,
    params: &ModelParams,
) -> Verdict {
    let mut v: Vec<Violation> = Vec::new();
    let stays = request.stays();

    // Flights: one per leg, serving it, passing the per-option filters.
    let mut per_leg: Vec<Option<&FlightOption>> = vec![None; request.legs.len()];
    for c in &itinerary.chosen_flights {
        let Some(f) = inventory.flight(&c.flight_id) else {
            v.push(Violation::new(
                "flight.unknown",
                format!("unknown flight {}", c.flight_id),
            ));
            continue;
        };
        let Some(leg) = request.legs.get(c.leg) else {
            v.push(Violation::new(
                "flight.extra",
                format!(
                    "flight {} booked for leg {} which does not exist",
                    f.id,
                    c.leg + 1
                ),
            ));
            continue;
        };
        if per_leg[c.leg].is_some() {
            v.push(Violation::new(
                "flight.duplicate",
                format!("more than one flight for leg {}", c.leg + 1),
            ));
            continue;
        }
        per_leg[c.leg] = Some(f);
        if !f.serves(leg) {
            v.push(Violation::new(
                "flight.route",
                format!(
                    "flight {} does not fly {} -> {} on {}",
                    f.id, leg.origin, leg.destination, leg.date
                ),
            ));
        }
        for code in flight_violations(request, params, f) {
            v.push(Violation::new(
                code,
                format!("flight {} breaks {code}", f.id),
            ));
        }
    }
    for (k, f) in per_leg.iter().enumerate() {
        if f.is_none() {
            v.push(Violation::new(
                "flight.missing",
                format!("missing flight for leg {}", k + 1),
            ));
        }
    }

    // Hotels: one per stay, in the stay city, available for all its nights.
    let mut per_stay: Vec<Option<&HotelOption>> = vec![None; stays.len()];
    for c in &itinerary.chosen_hotels {
        let Some(h) = inventory.hotel(&c.hotel_id) else {
            v.push(Violation::new(
                "hotel.unknown",
                format!("unknown hotel {}", c.hotel_id),
            ));
            continue;
        };
        let Some(stay) = stays.get(c.stay) else {
            v.push(Violation::new(
                "hotel.extra",
                format!(
                    "hotel {} booked for stay {} which does not exist",
                    h.id,
                    c.stay + 1
                ),
            ));
            continue;
        };
        if per_stay[c.stay].is_some() {
            v.push(Violation::new(
                "hotel.duplicate",
                format!("more than one hotel for stay {}", c.stay + 1),
            ));
            continue;
        }
        per_stay[c.stay] = Some(h);
        if h.city != stay.city {
            v.push(Violation::new(
                "hotel.city",
                format!("hotel {} is in {}, stay is in {}", h.id, h.city, stay.city),
            ));
        }
        if c.check_in != stay.first_night || c.nights != stay.nights {
            v.push(Violation::new(
                "hotel.dates",
                format!(
                    "hotel {} booked {} x{} but stay is {} x{}",
                    h.id, c.check_in, c.nights, stay.first_night, stay.nights
                ),
            ));
        }
        if !h.available_for(stay) {
            v.push(Violation::new(
                "hotel.availability",
                format!(
                    "hotel {} is not available for every night of stay {}",
                    h.id,
                    c.stay + 1
                ),
            ));
        }
        for code in hotel_violations(request, h) {
            v.push(Violation::new(
                code,
                format!("hotel {} breaks {code}", h.id),
            ));
        }
    }
    for (s, h) in per_stay.iter().enumerate() {
        if h.is_none() {
            v.push(Violation::new(
                "hotel.missing",
                format!("missing hotel for stay {}", s + 1),
            ));
        }
    }

    // Money.
    let flight_total: Money = per_leg.iter().flatten().map(|f| f.price).sum();
    let hotel_total: Money = per_stay
        .iter()
        .zip(&stays)
        .filter_map(|(h, s)| h.map(|h| Money(h.price_per_night.0 * i64::from(s.nights))))
        .sum();
    let soft_penalty: Money = per_leg
        .iter()
        .flatten()
        .map(|f| params.soft_penalty(request, f))
        .sum();
    let cost = CostBreakdown {
        flight_total,
        hotel_total,
        grand_total: flight_total + hotel_total,
        soft_penalty,
    };
    let objective = per_leg
        .iter()
        .flatten()
        .map(|f| params.flight_objective(f))
        .sum::<i64>()
        + per_stay
            .iter()
            .zip(&stays)
            .filter_map(|(h, s)| h.map(|h| params.hotel_objective(h, s.nights)))
            .sum::<i64>()
        + OBJECTIVE_SCALE * soft_penalty.0;

    let cap_check = |v: &mut Vec<Violation>, code: &str, cap: Option<Money>, spent: Money| {
        if let Some(cap) = cap {
            if spent > cap {
                v.push(Violation::new(
                    code,
                    format!("spends {spent}, cap is {cap}"),
                ));
            }
        }
    };
    cap_check(
        &mut v,
        "airline.price_total_max",
        request.airline.price_total_max,
        flight_total,
    );
    cap_check(
        &mut v,
        "hotel.total_budget_max",
        request.hotel.total_budget_max,
        hotel_total,
    );
    cap_check(
        &mut v,
        "budget.total_budget",
        request.budget.total_budget,
        cost.grand_total,
    );
    for h in per_stay.iter().flatten() {
        cap_check(
            &mut v,
            "hotel.daily_budget_max",
            request.hotel.daily_budget_max,
            h.price_per_night,
        );
        cap_check(
            &mut v,
            "budget.everyday_budget",
            request.budget.everyday_budget,
            h.price_per_night,
        );
    }

    // Timeline.
    let grid = match build_time_grid(
        request,
        params.slot_minutes,
        params.night,
        params.max_span_days,
    ) {
        Ok(g) => g,
        Err(e) => {
            v.push(Violation::new("grid", e.to_string()));
            return Verdict {
                cost,
                objective,
                violations: v,
                schedule: None,
            };
        }
    };
    let mut placed = Vec::new();
    for (k, f) in per_leg.iter().enumerate() {
        let Some(f) = f else { continue };
        match grid.flight_slots(f) {
            Ok((dep, land)) => placed.push(Placed {
                leg: k,
                flight: f,
                dep,
                land,
            }),
            Err(e) => v.push(Violation::new("flight.outside_grid", e.to_string())),
        }
    }
    if placed.len() != request.legs.len() {
        return Verdict {
            cost,
            objective,
            violations: v,
            schedule: None,
        };
    }
    for pair in placed.windows(2) {
        if pair[1].dep < pair[0].land {
            v.push(Violation::new(
                "schedule.overlap",
                format!(
                    "flight for leg {} departs before the flight for leg {} lands",
                    pair[1].leg + 1,
                    pair[0].leg + 1
                ),
            ));
        }
    }

    let mut locations: Vec<String> = request.cities().iter().map(|a| a.0.clone()).collect();
    locations.push(AIR.to_string());
    let air = locations.len() - 1;
    let loc = |code: &str| {
        locations
            .iter()
            .position(|l| l == code)
            .expect("leg airports are locations")
    };

    // Replay: start at the first origin, take each flight in order.
    let n = grid.num_slots;
    let mut at = vec![loc(request.legs[0].origin.as_str()); n];
    let mut event = vec![false; n];
    for p in &placed {
        for slot in at.iter_mut().skip(p.dep + 1).take(p.land - p.dep - 1) {
            *slot = air;
        }
        let dst = loc(p.flight.destination.as_str());
        for slot in at.iter_mut().skip(p.land) {
            *slot = dst;
        }
        event[p.dep] = true;
        event[p.land - 1] = true;
    }

    // Hotel coverage of each slot, as the set of booked hotel cities.
    let mut cover: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, h) in per_stay.iter().enumerate() {
        let Some(h) = h else { continue };
        for t in grid.hotel_slots(h, &stays[s]) {
            cover[t].push(
                locations
                    .iter()
                    .position(|l| *l == h.city.0)
                    .unwrap_or(usize::MAX),
            );
        }
    }
    let may_sleep =
        |t: usize, l: usize| l != air && !cover[t].is_empty() && cover[t].iter().all(|&c| c == l);

    let derived = Schedule {
        slot_minutes: grid.slot_minutes,
        origin: grid.origin,
        locations: locations.clone(),
        presence: (0..locations.len())
            .map(|l| at.iter().map(|&x| x == l).collect())
            .collect(),
        asleep: (0..n).map(|t| may_sleep(t, at[t])).collect(),
        event: event.clone(),
    };

    match &itinerary.timeline {
        None => check_sleep(&mut v, &grid, &derived.asleep, params),
        Some(given) => check_timeline(&mut v, given, &grid, &placed, &locations, &cover, params),
    }

    Verdict {
        cost,
        objective,
        violations: v,
        schedule: Some(derived),
    }
}

fn check_sleep(v: &mut Vec<Violation>, grid: &TimeGrid, asleep: &[bool], params: &ModelParams) {
    for (i, night) in grid.nights.iter().enumerate() {
        let slept = night
            .slots
            .clone()
            .filter(|&t| asleep.get(t) == Some(&true))
            .count();
        if (slept as u32) < params.min_sleep_slots {
            v.push(Violation::new(
                "commonsense.sleep",
                format!(
                    "night {} ({}) has {slept} sleep slots, need {}",
                    i + 1,
                    night.date,
                    params.min_sleep_slots
                ),
            ));
        }
    }
}

fn check_timeline(
    v: &mut Vec<Violation>,
    given: &Schedule,
    grid: &TimeGrid,
    placed: &[Placed<'_>],
    locations: &[String],
    cover: &[Vec<usize>],
    params: &ModelParams,
) {
    let n = grid.num_slots;
    let shape_ok = given.locations == locations
        && given.presence.len() == locations.len()
        && given.presence.iter().all(|r| r.len() == n)
        && given.asleep.len() == n
        && given.event.len() == n;
    if !shape_ok {
        v.push(Violation::new(
            "schedule.shape",
            "timeline does not match the trip grid",
        ));
        return;
    }
    let air = locations.len() - 1;
    let mut at = vec![None; n];
    for (t, slot) in at.iter_mut().enumerate() {
        *slot = given.location_at(t);
        if slot.is_none() {
            v.push(Violation::new(
                "commonsense.location",
                format!("slot {t} is not in exactly one location"),
            ));
        }
    }
    let mut event_slots = vec![false; n];
    for p in placed {
        event_slots[p.dep] = true;
        event_slots[p.land - 1] = true;
    }
    for t in 0..n {
        if given.event[t] && !event_slots[t] {
            v.push(Violation::new(
                "schedule.event",
                format!("event at slot {t} without a flight"),
            ));
        }
        if t + 1 < n && !given.event[t] && at[t] != at[t + 1] {
            v.push(Violation::new(
                "schedule.teleport",
                format!("location changes after slot {t} without an event"),
            ));
        }
    }
    for p in placed {
        let src = locations.iter().position(|l| *l == p.flight.origin.0);
        let dst = locations.iter().position(|l| *l == p.flight.destination.0);
        let ok = at[p.dep] == src
            && at[p.dep + 1] == Some(air)
            && at[p.land - 1] == Some(air)
            && at[p.land] == dst
            && given.event[p.dep]
            && given.event[p.land - 1];
        if !ok {
            v.push(Violation::new(
                "schedule.anchor",
                format!("timeline does not follow the flight for leg {}", p.leg + 1),
            ));
        }
    }
    for t in 0..n {
        if !given.asleep[t] {
            continue;
        }
        let allowed = at[t]
            .is_some_and(|l| l != air && !cover[t].is_empty() && cover[t].iter().all(|&c| c == l));
        if !allowed {
            v.push(Violation::new(
                "schedule.sleep_location",
                format!("asleep at slot {t} outside a booked hotel"),
            ));
        }
    }
    check_sleep(v, grid, &given.asleep, params);
}
