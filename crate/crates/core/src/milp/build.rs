use std::collections::HashMap;

use thiserror::Error;

use crate::model::{
    ChosenFlight, ChosenHotel, CostBreakdown, FlightOption, HotelOption, Inventory, Itinerary,
    Money, SymbolicRequest,
};

use super::encode::{encode_implication, EncodeError, Literal, Operand};
use super::grid::{build_time_grid, GridError};
use super::model::{
    Family, LinearConstraint, MilpModel, ModelLayout, Sense, VarId, VarRole, Variable,
};
use super::schedule::{Schedule, AIR};
use super::{ModelParams, OBJECTIVE_SCALE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// Hard airline requirements that can be decided per option.
pub(crate) fn flight_violations(
    request: &SymbolicRequest,
    params: &ModelParams,
    f: &FlightOption,
) -> Vec<&'static str> {
    let a = &request.airline;
    let mut out = Vec::new();
    if a.cabin_class.is_some_and(|c| c != f.cabin_class) {
        out.push("airline.cabin_class");
    }
    if a.refundable == Some(true) && !f.refundable {
        out.push("airline.refundable");
    }
    if a.nonstop_only == Some(true) && !f.is_nonstop {
        out.push("airline.nonstop_only");
    }
    if a.must_not_basic_economy == Some(true) && f.is_basic_economy {
        out.push("airline.must_not_basic_economy");
    }
    if a.no_mixed_cabin == Some(true) && f.is_mixed_cabin {
        out.push("airline.no_mixed_cabin");
    }
    if a.avoid_red_eye == Some(true) && params.is_red_eye(f) {
        out.push("airline.avoid_red_eye");
    }
    if a.plane_types
        .as_ref()
        .is_some_and(|s| !s.contains(&f.plane_type))
    {
        out.push("airline.plane_types");
    }
    if a.preferred_airlines
        .as_ref()
        .is_some_and(|s| !s.contains(&f.airline))
    {
        out.push("airline.preferred_airlines");
    }
    out
}

pub(crate) fn hotel_violations(request: &SymbolicRequest, h: &HotelOption) -> Vec<&'static str> {
    let c = &request.hotel;
    let mut out = Vec::new();
    if c.min_rating.is_some_and(|r| h.rating < r) {
        out.push("hotel.min_rating");
    }
    if c.brands.as_ref().is_some_and(|s| !s.contains(&h.brand)) {
        out.push("hotel.brands");
    }
    out
}

/// Drops options that break a per-option hard constraint (cabin, flags,
/// plane types, airlines, rating, brands). Budgets and timing are left to
/// the model.
pub fn prefilter_options(
    request: &SymbolicRequest,
    inventory: &Inventory,
    params: &ModelParams,
) -> Inventory {
    Inventory {
        flights: inventory
            .flights
            .iter()
            .filter(|f| flight_violations(request, params, f).is_empty())
            .cloned()
            .collect(),
        hotels: inventory
            .hotels
            .iter()
            .filter(|h| hotel_violations(request, h).is_empty())
            .cloned()
            .collect(),
    }
}

#[derive(Default)]
struct Builder {
    variables: Vec<Variable>,
    constraints: Vec<LinearConstraint>,
    objective: Vec<i64>,
    var_index: HashMap<String, VarId>,
}

impl Builder {
    fn var(&mut self, name: String, role: VarRole, cost: i64) -> VarId {
        let id = VarId(self.variables.len());
        self.var_index.insert(name.clone(), id);
        self.variables.push(Variable { name, role });
        self.objective.push(cost);
        id
    }

    fn row(
        &mut self,
        name: String,
        family: Family,
        terms: Vec<(VarId, i64)>,
        sense: Sense,
        rhs: i64,
    ) {
        self.constraints.push(LinearConstraint {
            name,
            family,
            terms,
            sense,
            rhs,
        });
    }

    fn implication(
        &mut self,
        name: String,
        family: Family,
        conditions: &[Literal],
        x: Operand,
        y: Operand,
        big_m: i64,
    ) -> Result<(), EncodeError> {
        let rows = encode_implication(&name, family, conditions, x, y, big_m)?;
        self.constraints.extend(rows);
        Ok(())
    }
}

struct FlightCol {
    var: VarId,
    src: usize,
    dst: usize,
    dep: usize,
    land: usize,
    price: Money,
}

struct HotelCol {
    var: VarId,
    city: usize,
    nightly: Money,
    nights: u32,
    coverage: Vec<usize>,
}

/// Compiles `request` over `inventory` into a 0-1 program.
///
/// Only options that serve a leg (flights) or a whole stay (hotels), pass the
/// per-option hard filters and fit on the grid get a column.
pub fn build_model(
    request: &SymbolicRequest,
    inventory: &Inventory,
    params: &ModelParams,
) -> Result<MilpModel, ModelError> {
    params.validate().map_err(ModelError::InvalidParams)?;
    let grid = build_time_grid(
        request,
        params.slot_minutes,
        params.night,
        params.max_span_days,
    )?;
    let n = grid.num_slots;
    let big_m = params.big_m;

    let mut locations: Vec<String> = request.cities().iter().map(|a| a.0.clone()).collect();
    locations.push(AIR.to_string());
    let air = locations.len() - 1;
    let loc_of = |code: &str| locations.iter().position(|l| l == code);

    let mut b = Builder::default();
    let presence: Vec<Vec<VarId>> = locations
        .iter()
        .enumerate()
        .map(|(l, name)| {
            (0..n)
                .map(|t| {
                    b.var(
                        format!("u_{name}_{t}"),
                        VarRole::Presence {
                            location: l,
                            slot: t,
                        },
                        0,
                    )
                })
                .collect()
        })
        .collect();
    let asleep: Vec<VarId> = (0..n)
        .map(|t| b.var(format!("m_{t}"), VarRole::Asleep { slot: t }, 0))
        .collect();
    let event: Vec<VarId> = (0..n)
        .map(|t| b.var(format!("e_{t}"), VarRole::Event { slot: t }, 0))
        .collect();

    let mut leg_flights = vec![Vec::new(); request.legs.len()];
    let mut flights: Vec<Vec<FlightCol>> = (0..request.legs.len()).map(|_| Vec::new()).collect();
    for (k, leg) in request.legs.iter().enumerate() {
        for (j, f) in inventory.flights.iter().enumerate() {
            if !f.serves(leg) || !flight_violations(request, params, f).is_empty() {
                continue;
            }
            let Ok((dep, land)) = grid.flight_slots(f) else {
                continue;
            };
            let var = b.var(
                format!("f{k}_{j}"),
                VarRole::Flight {
                    leg: k,
                    option: j,
                    id: f.id.clone(),
                    price: f.price,
                },
                params.flight_objective(f),
            );
            leg_flights[k].push(var);
            flights[k].push(FlightCol {
                var,
                src: loc_of(leg.origin.as_str()).expect("leg airports are locations"),
                dst: loc_of(leg.destination.as_str()).expect("leg airports are locations"),
                dep,
                land,
                price: f.price,
            });
        }
    }

    let stays = request.stays();
    let mut stay_hotels = vec![Vec::new(); stays.len()];
    let mut hotels: Vec<Vec<HotelCol>> = (0..stays.len()).map(|_| Vec::new()).collect();
    for (s, stay) in stays.iter().enumerate() {
        for (j, h) in inventory.hotels.iter().enumerate() {
            if h.city != stay.city
                || !h.available_for(stay)
                || !hotel_violations(request, h).is_empty()
            {
                continue;
            }
            let var = b.var(
                format!("h{s}_{j}"),
                VarRole::Hotel {
                    stay: s,
                    option: j,
                    id: h.id.clone(),
                    nightly: h.price_per_night,
                    nights: stay.nights,
                },
                params.hotel_objective(h, stay.nights),
            );
            stay_hotels[s].push(var);
            hotels[s].push(HotelCol {
                var,
                city: loc_of(stay.city.as_str()).expect("stay cities are locations"),
                nightly: h.price_per_night,
                nights: stay.nights,
                coverage: grid.hotel_slots(h, stay),
            });
        }
    }

    // Exactly one location per slot.
    for t in 0..n {
        let terms = (0..locations.len()).map(|l| (presence[l][t], 1)).collect();
        b.row(format!("loc_{t}"), Family::Location, terms, Sense::Eq, 1);
    }

    // Minimum sleep per night.
    let min_sleep = i64::from(params.min_sleep_slots);
    for (i, night) in grid.nights.iter().enumerate() {
        let terms = night
            .slots
            .clone()
            .filter(|&t| t < n)
            .map(|t| (asleep[t], 1))
            .collect();
        b.row(
            format!("sleep_{i}"),
            Family::Sleep,
            terms,
            Sense::Ge,
            min_sleep,
        );
    }

    // Location persists unless an event happens: e(t) = 0 => u_l(t+1) = u_l(t).
    for t in 0..n.saturating_sub(1) {
        for l in 0..locations.len() {
            b.implication(
                format!("tele_{}_{t}", locations[l]),
                Family::Teleport,
                &[Literal::neg(event[t])],
                Operand::Var(presence[l][t + 1]),
                Operand::Var(presence[l][t]),
                big_m,
            )?;
        }
    }

    // Events only where a selected flight departs or is about to land.
    let mut event_sources: Vec<Vec<VarId>> = vec![Vec::new(); n];
    for col in flights.iter().flatten() {
        event_sources[col.dep].push(col.var);
        if col.land - 1 != col.dep {
            event_sources[col.land - 1].push(col.var);
        }
    }
    for t in 0..n {
        let mut terms = vec![(event[t], 1)];
        terms.extend(event_sources[t].iter().map(|&v| (v, -1)));
        b.row(format!("event_{t}"), Family::Event, terms, Sense::Le, 0);
    }

    // Flight anchors.
    for (k, cols) in flights.iter().enumerate() {
        for col in cols {
            let z = [Literal::pos(col.var)];
            let name = &b.variables[col.var.0].name.clone();
            let mut anchors = vec![
                ("src", presence[col.src][col.dep]),
                ("air_out", presence[air][col.dep + 1]),
                ("dst", presence[col.dst][col.land]),
            ];
            if col.land - 1 != col.dep + 1 {
                anchors.push(("air_in", presence[air][col.land - 1]));
            }
            anchors.push(("ev_dep", event[col.dep]));
            anchors.push(("ev_land", event[col.land - 1]));
            for (tag, x) in anchors {
                b.implication(
                    format!("{name}_{tag}"),
                    Family::FlightAnchor,
                    &z,
                    Operand::Var(x),
                    Operand::Const(1),
                    big_m,
                )?;
            }
        }
        let terms = cols.iter().map(|c| (c.var, 1)).collect();
        b.row(format!("leg_{k}"), Family::FlightLeg, terms, Sense::Eq, 1);
    }

    // One hotel per stay; sleep only under a selected hotel, in its city.
    let mut covering: Vec<Vec<VarId>> = vec![Vec::new(); n];
    for (s, cols) in hotels.iter().enumerate() {
        let terms = cols.iter().map(|c| (c.var, 1)).collect();
        b.row(format!("stay_{s}"), Family::HotelStay, terms, Sense::Eq, 1);
        for col in cols {
            let name = b.variables[col.var.0].name.clone();
            for &t in &col.coverage {
                covering[t].push(col.var);
                b.implication(
                    format!("{name}_at_{t}"),
                    Family::HotelPresence,
                    &[Literal::pos(col.var), Literal::pos(asleep[t])],
                    Operand::Var(presence[col.city][t]),
                    Operand::Const(1),
                    big_m,
                )?;
            }
        }
    }
    for t in 0..n {
        let mut terms = vec![(asleep[t], 1)];
        terms.extend(covering[t].iter().map(|&v| (v, -1)));
        b.row(
            format!("allow_{t}"),
            Family::HotelAllow,
            terms,
            Sense::Le,
            0,
        );
        b.implication(
            format!("airsleep_{t}"),
            Family::AirSleep,
            &[Literal::pos(asleep[t])],
            Operand::Var(presence[air][t]),
            Operand::Const(0),
            big_m,
        )?;
    }

    // Budgets.
    let flight_terms: Vec<(VarId, i64)> = flights
        .iter()
        .flatten()
        .map(|c| (c.var, c.price.0))
        .collect();
    let hotel_terms: Vec<(VarId, i64)> = hotels
        .iter()
        .flatten()
        .map(|c| (c.var, c.nightly.0 * i64::from(c.nights)))
        .collect();
    if let Some(cap) = request.airline.price_total_max {
        b.row(
            "airline_price_total".into(),
            Family::Budget,
            flight_terms.clone(),
            Sense::Le,
            cap.0,
        );
    }
    if let Some(cap) = request.hotel.total_budget_max {
        b.row(
            "hotel_total".into(),
            Family::Budget,
            hotel_terms.clone(),
            Sense::Le,
            cap.0,
        );
    }
    if let Some(cap) = request.budget.total_budget {
        let mut terms = flight_terms.clone();
        terms.extend(hotel_terms.iter().copied());
        b.row(
            "total_budget".into(),
            Family::Budget,
            terms,
            Sense::Le,
            cap.0,
        );
    }
    for (name, cap) in [
        ("hotel_daily", request.hotel.daily_budget_max),
        ("everyday", request.budget.everyday_budget),
    ] {
        let Some(cap) = cap else { continue };
        for (s, stay) in stays.iter().enumerate() {
            for date in stay.night_dates() {
                let terms = hotels[s].iter().map(|c| (c.var, c.nightly.0)).collect();
                b.row(
                    format!("{name}_{date}"),
                    Family::Budget,
                    terms,
                    Sense::Le,
                    cap.0,
                );
            }
        }
    }

    // Soft windows: an indicator that equals the flight variable carries the penalty.
    for (k, cols) in flights.iter().enumerate() {
        for col in cols {
            let VarRole::Flight { option, .. } = b.variables[col.var.0].role else {
                unreachable!()
            };
            let penalty = params.soft_penalty(request, &inventory.flights[option]);
            if penalty.0 == 0 {
                continue;
            }
            let p = b.var(
                format!("p{k}_{option}"),
                VarRole::Aux {
                    of: col.var,
                    penalty,
                },
                OBJECTIVE_SCALE * penalty.0,
            );
            let name = format!("soft{k}_{option}");
            b.implication(
                name.clone(),
                Family::SoftWindow,
                &[Literal::pos(col.var)],
                Operand::Var(p),
                Operand::Const(1),
                big_m,
            )?;
            b.row(
                format!("{name}_c"),
                Family::SoftWindow,
                vec![(p, 1), (col.var, -1)],
                Sense::Le,
                0,
            );
        }
    }

    Ok(MilpModel {
        variables: b.variables,
        constraints: b.constraints,
        objective: b.objective,
        var_index: b.var_index,
        layout: ModelLayout {
            grid,
            locations,
            presence,
            asleep,
            event,
            leg_flights,
            stay_hotels,
        },
    })
}

impl MilpModel {
    /// Reads selections, timeline and cost off a full assignment.
    pub fn decode(&self, values: &[bool], request: &SymbolicRequest) -> Itinerary {
        let stays = request.stays();
        let mut chosen_flights = Vec::new();
        let mut chosen_hotels = Vec::new();
        let mut cost = CostBreakdown::default();
        for (v, &on) in self.variables.iter().zip(values) {
            if !on {
                continue;
            }
            match &v.role {
                VarRole::Flight { leg, id, price, .. } => {
                    chosen_flights.push(ChosenFlight {
                        leg: *leg,
                        flight_id: id.clone(),
                    });
                    cost.flight_total += *price;
                }
                VarRole::Hotel {
                    stay,
                    id,
                    nightly,
                    nights,
                    ..
                } => {
                    chosen_hotels.push(ChosenHotel {
                        stay: *stay,
                        hotel_id: id.clone(),
                        check_in: stays[*stay].first_night,
                        nights: *nights,
                    });
                    cost.hotel_total += Money(nightly.0 * i64::from(*nights));
                }
                VarRole::Aux { penalty, .. } => cost.soft_penalty += *penalty,
                _ => {}
            }
        }
        chosen_flights.sort_by_key(|c| c.leg);
        chosen_hotels.sort_by_key(|c| c.stay);
        cost.grand_total = cost.flight_total + cost.hotel_total;
        let lay = &self.layout;
        let bits = |ids: &[VarId]| ids.iter().map(|v| values[v.0]).collect::<Vec<_>>();
        let timeline = Schedule {
            slot_minutes: lay.grid.slot_minutes,
            origin: lay.grid.origin,
            locations: lay.locations.clone(),
            presence: lay.presence.iter().map(|row| bits(row)).collect(),
            asleep: bits(&lay.asleep),
            event: bits(&lay.event),
        };
        Itinerary {
            chosen_flights,
            chosen_hotels,
            timeline: Some(timeline),
            cost,
        }
    }

    /// Number of rows that encode common-sense rules (location uniqueness
    /// and nightly sleep).
    pub fn commonsense_rows(&self) -> usize {
        self.count_family(Family::is_commonsense)
    }
}
