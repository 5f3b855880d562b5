//! Exhaustive reference search: every combination of one serving flight per
//! leg and one same-city hotel per stay, judged by the simulator.

use thiserror::Error;

use crate::milp::{evaluate_cost, ModelParams, Verdict};
use crate::model::{ChosenFlight, ChosenHotel, Inventory, Itinerary, SymbolicRequest};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BruteForceError {
    #[error("{combinations} combinations exceed the cap of {cap}")]
    CapExceeded { combinations: u128, cap: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForceResult {
    /// Cheapest feasible itinerary with its verdict, if any exists.
    pub best: Option<(Itinerary, Verdict)>,
    pub combinations: u64,
    pub feasible: u64,
}

pub fn brute_force(
    request: &SymbolicRequest,
    inventory: &Inventory,
    params: &ModelParams,
    cap: u64,
) -> Result<BruteForceResult, BruteForceError> {
    let stays = request.stays();
    let flight_choices: Vec<Vec<&str>> = request
        .legs
        .iter()
        .map(|leg| {
            inventory
                .flights
                .iter()
                .filter(|f| f.serves(leg))
                .map(|f| f.id.as_str())
                .collect()
        })
        .collect();
    let hotel_choices: Vec<Vec<&str>> = stays
        .iter()
        .map(|s| {
            inventory
                .hotels
                .iter()
                .filter(|h| h.city == s.city)
                .map(|h| h.id.as_str())
                .collect()
        })
        .collect();
    let dims: Vec<usize> = flight_choices
        .iter()
        .chain(&hotel_choices)
        .map(|c| c.len())
        .collect();
    let combinations: u128 = dims.iter().map(|&d| d as u128).product();
    if combinations > u128::from(cap) {
        return Err(BruteForceError::CapExceeded { combinations, cap });
    }
    let mut result = BruteForceResult {
        best: None,
        combinations: combinations as u64,
        feasible: 0,
    };
    if combinations == 0 {
        return Ok(result);
    }

    let legs = flight_choices.len();
    let mut digits = vec![0usize; dims.len()];
    loop {
        let itinerary = Itinerary {
            chosen_flights: (0..legs)
                .map(|k| ChosenFlight {
                    leg: k,
                    flight_id: flight_choices[k][digits[k]].to_string(),
                })
                .collect(),
            chosen_hotels: stays
                .iter()
                .enumerate()
                .map(|(s, stay)| ChosenHotel {
                    stay: s,
                    hotel_id: hotel_choices[s][digits[legs + s]].to_string(),
                    check_in: stay.first_night,
                    nights: stay.nights,
                })
                .collect(),
            ..Itinerary::empty()
        };
        let verdict = evaluate_cost(&itinerary, request, inventory, params);
        if verdict.is_feasible() {
            result.feasible += 1;
            let improves = result
                .best
                .as_ref()
                .is_none_or(|(_, b)| verdict.objective < b.objective);
            if improves {
                let itinerary = Itinerary {
                    cost: verdict.cost,
                    ..itinerary
                };
                result.best = Some((itinerary, verdict));
            }
        }
        // Odometer increment, last digit fastest.
        let mut i = dims.len();
        loop {
            if i == 0 {
                return Ok(result);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < dims[i] {
                break;
            }
            digits[i] = 0;
        }
    }
}
