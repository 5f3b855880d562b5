//! The three-city coach round trip end to end.

use itinera_core::datagen::{demo_inventory, demo_request};
use itinera_core::milp::{ModelParams, ObjectiveMode};
use itinera_core::model::{CabinClass, Money};
use itinera_core::nl::{parse_nl, render_nl};
use itinera_core::pipeline::plan;
use itinera_core::solver::{brute_force, SolveStatus, SolverConfig};

#[test]
fn min_cost_plan_meets_every_stated_limit() {
    let request = demo_request();
    let text = render_nl(&request, 0);
    assert_eq!(parse_nl(&text).unwrap(), request);
    for seed in 0..5 {
        let inventory = demo_inventory(seed);
        let params = ModelParams::default();
        let outcome = plan(&request, &inventory, &params, &SolverConfig::default()).unwrap();
        assert_eq!(outcome.status, SolveStatus::Optimal);
        let it = outcome.itinerary.unwrap();
        assert!(outcome.verdict.as_ref().unwrap().is_feasible());
        assert!(it.cost.flight_total <= Money::from_dollars(1383));
        assert!(it.cost.hotel_total <= Money::from_dollars(952));
        assert_eq!(it.chosen_flights.len(), 3);
        for (k, c) in it.chosen_flights.iter().enumerate() {
            let f = inventory.flight(&c.flight_id).unwrap();
            assert!(f.serves(&request.legs[k]));
            assert!(f.is_nonstop && !f.is_basic_economy && !f.is_mixed_cabin);
            assert_eq!(f.cabin_class, CabinClass::Coach);
        }
        for c in &it.chosen_hotels {
            let h = inventory.hotel(&c.hotel_id).unwrap();
            assert!(h.price_per_night <= Money::from_dollars(317));
        }
        // Brute force over the options the request can possibly accept.
        let mut reduced = inventory.relevant_to(&request);
        reduced.flights.retain(|f| {
            f.is_nonstop
                && !f.is_basic_economy
                && !f.is_mixed_cabin
                && f.cabin_class == CabinClass::Coach
                && f.price <= Money::from_dollars(1383)
        });
        reduced
            .hotels
            .retain(|h| h.price_per_night <= Money::from_dollars(317));
        let oracle = brute_force(&request, &reduced, &params, 100_000_000).unwrap();
        assert_eq!(outcome.objective, oracle.best.map(|b| b.1.objective));
    }
}

#[test]
fn three_modes_trade_price_for_comfort() {
    let request = demo_request();
    let inventory = demo_inventory(1);
    let cost = |mode| {
        let params = ModelParams::default().with_mode(mode);
        let o = plan(&request, &inventory, &params, &SolverConfig::default()).unwrap();
        assert_eq!(o.status, SolveStatus::Optimal);
        o.itinerary.unwrap().cost.grand_total
    };
    let cheapest = cost(ObjectiveMode::MinCost);
    assert!(cheapest <= cost(ObjectiveMode::BetterHotel));
    assert!(cheapest <= cost(ObjectiveMode::BetterFlight));
}
