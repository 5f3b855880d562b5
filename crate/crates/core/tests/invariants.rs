//! Structural properties of solved schedules, checked directly on the
//! solver's assignment and again by the simulator.

use itinera_core::datagen::{gen_inventory, gen_request, GenParams, PresenceProbs};
use itinera_core::milp::{build_model, ModelParams, ObjectiveMode, AIR};
use itinera_core::solver::{check_feasible, solve, SolveStatus, SolverConfig};

#[test]
fn solved_schedules_respect_every_rule() {
    let gen = GenParams {
        rng_seed: 21,
        presence: PresenceProbs::all(0.5),
        ..GenParams::default()
    };
    let mut solved = 0;
    for i in 0..120 {
        let request = gen_request(&gen, i);
        let inventory = gen_inventory(&gen, &request).relevant_to(&request);
        let mode = ObjectiveMode::ALL[i as usize % 3];
        let params = ModelParams::default().with_mode(mode);
        let model = build_model(&request, &inventory, &params).unwrap();
        let result = solve(&model, &SolverConfig::default());
        assert_eq!(result.status, SolveStatus::Optimal, "planted instance {i}");
        let values = result.assignment.unwrap();
        assert_eq!(model.violated(&values).count(), 0);
        let lay = &model.layout;
        let grid = &lay.grid;
        let air = lay.air();
        let at = |t: usize| -> usize {
            let here: Vec<usize> = (0..lay.locations.len())
                .filter(|&l| values[lay.presence[l][t].0])
                .collect();
            assert_eq!(here.len(), 1, "instance {i} slot {t}: locations {here:?}");
            here[0]
        };
        let locs: Vec<usize> = (0..grid.num_slots).map(at).collect();
        assert_eq!(lay.locations[air], AIR);

        for night in &grid.nights {
            let asleep = night
                .slots
                .clone()
                .filter(|&t| values[lay.asleep[t].0])
                .count();
            assert!(
                asleep as u32 >= params.min_sleep_slots,
                "instance {i} night {}",
                night.date
            );
        }
        for t in 0..grid.num_slots - 1 {
            if locs[t] != locs[t + 1] {
                assert!(
                    values[lay.event[t].0],
                    "instance {i}: move at {t} without event"
                );
            }
        }
        let itinerary = model.decode(&values, &request);
        for (k, chosen) in itinerary.chosen_flights.iter().enumerate() {
            let f = inventory.flight(&chosen.flight_id).unwrap();
            let (dep, land) = grid.flight_slots(f).unwrap();
            let origin = lay
                .locations
                .iter()
                .position(|l| l == f.origin.as_str())
                .unwrap();
            let dest = lay
                .locations
                .iter()
                .position(|l| l == f.destination.as_str())
                .unwrap();
            assert_eq!(locs[dep], origin, "instance {i} leg {k}");
            assert!(
                (dep + 1..land).all(|t| locs[t] == air),
                "instance {i} leg {k}"
            );
            assert_eq!(locs[land], dest, "instance {i} leg {k}");
        }
        let stays = request.stays();
        for t in 0..grid.num_slots {
            if !values[lay.asleep[t].0] {
                continue;
            }
            assert_ne!(locs[t], air, "instance {i}: asleep aboard at {t}");
            let covered = itinerary.chosen_hotels.iter().any(|c| {
                let h = inventory.hotel(&c.hotel_id).unwrap();
                lay.locations[locs[t]] == h.city.as_str()
                    && grid.hotel_slots(h, &stays[c.stay]).contains(&t)
            });
            assert!(covered, "instance {i}: asleep at {t} without a hotel");
        }
        let verdict = check_feasible(&itinerary, &request, &inventory, &params);
        assert!(
            verdict.is_feasible(),
            "instance {i}: {:?}",
            verdict.violations
        );
        assert_eq!(Some(verdict.objective), result.objective);
        solved += 1;
    }
    assert_eq!(solved, 120);
}
