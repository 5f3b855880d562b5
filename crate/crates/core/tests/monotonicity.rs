//! Removing a constraint never makes the optimum worse.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use itinera_core::datagen::{gen_inventory, gen_request, GenParams, IntRange, PresenceProbs};
use itinera_core::eval::{corrupt_request, Corruption};
use itinera_core::milp::{ModelParams, ObjectiveMode};
use itinera_core::model::field_leaves;
use itinera_core::pipeline::plan;
use itinera_core::solver::{brute_force, SolveStatus, SolverConfig};

#[test]
fn dropping_a_constraint_never_raises_the_optimum() {
    let gen = GenParams {
        rng_seed: 17,
        presence: PresenceProbs::all(0.6),
        stay_nights: IntRange::new(1, 3),
        ..GenParams::default()
    };
    let config = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for i in 0..260u64 {
        let r = gen_request(&gen, i);
        let fields: Vec<String> = field_leaves(&r)
            .into_keys()
            .filter(|k| !k.starts_with("legs") && k != "trip_kind")
            .collect();
        let Some(field) = fields.choose(&mut rng) else {
            continue;
        };
        let relaxed = corrupt_request(&r, field, &Corruption::Drop, &mut rng).unwrap();
        let inv = gen_inventory(&gen, &r);
        let params = ModelParams::default().with_mode(ObjectiveMode::ALL[i as usize % 3]);

        let tight = brute_force(&r, &inv, &params, 10_000_000).unwrap();
        let loose = brute_force(&relaxed, &inv, &params, 10_000_000).unwrap();
        let (_, tight_v) = tight.best.expect("planted instance is feasible");
        let (_, loose_v) = loose.best.expect("relaxation of a feasible instance");
        assert!(
            loose_v.objective <= tight_v.objective,
            "index {i} field {field}: {} > {}",
            loose_v.objective,
            tight_v.objective
        );

        let a = plan(&r, &inv, &params, &config).unwrap();
        let b = plan(&relaxed, &inv, &params, &config).unwrap();
        assert_eq!(a.status, SolveStatus::Optimal);
        assert_eq!(b.status, SolveStatus::Optimal);
        assert_eq!(a.objective, Some(tight_v.objective));
        assert_eq!(b.objective, Some(loose_v.objective));
        checked += 1;
    }
    assert!(
        checked >= 200,
        "only {checked} instances had a constraint to drop"
    );
}
