//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every criterion reports even when an
//! earlier one fails. The process exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use itinera_core::datagen::{
    demo_inventory, demo_request, gen_dataset, gen_inventory, gen_request, GenParams, IntRange,
    PresenceProbs,
};
use itinera_core::eval::{
    corrupt_request, dominant_error_mix, evaluate_corpus, mean_std, CorruptingTranslator,
    Corruption,
};
use itinera_core::milp::{
    build_model, encode_implication, Family, Literal, ModelParams, ObjectiveMode, Operand, VarId,
    AIR,
};
use itinera_core::model::{exact_match, field_leaves, CabinClass, Money, SymbolicRequest};
use itinera_core::nl::{
    render_nl, render_nl_variant, TemplateTranslator, Translator, NUM_VARIANTS,
};
use itinera_core::pipeline::plan;
use itinera_core::solver::{brute_force, check_feasible, solve, SolveStatus, SolverConfig};
use itinera_service::{run, AppState, ServiceConfig};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_params(seed: u64, presence: f64) -> GenParams {
    GenParams {
        rng_seed: seed,
        one_way_fraction: 0.0,
        three_city_fraction: 0.5,
        stay_nights: IntRange::new(1, 2),
        flights_per_leg: IntRange::new(2, 8),
        hotels_per_city: IntRange::new(2, 6),
        presence: PresenceProbs::all(presence),
        ..GenParams::default()
    }
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let config = SolverConfig::default();
    let mut cases = Vec::new();
    for (seed, presence) in [(101, 0.4), (202, 0.6), (303, 0.9)] {
        for i in 0..150 {
            cases.push((oracle_params(seed, presence), i, false));
        }
    }
    // Unplanted hotels: a share of these have no itinerary at all.
    for i in 0..80 {
        cases.push((oracle_params(404, 0.9), i, true));
    }
    let (mut optimal, mut infeasible, mut max_slots) = (0, 0, 0);
    for (k, (gen, i, swap_hotels)) in cases.iter().enumerate() {
        let request = gen_request(gen, *i);
        let mut inventory = gen_inventory(gen, &request);
        if *swap_hotels {
            let other = gen_request(gen, i + 10_000);
            let city = request.cities()[1].clone();
            inventory.hotels = gen_inventory(gen, &other)
                .hotels
                .into_iter()
                .map(|mut h| {
                    h.city = city.clone();
                    h
                })
                .collect();
        }
        let relevant = inventory.relevant_to(&request);
        ensure(request.legs.len() >= 2 && request.legs.len() <= 3, || {
            format!("case {k}: {} legs", request.legs.len())
        })?;
        let params = ModelParams::default().with_mode(ObjectiveMode::ALL[k % 3]);
        let model = build_model(&request, &relevant, &params).map_err(|e| e.to_string())?;
        max_slots = max_slots.max(model.layout.grid.num_slots);
        ensure(model.layout.grid.num_slots <= 120, || {
            format!("case {k}: T > 120")
        })?;
        let result = solve(&model, &config);
        let oracle = brute_force(&request, &relevant, &params, 10_000_000)
            .map_err(|e| format!("case {k}: {e}"))?;
        match (result.status, &oracle.best) {
            (SolveStatus::Optimal, Some((_, v))) => {
                ensure(result.objective == Some(v.objective), || {
                    format!(
                        "case {k}: solver {:?} vs oracle {}",
                        result.objective, v.objective
                    )
                })?;
                optimal += 1;
            }
            (SolveStatus::Infeasible, None) => infeasible += 1,
            (s, b) => {
                return Err(format!(
                    "case {k}: solver {s:?}, oracle feasible {}",
                    b.is_some()
                ))
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "{} instances agree ({optimal} optimal, {infeasible} infeasible, T <= {max_slots}) in {secs:.1} s",
        cases.len()
    ))
}

fn big_m_truth_tables() -> Outcome {
    let mut checked = 0u64;
    for k in 1..=3usize {
        let x = VarId(k);
        let y = VarId(k + 1);
        for big_m in [1, 2, 5] {
            for signs in 0..1u32 << k {
                let lits: Vec<Literal> = (0..k)
                    .map(|i| {
                        if signs >> i & 1 == 1 {
                            Literal::neg(VarId(i))
                        } else {
                            Literal::pos(VarId(i))
                        }
                    })
                    .collect();
                for rhs in [Operand::Var(y), Operand::Const(0), Operand::Const(1)] {
                    let rows = encode_implication(
                        "a",
                        Family::Teleport,
                        &lits,
                        Operand::Var(x),
                        rhs,
                        big_m,
                    )
                    .map_err(|e| e.to_string())?;
                    for mask in 0..1u32 << (k + 2) {
                        let v: Vec<bool> = (0..k + 2).map(|i| mask >> i & 1 == 1).collect();
                        let cond = (0..k).all(|i| v[i] != (signs >> i & 1 == 1));
                        let target = match rhs {
                            Operand::Var(_) => i64::from(v[k + 1]),
                            Operand::Const(c) => c,
                        };
                        let implied = !cond || i64::from(v[k]) == target;
                        let admitted = rows.iter().all(|r| r.is_satisfied(&v));
                        ensure(implied == admitted, || {
                            format!("k={k} M={big_m} signs={signs:b} rhs={rhs:?} v={v:?}")
                        })?;
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(format!(
        "{checked} assignments match the implication exactly"
    ))
}

fn round_trip() -> Outcome {
    let count = 10_000u64;
    let sets = [
        GenParams {
            rng_seed: 1,
            ..GenParams::default()
        },
        GenParams {
            rng_seed: 2,
            presence: PresenceProbs::all(0.5),
            ..GenParams::default()
        },
        GenParams {
            rng_seed: 3,
            presence: PresenceProbs::all(1.0),
            ..GenParams::default()
        },
    ];
    let per_set = count.div_ceil(sets.len() as u64);
    let requests: Vec<SymbolicRequest> = sets
        .iter()
        .flat_map(|g| (0..per_set).map(move |i| gen_request(g, i)))
        .collect();
    let (exact, valid, total) = requests
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut texts: Vec<String> =
                (0..NUM_VARIANTS).map(|k| render_nl_variant(r, k)).collect();
            texts.push(render_nl(r, i as u64 + 1));
            let (mut e, mut v) = (0u64, 0u64);
            for t in &texts {
                if let Ok(tr) = TemplateTranslator.translate(t) {
                    v += u64::from(tr.valid_json);
                    e += u64::from(exact_match(r, &tr.request).is_match);
                }
            }
            (e, v, texts.len() as u64)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let em = exact as f64 / total as f64;
    let vr = valid as f64 / total as f64;
    ensure(exact == total && valid == total, || {
        format!("EM {em:.4}, valid {vr:.4} over {total} texts")
    })?;
    Ok(format!(
        "{} requests x {} renderings: EM {em:.3}, valid {vr:.3}",
        requests.len(),
        NUM_VARIANTS + 1
    ))
}

fn quality_mechanics() -> Outcome {
    let gen = GenParams {
        rng_seed: 31,
        presence: PresenceProbs::all(0.5),
        stay_nights: IntRange::new(1, 3),
        ..GenParams::default()
    };
    let records = gen_dataset(&gen, 400, None);
    let params = ModelParams::default();
    let config = SolverConfig::default();
    let translator = CorruptingTranslator {
        rate: 0.5,
        mix: dominant_error_mix(),
        seed: 8,
    };
    let report = evaluate_corpus(&records, &translator, 8, &params, &config);
    ensure(report.failures == 0, || {
        format!("{} records failed", report.failures)
    })?;
    let (mut em_records, mut zeros) = (0, 0);
    for (rec, res) in records.iter().zip(&report.records) {
        let score = res.score.ok_or_else(|| format!("{}: no score", rec.id))?;
        ensure((0.0..=1.0).contains(&score), || {
            format!("{}: score {score}", rec.id)
        })?;
        let estimate = translator
            .translate(&rec.nl_text)
            .map_err(|e| e.to_string())?
            .request;
        if exact_match(&rec.request, &estimate).is_match {
            ensure(score == 1.0, || format!("{}: EM but score {score}", rec.id))?;
            em_records += 1;
            continue;
        }
        let outcome =
            plan(&estimate, &rec.inventory, &params, &config).map_err(|e| e.to_string())?;
        let rejected = match outcome.itinerary {
            None => true,
            Some(it) => !check_feasible(
                &it.selections_only(),
                &rec.request,
                &rec.inventory.relevant_to(&rec.request),
                &params,
            )
            .is_feasible(),
        };
        ensure((score == 0.0) == rejected, || {
            format!("{}: score {score} but rejected={rejected}", rec.id)
        })?;
        zeros += usize::from(rejected);
    }
    // Eight contiguous subsets, mean and sample std of their mean scores.
    let n = records.len();
    let subset_means: Vec<f64> = (0..8)
        .map(|s| {
            let (a, b) = (s * n / 8, (s + 1) * n / 8);
            report.records[a..b]
                .iter()
                .filter_map(|r| r.score)
                .sum::<f64>()
                / (b - a) as f64
        })
        .collect();
    ensure(report.subset_scores.len() == 8, || "subset count".into())?;
    for (got, want) in report.subset_scores.iter().zip(&subset_means) {
        ensure((got - want).abs() < 1e-12, || {
            format!("subset mean {got} vs {want}")
        })?;
    }
    let m = subset_means.iter().sum::<f64>() / 8.0;
    let sd = (subset_means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 7.0).sqrt();
    ensure((report.score_mean.unwrap() - m).abs() < 1e-12, || {
        "mean".into()
    })?;
    ensure((report.score_std.unwrap() - sd).abs() < 1e-12, || {
        "std".into()
    })?;
    ensure(mean_std(&subset_means).is_some(), || "mean_std".into())?;
    let clean = evaluate_corpus(&records[..80], &TemplateTranslator, 8, &params, &config);
    ensure(
        clean.score_mean == Some(1.0) && clean.em_accuracy == Some(1.0),
        || "template corpus is not exact".into(),
    )?;
    Ok(format!(
        "{n} records: {em_records} EM score 1.0, {zeros} rejected score 0, score {m:.3} ± {sd:.3} over 8 subsets"
    ))
}

fn constraint_invariants() -> Outcome {
    let gen = GenParams {
        rng_seed: 41,
        presence: PresenceProbs::all(0.5),
        ..GenParams::default()
    };
    let config = SolverConfig::default();
    let count = 300u64;
    for i in 0..count {
        let request = gen_request(&gen, i);
        let inventory = gen_inventory(&gen, &request).relevant_to(&request);
        let params = ModelParams::default().with_mode(ObjectiveMode::ALL[i as usize % 3]);
        let model = build_model(&request, &inventory, &params).map_err(|e| e.to_string())?;
        let result = solve(&model, &config);
        ensure(result.status == SolveStatus::Optimal, || {
            format!("{i}: {:?}", result.status)
        })?;
        let values = result.assignment.expect("optimal has an assignment");
        ensure(model.violated(&values).next().is_none(), || {
            format!("{i}: row violated")
        })?;
        let lay = &model.layout;
        let grid = &lay.grid;
        let air = lay.air();
        ensure(lay.locations[air] == AIR, || "air index".into())?;
        let mut locs = Vec::with_capacity(grid.num_slots);
        for t in 0..grid.num_slots {
            let here: Vec<usize> = (0..lay.locations.len())
                .filter(|&l| values[lay.presence[l][t].0])
                .collect();
            ensure(here.len() == 1, || {
                format!("{i} slot {t}: {} locations", here.len())
            })?;
            locs.push(here[0]);
        }
        for night in &grid.nights {
            let asleep = night
                .slots
                .clone()
                .filter(|&t| values[lay.asleep[t].0])
                .count();
            ensure(asleep as u32 >= params.min_sleep_slots, || {
                format!("{i}: {asleep} sleep slots on {}", night.date)
            })?;
        }
        for t in 0..grid.num_slots - 1 {
            ensure(locs[t] == locs[t + 1] || values[lay.event[t].0], || {
                format!("{i}: move at {t} without an event")
            })?;
        }
        let itinerary = model.decode(&values, &request);
        for chosen in &itinerary.chosen_flights {
            let f = inventory.flight(&chosen.flight_id).expect("decoded");
            let (dep, land) = grid.flight_slots(f).map_err(|e| e.to_string())?;
            let pos = |code: &str| lay.locations.iter().position(|l| l == code);
            ensure(Some(locs[dep]) == pos(f.origin.as_str()), || {
                format!("{i}: not at origin")
            })?;
            ensure((dep + 1..land).all(|t| locs[t] == air), || {
                format!("{i}: not airborne")
            })?;
            ensure(Some(locs[land]) == pos(f.destination.as_str()), || {
                format!("{i}: not at destination")
            })?;
        }
        let stays = request.stays();
        for t in (0..grid.num_slots).filter(|&t| values[lay.asleep[t].0]) {
            let covered = itinerary.chosen_hotels.iter().any(|c| {
                let h = inventory.hotel(&c.hotel_id).expect("decoded");
                lay.locations[locs[t]] == h.city.as_str()
                    && grid.hotel_slots(h, &stays[c.stay]).contains(&t)
            });
            ensure(covered, || format!("{i}: asleep at {t} without a hotel"))?;
        }
        let verdict = check_feasible(&itinerary, &request, &inventory, &params);
        ensure(verdict.is_feasible(), || {
            format!("{i}: {:?}", verdict.violations)
        })?;
    }
    Ok(format!("{count} solved instances, zero violations"))
}

/// Starts the service in-process on a free port and returns its base URL.
fn start_service(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("inventory.json");
    std::fs::write(&path, serde_json::to_string(&demo_inventory(0)).unwrap()).unwrap();
    let state = AppState::prepare(ServiceConfig {
        dataset_path: path,
        ..ServiceConfig::default()
    })
    .unwrap();
    let (tx, rx) = mpsc::channel::<SocketAddr>();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            let _ = run(listener, state).await;
        });
    });
    format!("http://{}", rx.recv().unwrap())
}

fn timing() -> Outcome {
    let request = demo_request();
    let inventory = demo_inventory(0);
    let relevant = inventory.relevant_to(&request);
    let hotels = relevant.hotels.len();
    let flights = relevant.flights.len();
    let mut worst: f64 = 0.0;
    for mode in ObjectiveMode::ALL {
        let params = ModelParams::default().with_mode(mode);
        let o = plan(&request, &inventory, &params, &SolverConfig::default())
            .map_err(|e| e.to_string())?;
        ensure(o.status == SolveStatus::Optimal, || {
            format!("{mode:?}: {:?}", o.status)
        })?;
        worst = worst.max(o.timings.build_ms + o.timings.load_ms + o.timings.solve_ms);
    }
    ensure(worst <= 2000.0, || {
        format!("load + solve took {worst:.1} ms")
    })?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = start_service(&dir);
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .build()
        .into();
    let deadline = Instant::now() + Duration::from_secs(30);
    loop {
        if let Ok(mut r) = agent.get(format!("{base}/health")).call() {
            let h: Value = r.body_mut().read_json().map_err(|e| e.to_string())?;
            if h["status"] == "ok" {
                break;
            }
        }
        ensure(Instant::now() < deadline, || {
            "service never became healthy".into()
        })?;
        std::thread::sleep(Duration::from_millis(20));
    }
    let started = Instant::now();
    let mut resp = agent
        .post(format!("{base}/plan"))
        .send_json(json!({ "text": render_nl(&request, 0) }))
        .map_err(|e| e.to_string())?;
    let wall = started.elapsed().as_secs_f64() * 1000.0;
    let body: Value = resp.body_mut().read_json().map_err(|e| e.to_string())?;
    ensure(resp.status().as_u16() == 200, || {
        format!("/plan returned {}", resp.status())
    })?;
    ensure(wall <= 5000.0, || format!("/plan took {wall:.1} ms"))?;
    for m in ObjectiveMode::ALL {
        ensure(body["options"][m.key()]["status"] == "optimal", || {
            format!("/plan {}: {}", m.key(), body["options"][m.key()]["status"])
        })?;
    }
    Ok(format!(
        "{flights} flights, {hotels} hotels: build+load+solve <= {worst:.1} ms per mode, /plan {wall:.1} ms"
    ))
}

fn appendix_example() -> Outcome {
    let request = demo_request();
    let params = ModelParams::default();
    let mut totals = Vec::new();
    for seed in 0..5 {
        let inventory = demo_inventory(seed);
        // An acceptable combination must exist: brute force over the
        // options that meet every per-option limit.
        let mut reduced = inventory.relevant_to(&request);
        reduced.flights.retain(|f| {
            f.is_nonstop
                && !f.is_basic_economy
                && !f.is_mixed_cabin
                && f.cabin_class == CabinClass::Coach
        });
        reduced
            .hotels
            .retain(|h| h.price_per_night <= Money::from_dollars(317));
        let oracle =
            brute_force(&request, &reduced, &params, 50_000_000).map_err(|e| e.to_string())?;
        let (_, best) = oracle
            .best
            .ok_or_else(|| format!("seed {seed}: no acceptable combination"))?;

        let o = plan(&request, &inventory, &params, &SolverConfig::default())
            .map_err(|e| e.to_string())?;
        ensure(o.status == SolveStatus::Optimal, || {
            format!("seed {seed}: {:?}", o.status)
        })?;
        let it = o.itinerary.expect("optimal");
        ensure(o.objective == Some(best.objective), || {
            format!("seed {seed}: not the optimum")
        })?;
        let c = &it.cost;
        ensure(c.flight_total <= Money::from_dollars(1383), || {
            format!("flights {}", c.flight_total)
        })?;
        ensure(c.hotel_total <= Money::from_dollars(952), || {
            format!("hotels {}", c.hotel_total)
        })?;
        ensure(it.chosen_flights.len() == 3, || "one flight per leg".into())?;
        for (k, ch) in it.chosen_flights.iter().enumerate() {
            let f = inventory.flight(&ch.flight_id).expect("decoded");
            ensure(ch.leg == k && f.serves(&request.legs[k]), || {
                format!("leg {k}")
            })?;
            ensure(
                f.is_nonstop
                    && !f.is_basic_economy
                    && !f.is_mixed_cabin
                    && f.cabin_class == CabinClass::Coach,
                || format!("seed {seed}: flight {} breaks a flight rule", f.id),
            )?;
        }
        for ch in &it.chosen_hotels {
            let h = inventory.hotel(&ch.hotel_id).expect("decoded");
            ensure(h.price_per_night <= Money::from_dollars(317), || {
                format!("hotel {} at {}", h.id, h.price_per_night)
            })?;
        }
        totals.push(c.grand_total.to_string());
    }
    Ok(format!(
        "5 inventories, min-cost totals {}",
        totals.join(", ")
    ))
}

fn monotonicity() -> Outcome {
    let gen = GenParams {
        rng_seed: 51,
        presence: PresenceProbs::all(0.6),
        stay_nights: IntRange::new(1, 3),
        ..GenParams::default()
    };
    let config = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    let mut checked = 0;
    let mut fields_seen = BTreeMap::<String, usize>::new();
    for i in 0..240u64 {
        let r = gen_request(&gen, i);
        let optional: Vec<String> = field_leaves(&r)
            .into_keys()
            .filter(|k| !k.starts_with("legs") && k != "trip_kind")
            .collect();
        let Some(field) = optional.choose(&mut rng) else {
            continue;
        };
        let relaxed =
            corrupt_request(&r, field, &Corruption::Drop, &mut rng).map_err(|e| e.to_string())?;
        let inv = gen_inventory(&gen, &r);
        let params = ModelParams::default().with_mode(ObjectiveMode::ALL[i as usize % 3]);
        let tight = brute_force(&r, &inv, &params, 10_000_000).map_err(|e| e.to_string())?;
        let loose = brute_force(&relaxed, &inv, &params, 10_000_000).map_err(|e| e.to_string())?;
        let tight = tight
            .best
            .ok_or_else(|| format!("{i}: planted instance infeasible"))?
            .1;
        let loose = loose
            .best
            .ok_or_else(|| format!("{i}: relaxation infeasible"))?
            .1;
        ensure(loose.objective <= tight.objective, || {
            format!(
                "{i}: dropping {field} raised {} to {}",
                tight.objective, loose.objective
            )
        })?;
        let a = plan(&r, &inv, &params, &config).map_err(|e| e.to_string())?;
        let b = plan(&relaxed, &inv, &params, &config).map_err(|e| e.to_string())?;
        ensure(
            a.objective == Some(tight.objective) && b.objective == Some(loose.objective),
            || format!("{i}: solver disagrees with the oracle"),
        )?;
        *fields_seen.entry(field.clone()).or_default() += 1;
        checked += 1;
    }
    ensure(checked >= 200, || format!("only {checked} instances"))?;
    Ok(format!(
        "{checked} instances, {} distinct fields dropped, never worse",
        fields_seen.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("big-M truth tables", big_m_truth_tables),
        ("round-trip exact match", round_trip),
        ("quality-ratio mechanics", quality_mechanics),
        ("constraint invariants", constraint_invariants),
        ("timing", timing),
        ("three-city coach example", appendix_example),
        ("monotonicity", monotonicity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>())));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
