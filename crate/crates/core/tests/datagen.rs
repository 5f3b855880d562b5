//! Generator distribution, determinism and planted feasibility.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use itinera_core::datagen::{
    gen_dataset, gen_inventory, gen_record, gen_request, replicate_dates, BaseFlightTable,
    GenParams, PresenceProbs,
};
use itinera_core::milp::ModelParams;
use itinera_core::model::{field_leaves, serialize_request, DateRange, TripKind};
use itinera_core::solver::brute_force;

#[test]
fn requests_are_deterministic_and_valid() {
    let p = GenParams::default();
    for i in 0..500 {
        let a = gen_request(&p, i);
        assert_eq!(
            serialize_request(&a),
            serialize_request(&gen_request(&p, i))
        );
        a.validate().unwrap();
        assert!(p.date_horizon.contains(a.first_date()) && p.date_horizon.contains(a.last_date()));
    }
    let other = GenParams {
        rng_seed: 1,
        ..GenParams::default()
    };
    assert_ne!(
        serialize_request(&gen_request(&p, 0)),
        serialize_request(&gen_request(&other, 0))
    );
}

#[test]
fn distribution_over_ten_thousand_samples() {
    let p = GenParams::default();
    let n = 10_000u64;
    let mut one_way = 0;
    let mut present: BTreeMap<String, u64> = BTreeMap::new();
    for i in 0..n {
        let r = gen_request(&p, i);
        match r.trip_kind {
            TripKind::OneWay => one_way += 1,
            TripKind::RoundTrip => assert!(matches!(r.cities().len(), 2 | 3)),
        }
        for key in field_leaves(&r).into_keys() {
            *present.entry(key).or_default() += 1;
        }
    }
    let one_way_rate = one_way as f64 / n as f64;
    assert!(one_way_rate < 0.05, "one-way rate {one_way_rate}");
    assert!(one_way_rate > 0.0);
    for (field, prob) in p.presence.by_field() {
        let rate = present.get(field).copied().unwrap_or(0) as f64 / n as f64;
        assert!(
            (rate - prob).abs() <= 0.02,
            "{field}: empirical {rate:.4} vs configured {prob}"
        );
    }
}

#[test]
fn planted_combination_is_found_by_enumeration() {
    let params = ModelParams::default();
    for presence in [0.3, 0.7, 1.0] {
        let gen = GenParams {
            rng_seed: 4,
            presence: PresenceProbs::all(presence),
            ..GenParams::default()
        };
        for i in 0..150 {
            let r = gen_request(&gen, i);
            let inv = gen_inventory(&gen, &r);
            inv.validate().unwrap();
            assert!(inv.flights.iter().all(|f| f.departure < f.arrival));
            for (k, leg) in r.legs.iter().enumerate() {
                let n = inv.flights.iter().filter(|f| f.serves(leg)).count() as u32;
                assert!(
                    gen.flights_per_leg.min <= n && n <= gen.flights_per_leg.max,
                    "leg {k}"
                );
            }
            for stay in r.stays() {
                let n = inv.hotels.iter().filter(|h| h.city == stay.city).count() as u32;
                assert!(gen.hotels_per_city.min <= n && n <= gen.hotels_per_city.max);
            }
            let result = brute_force(&r, &inv, &params, 10_000_000).unwrap();
            assert!(
                result.best.is_some(),
                "presence {presence} index {i}: no feasible plan"
            );
            assert_eq!(inv, gen_inventory(&gen, &r));
        }
    }
}

#[test]
fn nonstop_budgeted_request_has_a_cheap_nonstop_per_leg() {
    let gen = GenParams {
        presence: PresenceProbs::all(1.0),
        flag_true_prob: 1.0,
        ..GenParams::default()
    };
    for i in 0..100 {
        let r = gen_request(&gen, i);
        assert_eq!(r.airline.nonstop_only, Some(true));
        let cap = r.airline.price_total_max.unwrap();
        let inv = gen_inventory(&gen, &r);
        for leg in &r.legs {
            assert!(inv
                .flights
                .iter()
                .any(|f| f.serves(leg) && f.is_nonstop && f.price <= cap));
        }
    }
}

#[test]
fn dataset_matches_single_records() {
    let gen = GenParams::default();
    let all = gen_dataset(&gen, 40, None);
    for (i, rec) in all.iter().enumerate() {
        assert_eq!(rec, &gen_record(&gen, i as u64, None));
        assert_eq!(rec.id, format!("r{i}"));
    }
}

#[test]
fn replication_tiles_whole_spans() {
    let gen = GenParams::default();
    let r = gen_request(&gen, 0);
    let inv = gen_inventory(&gen, &r);
    let d = |day| NaiveDate::from_ymd_opt(2022, 4, day).unwrap();
    let rows: Vec<_> = inv
        .flights
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let mut f = f.clone();
            let shift = d(1 + (i as u32 % 7)) - f.departure.date();
            f.departure += shift;
            f.arrival += shift;
            f
        })
        .collect();
    let base = BaseFlightTable {
        span: DateRange::new(d(1), d(7)),
        rows,
    };
    let tripled = replicate_dates(&base, DateRange::new(d(1), d(21)));
    assert_eq!(tripled.rows.len(), 3 * base.rows.len());
    assert!(tripled
        .rows
        .iter()
        .all(|f| tripled.span.contains(f.departure.date())));
    let ids: std::collections::BTreeSet<_> = tripled.rows.iter().map(|f| &f.id).collect();
    assert_eq!(ids.len(), tripled.rows.len());
    let same = replicate_dates(&base, base.span);
    assert_eq!(same.rows.len(), base.rows.len());
    for (a, b) in same.rows.iter().zip(&base.rows) {
        assert_eq!(
            (a.departure, a.arrival, a.price),
            (b.departure, b.arrival, b.price)
        );
    }
}
