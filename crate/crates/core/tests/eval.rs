//! Exact match, quality scores and corpus reports.

use chrono::NaiveDate;

use itinera_core::datagen::{gen_dataset, GenParams, IntRange, PresenceProbs};
use itinera_core::eval::{
    dominant_error_mix, evaluate_corpus, profile_phases, quality_detail, quality_score,
    report_markdown, CorruptingTranslator, Corruption, MixEntry,
};
use itinera_core::milp::ModelParams;
use itinera_core::model::{
    Airport, CabinClass, FlightOption, Inventory, Money, SymbolicRequest, TripKind, TripLeg,
};
use itinera_core::nl::{translate, TemplateTranslator, TranslatorBackend};
use itinera_core::pipeline::plan;
use itinera_core::solver::{check_feasible, SolverConfig};

fn corpus(n: u64, seed: u64) -> Vec<itinera_core::model::DatasetRecord> {
    let gen = GenParams {
        rng_seed: seed,
        presence: PresenceProbs::all(0.5),
        stay_nights: IntRange::new(1, 3),
        ..GenParams::default()
    };
    gen_dataset(&gen, n, None)
}

fn flight(id: &str, airline: &str, dollars: i64) -> FlightOption {
    let day = NaiveDate::from_ymd_opt(2025, 3, 1).unwrap();
    FlightOption {
        id: id.into(),
        origin: Airport::new("SEA"),
        destination: Airport::new("BOS"),
        departure: day.and_hms_opt(9, 0, 0).unwrap(),
        arrival: day.and_hms_opt(15, 0, 0).unwrap(),
        price: Money::from_dollars(dollars),
        cabin_class: CabinClass::Coach,
        is_basic_economy: false,
        is_mixed_cabin: false,
        is_nonstop: true,
        airline: airline.into(),
        plane_type: "Boeing 737".into(),
        refundable: false,
    }
}

#[test]
fn ratio_of_objectives_under_the_true_request() {
    let truth = SymbolicRequest {
        legs: vec![TripLeg {
            date: NaiveDate::from_ymd_opt(2025, 3, 1).unwrap(),
            origin: Airport::new("SEA"),
            destination: Airport::new("BOS"),
        }],
        trip_kind: TripKind::OneWay,
        airline: Default::default(),
        hotel: Default::default(),
        budget: Default::default(),
    };
    let inventory = Inventory {
        flights: vec![flight("a", "Alaska", 150), flight("b", "Delta", 200)],
        hotels: vec![],
    };
    let mut estimate = truth.clone();
    estimate.airline.preferred_airlines = Some(["Delta".to_string()].into());
    let params = ModelParams::default();
    let config = SolverConfig::default();
    let d = quality_detail(&truth, &estimate, &inventory, &params, &config).unwrap();
    assert_eq!(d.true_objective, 150 * 100 * 100);
    assert_eq!(d.estimate_objective, Some(200 * 100 * 100));
    assert_eq!(d.score, 0.75);
    assert_eq!(
        quality_score(&truth, &truth, &inventory, &params, &config),
        Ok(1.0)
    );

    // The estimate books Delta, which the truth now forbids.
    let mut strict = truth.clone();
    strict.airline.preferred_airlines = Some(["Alaska".to_string()].into());
    let d = quality_detail(&strict, &estimate, &inventory, &params, &config).unwrap();
    assert_eq!(d.score, 0.0);
    assert!(d
        .violations
        .contains(&"airline.preferred_airlines".to_string()));
}

#[test]
fn template_backend_is_perfect_on_its_own_corpus() {
    let records = corpus(160, 2);
    let report = evaluate_corpus(
        &records,
        &TemplateTranslator,
        8,
        &ModelParams::default(),
        &SolverConfig::default(),
    );
    assert_eq!(report.count, 160);
    assert_eq!(report.em_accuracy, Some(1.0));
    assert_eq!(report.valid_output_rate, Some(1.0));
    assert_eq!(report.score_mean, Some(1.0));
    assert_eq!(report.score_std, Some(0.0));
    assert_eq!(report.subset_scores.len(), 8);
    assert_eq!(report.failures, 0);
    assert!(report.error_histogram.is_empty());
    assert_eq!(report.non_em_score_mean, None);
    let total: usize = report.breakdowns.by_cities.values().map(|b| b.count).sum();
    assert_eq!(total, 160);
    let total: usize = report
        .breakdowns
        .by_airline_constraints
        .values()
        .map(|b| b.count)
        .sum();
    assert_eq!(total, 160);
    for r in &records[..5] {
        let t = translate(&r.nl_text, &TranslatorBackend::TemplateParser).unwrap();
        assert_eq!(t.request, r.request);
    }
}

#[test]
fn flipping_one_field_in_a_tenth_of_records() {
    let records = corpus(400, 3);
    let translator = CorruptingTranslator {
        rate: 0.1,
        mix: vec![MixEntry {
            field: "airline.must_not_basic_economy".into(),
            corruption: Corruption::Flip,
            weight: 1.0,
        }],
        seed: 11,
    };
    let report = evaluate_corpus(
        &records,
        &translator,
        8,
        &ModelParams::default(),
        &SolverConfig::default(),
    );
    let em = report.em_accuracy.unwrap();
    assert!((em - 0.9).abs() < 0.05, "em {em}");
    assert_eq!(report.error_histogram.len(), 1);
    let wrong = report.error_histogram["airline.must_not_basic_economy"];
    assert_eq!(wrong, 400 - (em * 400.0).round() as usize);
}

#[test]
fn scores_under_the_dominant_error_mix() {
    let records = corpus(240, 4);
    let translator = CorruptingTranslator {
        rate: 0.5,
        mix: dominant_error_mix(),
        seed: 5,
    };
    let params = ModelParams::default();
    let config = SolverConfig::default();
    let report = evaluate_corpus(&records, &translator, 8, &params, &config);
    assert_eq!(report.failures, 0);
    let mismatches: usize = report
        .records
        .iter()
        .map(|r| r.mismatched_fields.len())
        .sum();
    assert_eq!(report.error_histogram.values().sum::<usize>(), mismatches);
    let mut zeros = 0;
    for (rec, res) in records.iter().zip(&report.records) {
        let score = res.score.unwrap();
        assert!((0.0..=1.0).contains(&score));
        if res.exact_match {
            assert_eq!(score, 1.0);
            continue;
        }
        // Recompute the estimate's optimum and judge it independently.
        let estimate = translator_request(&translator, &rec.nl_text);
        let outcome = plan(&estimate, &rec.inventory, &params, &config).unwrap();
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
        assert_eq!(score == 0.0, rejected, "{}", rec.id);
        zeros += usize::from(rejected);
    }
    assert!(
        zeros > 0,
        "the mix should produce some infeasible estimates"
    );
    let em = report.em_accuracy.unwrap();
    assert!(em < 1.0 && em > 0.4);
    let again = evaluate_corpus(&records, &translator, 8, &params, &config);
    assert_eq!(
        serde_json::to_string(&report).unwrap(),
        serde_json::to_string(&again).unwrap()
    );
    let md = report_markdown(&report);
    assert!(md.contains("| hotel constraints |"));
    assert!(md.contains("airline.must_not_basic_economy"));
}

fn translator_request(t: &CorruptingTranslator, text: &str) -> SymbolicRequest {
    use itinera_core::nl::Translator;
    t.translate(text).unwrap().request
}

#[test]
fn empty_corpus_reports_no_fractions() {
    let report = evaluate_corpus(
        &[],
        &TemplateTranslator,
        8,
        &ModelParams::default(),
        &SolverConfig::default(),
    );
    assert_eq!(report.count, 0);
    assert_eq!(report.em_accuracy, None);
    assert_eq!(report.score_mean, None);
    assert!(report_markdown(&report).contains("n/a"));
}

#[test]
fn phase_profile_adds_up() {
    let rec = &corpus(1, 9)[0];
    let t = profile_phases(
        &rec.nl_text,
        &TemplateTranslator,
        &rec.inventory,
        &ModelParams::default(),
        &SolverConfig::default(),
        6,
    )
    .unwrap();
    assert_eq!(t.repetitions, 6);
    assert!((t.total.mean_ms - (t.load.mean_ms + t.solve.mean_ms)).abs() < 1e-9);
    assert!(t.total.std_ms >= 0.0 && t.translate.mean_ms > 0.0);
}
