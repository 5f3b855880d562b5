use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::milp::ModelParams;
use crate::model::{exact_match, DatasetRecord};
use crate::nl::Translator;
use crate::solver::SolverConfig;

use super::{mean_std, quality_detail, PhaseTimings};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordResult {
    pub id: String,
    /// Translation produced a schema-valid request on the first attempt.
    pub valid_output: bool,
    pub exact_match: bool,
    pub mismatched_fields: Vec<String>,
    /// `None` when the record could not be scored (see `error`).
    pub score: Option<f64>,
    pub error: Option<String>,
    pub hotel_constraints: usize,
    pub airline_constraints: usize,
    pub cities: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub count: usize,
    pub exact: usize,
    pub em: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Breakdowns {
    pub by_hotel_constraints: BTreeMap<usize, Bucket>,
    pub by_airline_constraints: BTreeMap<usize, Bucket>,
    pub by_cities: BTreeMap<usize, Bucket>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub count: usize,
    /// Fractions are absent for an empty corpus.
    pub em_accuracy: Option<f64>,
    pub valid_output_rate: Option<f64>,
    /// Mean and sample std of the per-subset mean scores.
    pub score_mean: Option<f64>,
    pub score_std: Option<f64>,
    pub em_subset_std: Option<f64>,
    /// Mean score over records that are not exact matches.
    pub non_em_score_mean: Option<f64>,
    pub subset_scores: Vec<f64>,
    pub subset_em: Vec<f64>,
    pub breakdowns: Breakdowns,
    pub error_histogram: BTreeMap<String, usize>,
    /// Records that could not be translated or scored.
    pub failures: usize,
    pub records: Vec<RecordResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<PhaseTimings>,
}

fn evaluate_record(
    record: &DatasetRecord,
    translator: &dyn Translator,
    params: &ModelParams,
    config: &SolverConfig,
) -> RecordResult {
    let truth = &record.request;
    let mut result = RecordResult {
        id: record.id.clone(),
        valid_output: false,
        exact_match: false,
        mismatched_fields: Vec::new(),
        score: None,
        error: None,
        hotel_constraints: truth.hotel.count_present(),
        airline_constraints: truth.airline.count_present(),
        cities: truth.cities().len(),
    };
    let translation = match translator.translate(&record.nl_text) {
        Ok(t) => t,
        Err(e) => {
            // An untranslatable text has no plan: it scores 0.
            result.error = Some(e.to_string());
            result.score = Some(0.0);
            return result;
        }
    };
    result.valid_output = translation.valid_json;
    let m = exact_match(truth, &translation.request);
    result.exact_match = m.is_match;
    result.mismatched_fields = m.mismatched_fields;
    match quality_detail(
        truth,
        &translation.request,
        &record.inventory,
        params,
        config,
    ) {
        Ok(d) => result.score = Some(d.score),
        Err(e) => result.error = Some(e.to_string()),
    }
    result
}

fn add(map: &mut BTreeMap<usize, Bucket>, key: usize, exact: bool) {
    let b = map.entry(key).or_default();
    b.count += 1;
    b.exact += usize::from(exact);
}

/// Contiguous chunks whose sizes differ by at most one.
fn chunk_bounds(n: usize, parts: usize) -> Vec<(usize, usize)> {
    let parts = parts.clamp(1, n.max(1));
    let (base, extra) = (n / parts, n % parts);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 0..parts {
        let len = base + usize::from(i < extra);
        out.push((start, start + len));
        start += len;
    }
    out
}

/// Translates every record's text, scores it, and aggregates over
/// `subsets` contiguous partitions. Records run in parallel; aggregation is
/// in corpus order, so the report is a pure function of its inputs.
pub fn evaluate_corpus(
    records: &[DatasetRecord],
    translator: &dyn Translator,
    subsets: usize,
    params: &ModelParams,
    config: &SolverConfig,
) -> EvalReport {
    let results: Vec<RecordResult> = records
        .par_iter()
        .map(|r| evaluate_record(r, translator, params, config))
        .collect();
    let n = results.len();
    let mut report = EvalReport {
        count: n,
        ..EvalReport::default()
    };
    if n == 0 {
        return report;
    }
    let frac = |k: usize, of: usize| k as f64 / of as f64;
    let exact = results.iter().filter(|r| r.exact_match).count();
    let valid = results.iter().filter(|r| r.valid_output).count();
    report.em_accuracy = Some(frac(exact, n));
    report.valid_output_rate = Some(frac(valid, n));
    report.failures = results.iter().filter(|r| r.error.is_some()).count();

    for (start, end) in chunk_bounds(n, subsets) {
        let chunk = &results[start..end];
        let scores: Vec<f64> = chunk.iter().filter_map(|r| r.score).collect();
        if let Some((m, _)) = mean_std(&scores) {
            report.subset_scores.push(m);
        }
        let em = chunk.iter().filter(|r| r.exact_match).count();
        report.subset_em.push(frac(em, chunk.len()));
    }
    if let Some((m, s)) = mean_std(&report.subset_scores) {
        report.score_mean = Some(m);
        report.score_std = Some(s);
    }
    report.em_subset_std = mean_std(&report.subset_em).map(|(_, s)| s);
    let non_em: Vec<f64> = results
        .iter()
        .filter(|r| !r.exact_match)
        .filter_map(|r| r.score)
        .collect();
    report.non_em_score_mean = mean_std(&non_em).map(|(m, _)| m);

    for r in &results {
        let b = &mut report.breakdowns;
        add(
            &mut b.by_hotel_constraints,
            r.hotel_constraints,
            r.exact_match,
        );
        add(
            &mut b.by_airline_constraints,
            r.airline_constraints,
            r.exact_match,
        );
        add(&mut b.by_cities, r.cities, r.exact_match);
        for f in &r.mismatched_fields {
            *report.error_histogram.entry(f.clone()).or_default() += 1;
        }
    }
    for map in [
        &mut report.breakdowns.by_hotel_constraints,
        &mut report.breakdowns.by_airline_constraints,
        &mut report.breakdowns.by_cities,
    ] {
        for b in map.values_mut() {
            b.em = frac(b.exact, b.count);
        }
    }
    report.records = results;
    report
}
