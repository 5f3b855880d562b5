//! Self-consistency evaluation of translators.
//!
//! A record's text is translated back to a request and compared field by
//! field with the ground truth (exact match). The quality score solves both
//! requests and divides the true optimum by the cost, under the true request,
//! of the optimum found for the estimate; an estimate whose optimum breaks a
//! true constraint scores 0.

mod corpus;
mod corrupt;
mod markdown;
mod profile;

pub use corpus::{evaluate_corpus, Breakdowns, Bucket, EvalReport, RecordResult};
pub use corrupt::{
    corrupt_request, dominant_error_mix, CorruptError, CorruptingTranslator, Corruption, MixEntry,
    CORRUPTIBLE_FIELDS,
};
pub use markdown::report_markdown;
pub use profile::{profile_phases, PhaseStat, PhaseTimings, ProfileError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{ModelError, ModelParams};
use crate::model::{exact_match, Inventory, Itinerary, SymbolicRequest};
use crate::pipeline::plan;
use crate::solver::{check_feasible, SolveStatus, SolverConfig};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum QualityError {
    #[error("ground-truth request has no feasible itinerary")]
    GroundTruthInfeasible,
    #[error("solver stopped before finding any itinerary for the ground truth")]
    GroundTruthUnsolved,
    #[error("cannot build the ground-truth model: {0}")]
    Model(String),
}

impl From<ModelError> for QualityError {
    fn from(e: ModelError) -> Self {
        QualityError::Model(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityDetail {
    pub score: f64,
    /// Optimal objective of the true request.
    pub true_objective: i64,
    /// Objective of the estimate's optimum under the true request, when
    /// that optimum exists and is feasible for the true request.
    pub estimate_objective: Option<i64>,
    /// Violation codes of the estimate's optimum under the true request.
    pub violations: Vec<String>,
}

fn optimum(
    request: &SymbolicRequest,
    inventory: &Inventory,
    params: &ModelParams,
    config: &SolverConfig,
) -> Result<Option<(Itinerary, i64)>, ModelError> {
    let outcome = plan(request, inventory, params, config)?;
    Ok(match (outcome.itinerary, outcome.verdict) {
        (Some(it), Some(v)) if outcome.status != SolveStatus::Infeasible => Some((it, v.objective)),
        _ => None,
    })
}

/// Quality score with the objective values behind it.
pub fn quality_detail(
    truth: &SymbolicRequest,
    estimate: &SymbolicRequest,
    inventory: &Inventory,
    params: &ModelParams,
    config: &SolverConfig,
) -> Result<QualityDetail, QualityError> {
    let outcome = plan(truth, inventory, params, config)?;
    let true_objective = match (outcome.status, outcome.verdict) {
        (SolveStatus::Infeasible, _) => return Err(QualityError::GroundTruthInfeasible),
        (_, Some(v)) => v.objective,
        (_, None) => return Err(QualityError::GroundTruthUnsolved),
    };
    if exact_match(truth, estimate).is_match {
        return Ok(QualityDetail {
            score: 1.0,
            true_objective,
            estimate_objective: Some(true_objective),
            violations: Vec::new(),
        });
    }
    // An estimate that cannot even be modelled has no optimum.
    let Ok(Some((itinerary, _))) = optimum(estimate, inventory, params, config) else {
        return Ok(QualityDetail {
            score: 0.0,
            true_objective,
            estimate_objective: None,
            violations: vec!["estimate.infeasible".into()],
        });
    };
    let relevant = inventory.relevant_to(truth);
    let verdict = check_feasible(&itinerary.selections_only(), truth, &relevant, params);
    if !verdict.is_feasible() {
        return Ok(QualityDetail {
            score: 0.0,
            true_objective,
            estimate_objective: None,
            violations: verdict.violations.into_iter().map(|v| v.code).collect(),
        });
    }
    let score = if verdict.objective <= 0 {
        1.0
    } else {
        (true_objective as f64 / verdict.objective as f64).min(1.0)
    };
    Ok(QualityDetail {
        score,
        true_objective,
        estimate_objective: Some(verdict.objective),
        violations: Vec::new(),
    })
}

/// Score in `[0, 1]`: 1 for an exact translation, 0 when the estimate's
/// optimum is infeasible for the true request.
pub fn quality_score(
    truth: &SymbolicRequest,
    estimate: &SymbolicRequest,
    inventory: &Inventory,
    params: &ModelParams,
    config: &SolverConfig,
) -> Result<f64, QualityError> {
    quality_detail(truth, estimate, inventory, params, config).map(|d| d.score)
}

/// Mean and sample standard deviation; `None` for an empty slice. The
/// deviation of a single value is 0.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_sample_deviation() {
        assert_eq!(mean_std(&[]), None);
        assert_eq!(mean_std(&[0.5]), Some((0.5, 0.0)));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((m - 2.5).abs() < 1e-12);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
}
