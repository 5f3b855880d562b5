use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::milp::{build_model, ModelError, ModelParams};
use crate::model::Inventory;
use crate::nl::{TranslateError, Translator};
use crate::solver::{load, solve_loaded, SolverConfig};

use super::mean_std;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseStat {
    pub mean_ms: f64,
    pub std_ms: f64,
}

impl PhaseStat {
    fn of(samples: &[f64]) -> PhaseStat {
        let (mean_ms, std_ms) = mean_std(samples).unwrap_or_default();
        PhaseStat { mean_ms, std_ms }
    }
}

/// Per-phase wall time. `load` covers model construction and loading into
/// the solver; `total` is `load + solve` per repetition.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub repetitions: usize,
    pub translate: PhaseStat,
    pub load: PhaseStat,
    pub solve: PhaseStat,
    pub total: PhaseStat,
}

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// Times translation, loading and solving of one request `repetitions` times.
pub fn profile_phases(
    text: &str,
    translator: &dyn Translator,
    inventory: &Inventory,
    params: &ModelParams,
    config: &SolverConfig,
    repetitions: usize,
) -> Result<PhaseTimings, ProfileError> {
    let (mut tr, mut ld, mut sv, mut tot) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for _ in 0..repetitions.max(1) {
        let t = Instant::now();
        let request = translator.translate(text)?.request;
        tr.push(ms_since(t));

        let t = Instant::now();
        let relevant = inventory.relevant_to(&request);
        let model = build_model(&request, &relevant, params)?;
        let (loaded, _) = load(&model);
        let load_ms = ms_since(t);

        let t = Instant::now();
        let result = solve_loaded(&loaded, config);
        std::hint::black_box(&result);
        let solve_ms = ms_since(t);

        ld.push(load_ms);
        sv.push(solve_ms);
        tot.push(load_ms + solve_ms);
    }
    Ok(PhaseTimings {
        repetitions: tr.len(),
        translate: PhaseStat::of(&tr),
        load: PhaseStat::of(&ld),
        solve: PhaseStat::of(&sv),
        total: PhaseStat::of(&tot),
    })
}
