use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::datagen::fnv1a;
use crate::model::{request_from_value, CabinClass, SymbolicRequest};
use crate::nl::{TemplateTranslator, TranslateError, Translation, Translator};

/// Constraint fields that can be corrupted, as `section.field` paths.
pub const CORRUPTIBLE_FIELDS: [&str; 17] = [
    "airline.price_total_max",
    "airline.cabin_class",
    "airline.refundable",
    "airline.nonstop_only",
    "airline.must_not_basic_economy",
    "airline.no_mixed_cabin",
    "airline.avoid_red_eye",
    "airline.departure_time",
    "airline.arrival_time",
    "airline.plane_types",
    "airline.preferred_airlines",
    "hotel.daily_budget_max",
    "hotel.total_budget_max",
    "hotel.min_rating",
    "hotel.brands",
    "budget.total_budget",
    "budget.everyday_budget",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Corruption {
    /// Remove the field.
    Drop,
    /// Negate a boolean; an absent boolean becomes `true`.
    Flip,
    /// Move a time window by this many minutes, keeping its length and
    /// clamping it inside the day.
    ShiftMinutes(i32),
    /// Change the value at random: flags flip, amounts scale by 0.5 to 0.8
    /// or 1.2 to 1.5, windows move 1 to 3 hours, ratings move half a star
    /// or a star, cabins change, sets lose or gain a name.
    Perturb,
    /// Replace the value; `null` removes it.
    Set(Value),
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CorruptError {
    #[error("unknown or uncorruptible field `{0}`")]
    UnknownField(String),
    #[error("{kind} does not apply to `{field}` in this request")]
    NotApplicable { field: String, kind: String },
    #[error("corrupted request is invalid: {0}")]
    Invalid(String),
}

fn not_applicable(field: &str, c: &Corruption) -> CorruptError {
    let kind = match c {
        Corruption::Drop => "drop",
        Corruption::Flip => "flip",
        Corruption::ShiftMinutes(_) => "shift",
        Corruption::Perturb => "perturb",
        Corruption::Set(_) => "set",
    };
    CorruptError::NotApplicable {
        field: field.to_string(),
        kind: kind.to_string(),
    }
}

fn shift_window(w: &Value, minutes: i64) -> Option<Value> {
    let start = w.get("start")?.as_i64()?;
    let end = w.get("end")?.as_i64()?;
    let len = end - start;
    let new_start = (start + minutes).clamp(0, 1440 - len);
    (new_start != start).then(|| json!({"start": new_start, "end": new_start + len}))
}

fn perturb(key: &str, current: Option<&Value>, rng: &mut impl Rng) -> Option<Value> {
    match (key, current?) {
        (_, Value::Bool(b)) => Some(Value::Bool(!b)),
        ("departure_time" | "arrival_time", w) => {
            let hours = rng.random_range(1..=3i64) * if rng.random_bool(0.5) { 1 } else { -1 };
            shift_window(w, hours * 60).or_else(|| shift_window(w, -hours * 60))
        }
        ("min_rating", r) => {
            let tenths = (r.as_f64()? * 10.0).round() as i64;
            let step = [5, 10][rng.random_range(0..2)];
            let up = tenths + step;
            let down = tenths - step;
            let next = match (up <= 50, down >= 0) {
                (true, true) => [up, down][rng.random_range(0..2)],
                (true, false) => up,
                (false, _) => down,
            };
            Some(json!(next as f64 / 10.0))
        }
        ("cabin_class", c) => {
            let others: Vec<CabinClass> = CabinClass::ALL
                .into_iter()
                .filter(|x| Some(x.as_str()) != c.as_str())
                .collect();
            Some(json!(others.choose(rng)?.as_str()))
        }
        (_, Value::Array(items)) => {
            let mut items = items.clone();
            if items.len() > 1 {
                items.remove(rng.random_range(0..items.len()));
            } else {
                items.push(json!("Unlisted"));
            }
            Some(Value::Array(items))
        }
        (_, Value::Number(n)) => {
            let cents = n.as_i64()?;
            let factor = if rng.random_bool(0.5) {
                rng.random_range(0.5..=0.8)
            } else {
                rng.random_range(1.2..=1.5)
            };
            let dollars = ((cents as f64 * factor) / 100.0).round() as i64;
            let next = dollars * 100;
            (next != cents).then(|| json!(next))
        }
        _ => None,
    }
}

/// Returns `r` with one constraint field changed.
pub fn corrupt_request(
    r: &SymbolicRequest,
    field: &str,
    corruption: &Corruption,
    rng: &mut impl Rng,
) -> Result<SymbolicRequest, CorruptError> {
    if !CORRUPTIBLE_FIELDS.contains(&field) {
        return Err(CorruptError::UnknownField(field.to_string()));
    }
    let (section, key) = field.split_once('.').expect("paths have a section");
    let mut value = serde_json::to_value(r).expect("requests serialize");
    let top = value
        .as_object_mut()
        .expect("requests serialize to objects");
    let obj = top
        .entry(section)
        .or_insert_with(|| Value::Object(Map::new()))
        .as_object_mut()
        .expect("sections are objects");
    let current = obj.get(key).cloned();
    let next = match corruption {
        Corruption::Drop => None,
        Corruption::Flip => match &current {
            None => Some(Value::Bool(true)),
            Some(Value::Bool(b)) => Some(Value::Bool(!b)),
            Some(_) => return Err(not_applicable(field, corruption)),
        },
        Corruption::ShiftMinutes(m) => Some(
            current
                .as_ref()
                .and_then(|w| shift_window(w, i64::from(*m)))
                .ok_or_else(|| not_applicable(field, corruption))?,
        ),
        Corruption::Perturb => Some(
            perturb(key, current.as_ref(), rng).ok_or_else(|| not_applicable(field, corruption))?,
        ),
        Corruption::Set(Value::Null) => None,
        Corruption::Set(v) => Some(v.clone()),
    };
    if next == current {
        return Err(not_applicable(field, corruption));
    }
    match next {
        Some(v) => obj.insert(key.to_string(), v),
        None => obj.remove(key),
    };
    request_from_value(value).map_err(|e| CorruptError::Invalid(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixEntry {
    pub field: String,
    pub corruption: Corruption,
    pub weight: f64,
}

fn entry(field: &str, corruption: Corruption, weight: f64) -> MixEntry {
    MixEntry {
        field: field.to_string(),
        corruption,
        weight,
    }
}

/// Corruptions weighted toward the error sources a learned translator most
/// often gets wrong: dropped basic-economy, departure-time and red-eye
/// constraints, with a tail of perturbed budgets and flags.
pub fn dominant_error_mix() -> Vec<MixEntry> {
    vec![
        entry("airline.must_not_basic_economy", Corruption::Drop, 4.0),
        entry("airline.departure_time", Corruption::Drop, 3.0),
        entry("airline.avoid_red_eye", Corruption::Drop, 3.0),
        entry("airline.price_total_max", Corruption::Perturb, 1.0),
        entry("airline.nonstop_only", Corruption::Flip, 1.0),
        entry("hotel.daily_budget_max", Corruption::Perturb, 1.0),
        entry("hotel.min_rating", Corruption::Perturb, 1.0),
        entry("airline.arrival_time", Corruption::Perturb, 1.0),
    ]
}

/// Parses with the template grammar, then corrupts a fraction of the
/// results. Whether and how a text is corrupted depends only on the text and
/// the seed. A selected text whose request admits none of the mix entries
/// is left intact.
pub struct CorruptingTranslator {
    pub rate: f64,
    pub mix: Vec<MixEntry>,
    pub seed: u64,
}

impl CorruptingTranslator {
    fn corrupt(&self, r: &SymbolicRequest, rng: &mut ChaCha8Rng) -> Option<SymbolicRequest> {
        if self.mix.is_empty() || !rng.random_bool(self.rate) {
            return None;
        }
        let first = self
            .mix
            .choose_weighted(rng, |e| e.weight)
            .expect("weights are positive");
        let ordered = std::iter::once(first).chain(self.mix.iter().filter(|e| *e != first));
        for e in ordered {
            if let Ok(c) = corrupt_request(r, &e.field, &e.corruption, rng) {
                return Some(c);
            }
        }
        None
    }
}

impl Translator for CorruptingTranslator {
    fn translate(&self, text: &str) -> Result<Translation, TranslateError> {
        let mut t = TemplateTranslator.translate(text)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(text.as_bytes()));
        if let Some(c) = self.corrupt(&t.request, &mut rng) {
            t.raw_output = crate::model::serialize_request(&c);
            t.request = c;
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{gen_request, GenParams, PresenceProbs};
    use crate::model::{exact_match, TimeWindow};

    fn full() -> SymbolicRequest {
        let p = GenParams {
            presence: PresenceProbs::all(1.0),
            ..GenParams::default()
        };
        gen_request(&p, 11)
    }

    #[test]
    fn drop_shift_and_restore() {
        let r = full();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dropped = corrupt_request(
            &r,
            "airline.must_not_basic_economy",
            &Corruption::Drop,
            &mut rng,
        )
        .unwrap();
        assert_eq!(dropped.airline.must_not_basic_economy, None);
        assert_eq!(
            exact_match(&r, &dropped).mismatched_fields,
            vec!["airline.must_not_basic_economy".to_string()]
        );

        let mut r2 = r.clone();
        r2.airline.departure_time = Some(TimeWindow::new(480, 720));
        let shifted = corrupt_request(
            &r2,
            "airline.departure_time",
            &Corruption::ShiftMinutes(120),
            &mut rng,
        )
        .unwrap();
        assert_eq!(
            shifted.airline.departure_time,
            Some(TimeWindow::new(600, 840))
        );

        let original = serde_json::to_value(r2.airline.departure_time).unwrap();
        let restored = corrupt_request(
            &shifted,
            "airline.departure_time",
            &Corruption::Set(original),
            &mut rng,
        )
        .unwrap();
        assert!(exact_match(&restored, &r2).is_match);
    }

    #[test]
    fn every_field_perturbs_to_a_different_valid_request() {
        let r = full();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for f in CORRUPTIBLE_FIELDS {
                let c = corrupt_request(&r, f, &Corruption::Perturb, &mut rng).unwrap();
                assert_eq!(exact_match(&r, &c).mismatched_fields, vec![f.to_string()]);
            }
        }
    }

    #[test]
    fn unknown_and_inapplicable() {
        let r = full();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            corrupt_request(&r, "legs", &Corruption::Drop, &mut rng),
            Err(CorruptError::UnknownField(_))
        ));
        assert!(matches!(
            corrupt_request(&r, "hotel.brands", &Corruption::Flip, &mut rng),
            Err(CorruptError::NotApplicable { .. })
        ));
    }
}
