use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

/// Pseudo-location for being aboard a flight.
pub const AIR: &str = "AIR";

/// Per-slot timeline of an itinerary: where the traveller is, when they are
/// asleep, and when an event (departure or landing) lets them move.
///
/// Boolean rows serialize as `"0011..."` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub slot_minutes: u32,
    pub origin: NaiveDateTime,
    /// City codes in request order, then [`AIR`].
    pub locations: Vec<String>,
    /// `presence[l][t]`
    #[serde(with = "bit_rows")]
    pub presence: Vec<Vec<bool>>,
    #[serde(with = "bit_row")]
    pub asleep: Vec<bool>,
    #[serde(with = "bit_row")]
    pub event: Vec<bool>,
}

impl Schedule {
    pub fn num_slots(&self) -> usize {
        self.asleep.len()
    }

    /// The single location occupied at `t`, if exactly one is.
    pub fn location_at(&self, t: usize) -> Option<usize> {
        let mut found = None;
        for (l, row) in self.presence.iter().enumerate() {
            if row.get(t).copied().unwrap_or(false) {
                if found.is_some() {
                    return None;
                }
                found = Some(l);
            }
        }
        found
    }

    pub fn air_index(&self) -> Option<usize> {
        self.locations.iter().position(|l| l == AIR)
    }
}

fn encode(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn decode<E: serde::de::Error>(s: &str) -> Result<Vec<bool>, E> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(E::custom(format!("invalid bit `{other}`"))),
        })
        .collect()
}

mod bit_row {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::encode(bits))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let s = String::deserialize(d)?;
        super::decode(&s)
    }
}

mod bit_rows {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<bool>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(rows.len()))?;
        for row in rows {
            seq.serialize_element(&super::encode(row))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<bool>>, D::Error> {
        let rows = Vec::<String>::deserialize(d)?;
        rows.iter().map(|r| super::decode(r)).collect()
    }
}
