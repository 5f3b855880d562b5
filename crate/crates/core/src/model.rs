//! Symbolic travel requests, flight/hotel inventories and itineraries.
//!
//! A [`SymbolicRequest`] is the structured form of what a traveller asked for:
//! dated legs plus optional airline, hotel and budget constraints. Every
//! optional field that is absent means "unconstrained". The canonical JSON
//! form emits keys in declaration order, omits absent optionals and empty
//! sections, and stores string sets sorted, so two requests are equal exactly
//! when their canonical serializations are byte-identical.
//!
//! Currency is integer cents ([`Money`]) and ratings are integer tenths of a
//! star ([`Rating`]); neither ever goes through floating point comparison.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::milp::Schedule;

/// Minutes in one day; time-of-day windows live in `[0, MINUTES_PER_DAY]`.
pub const MINUTES_PER_DAY: u16 = 1440;

/// Errors produced while reading a request from JSON.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RequestError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("schema violation at `{path}`: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("invalid request: {0}")]
    InvariantViolation(String),
}

/// A violated structural invariant on an inventory or request.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct ValidationError(pub String);

/// An amount of money in integer cents.
#[derive(
    Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Money(pub i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_dollars(dollars: i64) -> Self {
        Money(dollars * 100)
    }

    pub const fn cents(self) -> i64 {
        self.0
    }
}

impl std::ops::Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl std::ops::AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        Money(iter.map(|m| m.0).sum())
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        if abs % 100 == 0 {
            write!(f, "{sign}${}", abs / 100)
        } else {
            write!(f, "{sign}${}.{:02}", abs / 100, abs % 100)
        }
    }
}

/// Star rating in tenths of a star. Serialized as a decimal number (`3.5`).
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rating(pub u8);

impl Rating {
    pub const MAX: Rating = Rating(50);

    pub const fn tenths(self) -> u8 {
        self.0
    }
}

impl fmt::Display for Rating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 10 == 0 {
            write!(f, "{}", self.0 / 10)
        } else {
            write!(f, "{}.{}", self.0 / 10, self.0 % 10)
        }
    }
}

impl Serialize for Rating {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(f64::from(self.0) / 10.0)
    }
}

impl<'de> Deserialize<'de> for Rating {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let value = f64::deserialize(d)?;
        let tenths = (value * 10.0).round();
        if (value * 10.0 - tenths).abs() > 1e-6 || !(0.0..=255.0).contains(&tenths) {
            return Err(serde::de::Error::custom(format!(
                "rating {value} is not a non-negative multiple of 0.1"
            )));
        }
        Ok(Rating(tenths as u8))
    }
}

/// IATA-style airport code, used as the identity of a city.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Airport(pub String);

impl Airport {
    pub fn new(code: &str) -> Self {
        Airport(code.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_well_formed(&self) -> bool {
        self.0.len() == 3 && self.0.bytes().all(|b| b.is_ascii_uppercase())
    }
}

impl fmt::Display for Airport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CabinClass {
    Coach,
    Premium,
    Business,
    First,
}

impl CabinClass {
    pub const ALL: [CabinClass; 4] = [
        CabinClass::Coach,
        CabinClass::Premium,
        CabinClass::Business,
        CabinClass::First,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CabinClass::Coach => "coach",
            CabinClass::Premium => "premium",
            CabinClass::Business => "business",
            CabinClass::First => "first",
        }
    }
}

impl FromStr for CabinClass {
    type Err = ValidationError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "coach" | "economy" => Ok(CabinClass::Coach),
            "premium" | "premium economy" | "premium coach" => Ok(CabinClass::Premium),
            "business" => Ok(CabinClass::Business),
            "first" => Ok(CabinClass::First),
            other => Err(ValidationError(format!("unknown cabin class `{other}`"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripKind {
    RoundTrip,
    OneWay,
}

/// Half-open time-of-day window `[start, end)` in minutes from midnight.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindow {
    pub start: u16,
    pub end: u16,
}

impl TimeWindow {
    pub fn new(start: u16, end: u16) -> Self {
        TimeWindow { start, end }
    }

    pub fn is_valid(&self) -> bool {
        self.start < self.end && self.end <= MINUTES_PER_DAY
    }

    pub fn contains(&self, minute: u16) -> bool {
        minute >= self.start && minute < self.end
    }

    /// Minutes by which `minute` falls outside the window; 0 inside.
    pub fn deviation_minutes(&self, minute: u16) -> u32 {
        if minute < self.start {
            u32::from(self.start - minute)
        } else if minute >= self.end {
            u32::from(minute - self.end) + 1
        } else {
            0
        }
    }
}

/// Minutes from midnight of a time of day.
pub fn minute_of_day(t: NaiveTime) -> u16 {
    (t.hour() * 60 + t.minute()) as u16
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripLeg {
    pub date: NaiveDate,
    pub origin: Airport,
    pub destination: Airport,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AirlineConstraints {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_total_max: Option<Money>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cabin_class: Option<CabinClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refundable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonstop_only: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub must_not_basic_economy: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_mixed_cabin: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avoid_red_eye: Option<bool>,
    /// Soft departure window, applied to every leg.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub departure_time: Option<TimeWindow>,
    /// Soft arrival window, applied to every leg.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_time: Option<TimeWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane_types: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preferred_airlines: Option<BTreeSet<String>>,
}

impl AirlineConstraints {
    pub fn is_empty(&self) -> bool {
        self.count_present() == 0
    }

    pub fn count_present(&self) -> usize {
        [
            self.price_total_max.is_some(),
            self.cabin_class.is_some(),
            self.refundable.is_some(),
            self.nonstop_only.is_some(),
            self.must_not_basic_economy.is_some(),
            self.no_mixed_cabin.is_some(),
            self.avoid_red_eye.is_some(),
            self.departure_time.is_some(),
            self.arrival_time.is_some(),
            self.plane_types.is_some(),
            self.preferred_airlines.is_some(),
        ]
        .into_iter()
        .filter(|p| *p)
        .count()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HotelConstraints {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub daily_budget_max: Option<Money>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_budget_max: Option<Money>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_rating: Option<Rating>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brands: Option<BTreeSet<String>>,
}

impl HotelConstraints {
    pub fn is_empty(&self) -> bool {
        self.count_present() == 0
    }

    pub fn count_present(&self) -> usize {
        [
            self.daily_budget_max.is_some(),
            self.total_budget_max.is_some(),
            self.min_rating.is_some(),
            self.brands.is_some(),
        ]
        .into_iter()
        .filter(|p| *p)
        .count()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConstraints {
    /// Flights plus hotels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_budget: Option<Money>,
    /// Hotel spend per night.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub everyday_budget: Option<Money>,
}

impl BudgetConstraints {
    pub fn is_empty(&self) -> bool {
        self.total_budget.is_none() && self.everyday_budget.is_none()
    }
}

/// A validated travel request.
///
/// Deserialization always runs [`SymbolicRequest::validate`], so a value of
/// this type read from JSON satisfies every invariant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRequest")]
pub struct SymbolicRequest {
    pub legs: Vec<TripLeg>,
    pub trip_kind: TripKind,
    #[serde(default, skip_serializing_if = "AirlineConstraints::is_empty")]
    pub airline: AirlineConstraints,
    #[serde(default, skip_serializing_if = "HotelConstraints::is_empty")]
    pub hotel: HotelConstraints,
    #[serde(default, skip_serializing_if = "BudgetConstraints::is_empty")]
    pub budget: BudgetConstraints,
}

/// Wire shape before validation; `trip_kind` may be omitted and is then
/// inferred from the legs.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRequest {
    legs: Vec<TripLeg>,
    #[serde(default)]
    trip_kind: Option<TripKind>,
    #[serde(default)]
    airline: AirlineConstraints,
    #[serde(default)]
    hotel: HotelConstraints,
    #[serde(default)]
    budget: BudgetConstraints,
}

impl TryFrom<RawRequest> for SymbolicRequest {
    type Error = ValidationError;

    fn try_from(raw: RawRequest) -> Result<Self, Self::Error> {
        let trip_kind = raw.trip_kind.unwrap_or(if raw.legs.len() == 1 {
            TripKind::OneWay
        } else {
            TripKind::RoundTrip
        });
        let request = SymbolicRequest {
            legs: raw.legs,
            trip_kind,
            airline: raw.airline,
            hotel: raw.hotel,
            budget: raw.budget,
        };
        request.validate()?;
        Ok(request)
    }
}

/// Names used in string sets must survive the natural-language grammar:
/// no list separators or sentence punctuation, and every word starts with a
/// capital letter or digit (or is `&`). Template words are all lowercase, so
/// a name can never be confused with the text around it.
pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name == name.trim()
        && !name.contains("  ")
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, ' ' | '-' | '&' | '\''))
        && name.split(' ').all(|w| {
            w == "&" || w.starts_with(|c: char| c.is_ascii_uppercase() || c.is_ascii_digit())
        })
}

fn validate_set(field: &str, set: &Option<BTreeSet<String>>) -> Result<(), ValidationError> {
    if let Some(set) = set {
        if set.is_empty() {
            return Err(ValidationError(format!(
                "{field}: present set must not be empty"
            )));
        }
        if let Some(bad) = set.iter().find(|n| !is_valid_name(n)) {
            return Err(ValidationError(format!("{field}: invalid name `{bad}`")));
        }
    }
    Ok(())
}

fn validate_money(field: &str, m: Option<Money>) -> Result<(), ValidationError> {
    match m {
        Some(Money(c)) if c < 0 => Err(ValidationError(format!("{field}: must be non-negative"))),
        _ => Ok(()),
    }
}

fn validate_window(field: &str, w: &Option<TimeWindow>) -> Result<(), ValidationError> {
    match w {
        Some(w) if !w.is_valid() => Err(ValidationError(format!(
            "{field}: window must satisfy start < end <= 1440, got [{}, {})",
            w.start, w.end
        ))),
        _ => Ok(()),
    }
}

impl SymbolicRequest {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let n = self.legs.len();
        if !(1..=3).contains(&n) {
            return Err(ValidationError(format!(
                "legs: expected 1 to 3 legs, found {n}"
            )));
        }
        for (i, leg) in self.legs.iter().enumerate() {
            for code in [&leg.origin, &leg.destination] {
                if !code.is_well_formed() {
                    return Err(ValidationError(format!(
                        "legs[{i}]: `{code}` is not a 3-letter uppercase airport code"
                    )));
                }
            }
            if leg.origin == leg.destination {
                return Err(ValidationError(format!(
                    "legs[{i}]: origin and destination are both {}",
                    leg.origin
                )));
            }
        }
        for (i, pair) in self.legs.windows(2).enumerate() {
            if pair[1].date <= pair[0].date {
                return Err(ValidationError(format!(
                    "legs[{}]: date {} is not after the previous leg's {}",
                    i + 1,
                    pair[1].date,
                    pair[0].date
                )));
            }
            if pair[0].destination != pair[1].origin {
                return Err(ValidationError(format!(
                    "legs[{}]: starts at {} but the previous leg ends at {}",
                    i + 1,
                    pair[1].origin,
                    pair[0].destination
                )));
            }
        }
        match self.trip_kind {
            TripKind::OneWay if n != 1 => {
                return Err(ValidationError(format!(
                    "trip_kind: one-way trips have exactly 1 leg, found {n}"
                )))
            }
            TripKind::RoundTrip if n < 2 => {
                return Err(ValidationError(
                    "trip_kind: round trips need at least 2 legs".into(),
                ))
            }
            TripKind::RoundTrip if self.legs[n - 1].destination != self.legs[0].origin => {
                return Err(ValidationError(format!(
                    "trip_kind: round trip ends at {} instead of {}",
                    self.legs[n - 1].destination,
                    self.legs[0].origin
                )))
            }
            _ => {}
        }

        let a = &self.airline;
        validate_money("airline.price_total_max", a.price_total_max)?;
        validate_window("airline.departure_time", &a.departure_time)?;
        validate_window("airline.arrival_time", &a.arrival_time)?;
        validate_set("airline.plane_types", &a.plane_types)?;
        validate_set("airline.preferred_airlines", &a.preferred_airlines)?;

        let h = &self.hotel;
        validate_money("hotel.daily_budget_max", h.daily_budget_max)?;
        validate_money("hotel.total_budget_max", h.total_budget_max)?;
        if let Some(r) = h.min_rating {
            if r > Rating::MAX {
                return Err(ValidationError(format!(
                    "hotel.min_rating: {r} is outside [0, 5]"
                )));
            }
        }
        validate_set("hotel.brands", &h.brands)?;

        validate_money("budget.total_budget", self.budget.total_budget)?;
        validate_money("budget.everyday_budget", self.budget.everyday_budget)?;
        Ok(())
    }

    pub fn first_date(&self) -> NaiveDate {
        self.legs[0].date
    }

    pub fn last_date(&self) -> NaiveDate {
        self.legs[self.legs.len() - 1].date
    }

    /// Distinct airports visited, in order of first appearance.
    pub fn cities(&self) -> Vec<Airport> {
        let mut seen = Vec::new();
        for leg in &self.legs {
            for code in [&leg.origin, &leg.destination] {
                if !seen.contains(code) {
                    seen.push(code.clone());
                }
            }
        }
        seen
    }

    /// Stays between consecutive legs: the traveller sleeps in `legs[k].destination`
    /// for the nights from `legs[k].date` up to the day before `legs[k+1].date`.
    pub fn stays(&self) -> Vec<Stay> {
        self.legs
            .windows(2)
            .enumerate()
            .map(|(k, pair)| Stay {
                index: k,
                city: pair[0].destination.clone(),
                first_night: pair[0].date,
                nights: (pair[1].date - pair[0].date).num_days() as u32,
            })
            .collect()
    }

    /// Number of hotel nights across all stays.
    pub fn total_nights(&self) -> u32 {
        self.stays().iter().map(|s| s.nights).sum()
    }
}

/// A contiguous run of hotel nights in one city.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stay {
    pub index: usize,
    pub city: Airport,
    pub first_night: NaiveDate,
    pub nights: u32,
}

impl Stay {
    pub fn night_dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.nights).map(move |i| self.first_night + Duration::days(i64::from(i)))
    }
}

/// Parses and validates a request.
pub fn parse_request(json_text: &str) -> Result<SymbolicRequest, RequestError> {
    let value: serde_json::Value =
        serde_json::from_str(json_text).map_err(|e| RequestError::MalformedJson(e.to_string()))?;
    request_from_value(value)
}

/// Validates an already-parsed JSON value as a request.
pub fn request_from_value(value: serde_json::Value) -> Result<SymbolicRequest, RequestError> {
    let raw: RawRequest = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        RequestError::SchemaViolation {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    SymbolicRequest::try_from(raw).map_err(|e| RequestError::InvariantViolation(e.0))
}

/// Canonical JSON text of a request.
pub fn serialize_request(r: &SymbolicRequest) -> String {
    serde_json::to_string(r).expect("requests always serialize")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub is_match: bool,
    pub mismatched_fields: Vec<String>,
}

/// Flattens a request into `path -> value` leaves. Field values (windows,
/// sets) are atomic; sections and legs are expanded one level.
pub fn field_leaves(r: &SymbolicRequest) -> BTreeMap<String, serde_json::Value> {
    let value = serde_json::to_value(r).expect("requests always serialize");
    let mut out = BTreeMap::new();
    let serde_json::Value::Object(top) = value else {
        unreachable!("requests serialize to objects")
    };
    for (key, v) in top {
        match (key.as_str(), v) {
            ("legs", serde_json::Value::Array(legs)) => {
                for (i, leg) in legs.into_iter().enumerate() {
                    if let serde_json::Value::Object(fields) = leg {
                        for (f, fv) in fields {
                            out.insert(format!("legs[{i}].{f}"), fv);
                        }
                    }
                }
            }
            (section, serde_json::Value::Object(fields)) => {
                for (f, fv) in fields {
                    out.insert(format!("{section}.{f}"), fv);
                }
            }
            (name, other) => {
                out.insert(name.to_string(), other);
            }
        }
    }
    out
}

/// Field-by-field comparison. Absent and present-with-any-value differ.
pub fn exact_match(a: &SymbolicRequest, b: &SymbolicRequest) -> MatchResult {
    let la = field_leaves(a);
    let lb = field_leaves(b);
    let keys: BTreeSet<&String> = la.keys().chain(lb.keys()).collect();
    let mismatched_fields: Vec<String> = keys
        .into_iter()
        .filter(|k| la.get(*k) != lb.get(*k))
        .cloned()
        .collect();
    MatchResult {
        is_match: mismatched_fields.is_empty(),
        mismatched_fields,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightOption {
    pub id: String,
    pub origin: Airport,
    pub destination: Airport,
    pub departure: NaiveDateTime,
    pub arrival: NaiveDateTime,
    pub price: Money,
    pub cabin_class: CabinClass,
    pub is_basic_economy: bool,
    pub is_mixed_cabin: bool,
    pub is_nonstop: bool,
    pub airline: String,
    pub plane_type: String,
    pub refundable: bool,
}

impl FlightOption {
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.departure >= self.arrival {
            return Err(ValidationError(format!(
                "flight {}: departure {} is not before arrival {}",
                self.id, self.departure, self.arrival
            )));
        }
        if self.price.0 <= 0 {
            return Err(ValidationError(format!(
                "flight {}: price must be positive",
                self.id
            )));
        }
        Ok(())
    }

    pub fn duration_minutes(&self) -> i64 {
        (self.arrival - self.departure).num_minutes()
    }

    pub fn serves(&self, leg: &TripLeg) -> bool {
        self.origin == leg.origin
            && self.destination == leg.destination
            && self.departure.date() == leg.date
    }
}

/// Inclusive date range.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Self {
        DateRange { start, end }
    }

    pub fn is_valid(&self) -> bool {
        self.start <= self.end
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        d >= self.start && d <= self.end
    }

    pub fn num_days(&self) -> i64 {
        (self.end - self.start).num_days() + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HotelOption {
    pub id: String,
    pub city: Airport,
    pub name: String,
    pub brand: String,
    pub rating: Rating,
    pub price_per_night: Money,
    pub earliest_checkin: NaiveTime,
    pub latest_checkout: NaiveTime,
    /// Nights (by check-in date) on which rooms are available.
    pub available_dates: DateRange,
}

impl HotelOption {
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.price_per_night.0 <= 0 {
            return Err(ValidationError(format!(
                "hotel {}: nightly price must be positive",
                self.id
            )));
        }
        if self.rating > Rating::MAX {
            return Err(ValidationError(format!(
                "hotel {}: rating {} is outside [0, 5]",
                self.id, self.rating
            )));
        }
        if !self.available_dates.is_valid() {
            return Err(ValidationError(format!(
                "hotel {}: availability range is empty",
                self.id
            )));
        }
        Ok(())
    }

    pub fn available_for(&self, stay: &Stay) -> bool {
        stay.night_dates().all(|d| self.available_dates.contains(d))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inventory {
    pub flights: Vec<FlightOption>,
    pub hotels: Vec<HotelOption>,
}

impl Inventory {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut ids = HashSet::new();
        for f in &self.flights {
            f.validate()?;
            if !ids.insert(f.id.as_str()) {
                return Err(ValidationError(format!("duplicate flight id {}", f.id)));
            }
        }
        ids.clear();
        for h in &self.hotels {
            h.validate()?;
            if !ids.insert(h.id.as_str()) {
                return Err(ValidationError(format!("duplicate hotel id {}", h.id)));
            }
        }
        Ok(())
    }

    pub fn flight(&self, id: &str) -> Option<&FlightOption> {
        self.flights.iter().find(|f| f.id == id)
    }

    pub fn hotel(&self, id: &str) -> Option<&HotelOption> {
        self.hotels.iter().find(|h| h.id == id)
    }

    /// Options relevant to `request`: flights serving one of its legs and
    /// hotels in one of its stay cities.
    pub fn relevant_to(&self, request: &SymbolicRequest) -> Inventory {
        let stays = request.stays();
        Inventory {
            flights: self
                .flights
                .iter()
                .filter(|f| request.legs.iter().any(|l| f.serves(l)))
                .cloned()
                .collect(),
            hotels: self
                .hotels
                .iter()
                .filter(|h| stays.iter().any(|s| s.city == h.city))
                .cloned()
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChosenFlight {
    pub leg: usize,
    pub flight_id: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChosenHotel {
    pub stay: usize,
    pub hotel_id: String,
    pub check_in: NaiveDate,
    pub nights: u32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub flight_total: Money,
    pub hotel_total: Money,
    pub grand_total: Money,
    pub soft_penalty: Money,
}

/// A concrete plan: selections, the timeline they imply, and what it costs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Itinerary {
    pub chosen_flights: Vec<ChosenFlight>,
    pub chosen_hotels: Vec<ChosenHotel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeline: Option<Schedule>,
    pub cost: CostBreakdown,
}

impl Itinerary {
    pub fn empty() -> Self {
        Itinerary {
            chosen_flights: Vec::new(),
            chosen_hotels: Vec::new(),
            timeline: None,
            cost: CostBreakdown::default(),
        }
    }

    /// Same selections, no timeline: the form used to re-evaluate a plan
    /// against a different request.
    pub fn selections_only(&self) -> Itinerary {
        Itinerary {
            timeline: None,
            ..self.clone()
        }
    }
}

/// One dataset row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub request: SymbolicRequest,
    pub inventory: Inventory,
    #[serde(default)]
    pub nl_text: String,
}

pub(crate) fn date_at(d: NaiveDate, minutes: u32) -> NaiveDateTime {
    d.and_hms_opt(0, 0, 0).expect("midnight exists") + Duration::minutes(i64::from(minutes))
}

pub(crate) fn ordinal_suffix(day: u32) -> &'static str {
    match (day % 10, day % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    }
}

/// `January 15th, 2025`
pub fn long_date(d: NaiveDate) -> String {
    format!(
        "{} {}{}, {}",
        d.format("%B"),
        d.day(),
        ordinal_suffix(d.day()),
        d.year()
    )
}
