//! Synthetic requests and inventories.
//!
//! Every sample draws from its own ChaCha stream selected by the sample
//! index, so generation is a pure function of `(params, index)` and can run
//! in any order or in parallel. Inventories contain one planted combination
//! that satisfies every hard constraint of the request; all other options
//! get random attributes.

mod csv_table;

pub use csv_table::{
    ingest_flight_csv, replicate_dates, BaseFlightTable, ColumnMap, IngestError, IngestReport,
    SkippedRow,
};

use std::collections::BTreeSet;

use chrono::{Duration, NaiveDate};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::model::{
    date_at, minute_of_day, serialize_request, AirlineConstraints, Airport, BudgetConstraints,
    CabinClass, DatasetRecord, DateRange, FlightOption, HotelConstraints, HotelOption, Inventory,
    Money, Rating, SymbolicRequest, TimeWindow, TripKind, TripLeg,
};

pub const DEFAULT_CITIES: [&str; 20] = [
    "ATL", "AUS", "BOS", "CLT", "DEN", "DFW", "DTW", "IAH", "JFK", "LAS", "LAX", "MCO", "MIA",
    "MSP", "ORD", "PHL", "PHX", "SAN", "SEA", "SFO",
];
pub const DEFAULT_AIRLINES: [&str; 8] = [
    "Alaska",
    "American",
    "Delta",
    "Frontier",
    "JetBlue",
    "Southwest",
    "Spirit",
    "United",
];
pub const DEFAULT_PLANES: [&str; 6] = [
    "Airbus A320",
    "Airbus A321",
    "Boeing 737",
    "Boeing 757",
    "Boeing 787",
    "Embraer 175",
];
pub const DEFAULT_BRANDS: [&str; 8] = [
    "Best Western",
    "Hampton Inn",
    "Hilton",
    "Holiday Inn",
    "Hyatt",
    "Marriott",
    "Sheraton",
    "Westin",
];

/// Inclusive integer range.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: u32,
    pub max: u32,
}

impl IntRange {
    pub const fn new(min: u32, max: u32) -> Self {
        IntRange { min, max }
    }

    fn sample(&self, rng: &mut impl Rng) -> u32 {
        rng.random_range(self.min..=self.max)
    }
}

/// Probability that each optional field is present in a generated request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PresenceProbs {
    pub price_total_max: f64,
    pub cabin_class: f64,
    pub refundable: f64,
    pub nonstop_only: f64,
    pub must_not_basic_economy: f64,
    pub no_mixed_cabin: f64,
    pub avoid_red_eye: f64,
    pub departure_time: f64,
    pub arrival_time: f64,
    pub plane_types: f64,
    pub preferred_airlines: f64,
    pub daily_budget_max: f64,
    pub total_budget_max: f64,
    pub min_rating: f64,
    pub brands: f64,
    pub total_budget: f64,
    pub everyday_budget: f64,
}

impl Default for PresenceProbs {
    fn default() -> Self {
        PresenceProbs {
            price_total_max: 0.7,
            cabin_class: 0.6,
            refundable: 0.3,
            nonstop_only: 0.5,
            must_not_basic_economy: 0.4,
            no_mixed_cabin: 0.3,
            avoid_red_eye: 0.4,
            departure_time: 0.4,
            arrival_time: 0.3,
            plane_types: 0.15,
            preferred_airlines: 0.25,
            daily_budget_max: 0.6,
            total_budget_max: 0.5,
            min_rating: 0.5,
            brands: 0.2,
            total_budget: 0.4,
            everyday_budget: 0.2,
        }
    }
}

impl PresenceProbs {
    pub fn all(p: f64) -> Self {
        PresenceProbs {
            price_total_max: p,
            cabin_class: p,
            refundable: p,
            nonstop_only: p,
            must_not_basic_economy: p,
            no_mixed_cabin: p,
            avoid_red_eye: p,
            departure_time: p,
            arrival_time: p,
            plane_types: p,
            preferred_airlines: p,
            daily_budget_max: p,
            total_budget_max: p,
            min_rating: p,
            brands: p,
            total_budget: p,
            everyday_budget: p,
        }
    }

    fn values(&self) -> [(&'static str, f64); 17] {
        [
            ("airline.price_total_max", self.price_total_max),
            ("airline.cabin_class", self.cabin_class),
            ("airline.refundable", self.refundable),
            ("airline.nonstop_only", self.nonstop_only),
            (
                "airline.must_not_basic_economy",
                self.must_not_basic_economy,
            ),
            ("airline.no_mixed_cabin", self.no_mixed_cabin),
            ("airline.avoid_red_eye", self.avoid_red_eye),
            ("airline.departure_time", self.departure_time),
            ("airline.arrival_time", self.arrival_time),
            ("airline.plane_types", self.plane_types),
            ("airline.preferred_airlines", self.preferred_airlines),
            ("hotel.daily_budget_max", self.daily_budget_max),
            ("hotel.total_budget_max", self.total_budget_max),
            ("hotel.min_rating", self.min_rating),
            ("hotel.brands", self.brands),
            ("budget.total_budget", self.total_budget),
            ("budget.everyday_budget", self.everyday_budget),
        ]
    }

    /// `(field path, probability)` pairs in canonical field order.
    pub fn by_field(&self) -> Vec<(&'static str, f64)> {
        self.values().to_vec()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenParams {
    pub rng_seed: u64,
    pub one_way_fraction: f64,
    /// Share of round trips that visit two destinations instead of one.
    pub three_city_fraction: f64,
    pub city_pool: Vec<Airport>,
    pub date_horizon: DateRange,
    pub stay_nights: IntRange,
    pub flights_per_leg: IntRange,
    pub hotels_per_city: IntRange,
    pub presence: PresenceProbs,
    /// Probability that a present boolean flag is `true`.
    pub flag_true_prob: f64,
    /// Relative standard deviation of hotel price noise.
    pub price_noise_sigma: f64,
    /// Maximum rating jitter in tenths of a star applied by [`perturb_hotels`].
    pub rating_jitter: u8,
    /// Probability that a record's text is rendered from a copy with two leg
    /// dates swapped.
    pub date_swap_noise: f64,
    pub airlines: Vec<String>,
    pub plane_types: Vec<String>,
    pub brands: Vec<String>,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            rng_seed: 0,
            one_way_fraction: 0.04,
            three_city_fraction: 0.13,
            city_pool: DEFAULT_CITIES.iter().map(|c| Airport::new(c)).collect(),
            date_horizon: DateRange::new(
                NaiveDate::from_ymd_opt(2025, 1, 1).expect("valid date"),
                NaiveDate::from_ymd_opt(2025, 12, 31).expect("valid date"),
            ),
            stay_nights: IntRange::new(1, 4),
            flights_per_leg: IntRange::new(3, 8),
            hotels_per_city: IntRange::new(3, 6),
            presence: PresenceProbs::default(),
            flag_true_prob: 0.8,
            price_noise_sigma: 0.15,
            rating_jitter: 0,
            date_swap_noise: 0.0,
            airlines: DEFAULT_AIRLINES.iter().map(|s| s.to_string()).collect(),
            plane_types: DEFAULT_PLANES.iter().map(|s| s.to_string()).collect(),
            brands: DEFAULT_BRANDS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), String> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(format!("{name}: probability {p} is outside [0, 1]"))
            }
        };
        prob("one_way_fraction", self.one_way_fraction)?;
        prob("three_city_fraction", self.three_city_fraction)?;
        prob("flag_true_prob", self.flag_true_prob)?;
        prob("date_swap_noise", self.date_swap_noise)?;
        for (name, p) in self.presence.values() {
            prob(
                &format!("presence.{}", name.rsplit('.').next().unwrap_or(name)),
                p,
            )?;
        }
        for (name, r) in [
            ("stay_nights", self.stay_nights),
            ("flights_per_leg", self.flights_per_leg),
            ("hotels_per_city", self.hotels_per_city),
        ] {
            if r.min == 0 || r.min > r.max {
                return Err(format!(
                    "{name}: range [{}, {}] must be non-empty and start at 1 or more",
                    r.min, r.max
                ));
            }
        }
        let needed = if self.three_city_fraction > 0.0 { 3 } else { 2 };
        let distinct: BTreeSet<&Airport> = self.city_pool.iter().collect();
        if distinct.len() < needed || self.city_pool.iter().any(|c| !c.is_well_formed()) {
            return Err(format!(
                "city_pool: need at least {needed} distinct well-formed airport codes"
            ));
        }
        let span = i64::from(self.stay_nights.max) * 2 + 1;
        if !self.date_horizon.is_valid() || self.date_horizon.num_days() < span {
            return Err(format!("date_horizon: must cover at least {span} days"));
        }
        if !(self.price_noise_sigma >= 0.0 && self.price_noise_sigma.is_finite()) {
            return Err("price_noise_sigma: must be a finite non-negative number".into());
        }
        for (name, list) in [
            ("airlines", &self.airlines),
            ("plane_types", &self.plane_types),
            ("brands", &self.brands),
        ] {
            if list.is_empty() || list.iter().any(|n| !crate::model::is_valid_name(n)) {
                return Err(format!("{name}: need at least one grammar-safe name"));
            }
        }
        Ok(())
    }

    fn rng_for(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(stream);
        rng
    }
}

/// FNV-1a, used to derive a stable stream from a request's canonical text.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn pick_set(rng: &mut impl Rng, pool: &[String], max: usize) -> BTreeSet<String> {
    let k = rng.random_range(1..=max.min(pool.len()));
    pool.choose_multiple(rng, k).cloned().collect()
}

fn whole_dollars(rng: &mut impl Rng, lo: i64, hi: i64) -> Money {
    Money::from_dollars(rng.random_range(lo..=hi))
}

/// Sample `index` of the request distribution.
pub fn gen_request(params: &GenParams, index: u64) -> SymbolicRequest {
    let mut rng = params.rng_for(index.wrapping_mul(2));
    let p = &params.presence;

    let one_way = rng.random_bool(params.one_way_fraction);
    let three_city = !one_way && rng.random_bool(params.three_city_fraction);
    let n_cities = if three_city { 3 } else { 2 };
    let cities: Vec<Airport> = params
        .city_pool
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .cloned()
        .collect::<Vec<_>>()
        .choose_multiple(&mut rng, n_cities)
        .cloned()
        .collect();
    let stays: Vec<u32> = if one_way {
        Vec::new()
    } else {
        (0..n_cities - 1)
            .map(|_| params.stay_nights.sample(&mut rng))
            .collect()
    };
    let span: i64 = stays.iter().map(|&n| i64::from(n)).sum();
    let latest_start = params.date_horizon.num_days() - 1 - span;
    let mut date = params.date_horizon.start + Duration::days(rng.random_range(0..=latest_start));

    let mut route = cities.clone();
    if !one_way {
        route.push(cities[0].clone());
    }
    let mut legs = Vec::new();
    for k in 0..route.len() - 1 {
        legs.push(TripLeg {
            date,
            origin: route[k].clone(),
            destination: route[k + 1].clone(),
        });
        if let Some(&n) = stays.get(k) {
            date += Duration::days(i64::from(n));
        }
    }
    let n_legs = legs.len() as i64;
    let nights = span;

    let present = |rng: &mut ChaCha8Rng, prob: f64| rng.random_bool(prob);
    let flag = |rng: &mut ChaCha8Rng| Some(rng.random_bool(params.flag_true_prob));

    let mut airline = AirlineConstraints::default();
    if present(&mut rng, p.price_total_max) {
        airline.price_total_max = Some(Money::from_dollars(n_legs * rng.random_range(150..=600)));
    }
    if present(&mut rng, p.cabin_class) {
        let weights = [55u32, 15, 20, 10];
        let roll = rng.random_range(0..100);
        let mut acc = 0;
        let mut cabin = CabinClass::Coach;
        for (c, w) in CabinClass::ALL.into_iter().zip(weights) {
            acc += w;
            if roll < acc {
                cabin = c;
                break;
            }
        }
        airline.cabin_class = Some(cabin);
    }
    if present(&mut rng, p.refundable) {
        airline.refundable = flag(&mut rng);
    }
    if present(&mut rng, p.nonstop_only) {
        airline.nonstop_only = flag(&mut rng);
    }
    if present(&mut rng, p.must_not_basic_economy) {
        airline.must_not_basic_economy = flag(&mut rng);
    }
    if present(&mut rng, p.no_mixed_cabin) {
        airline.no_mixed_cabin = flag(&mut rng);
    }
    if present(&mut rng, p.avoid_red_eye) {
        airline.avoid_red_eye = flag(&mut rng);
    }
    if present(&mut rng, p.departure_time) {
        let start = rng.random_range(5..=16) * 60;
        let len = rng.random_range(3..=8) * 60;
        airline.departure_time = Some(TimeWindow::new(start, (start + len).min(1440)));
    }
    if present(&mut rng, p.arrival_time) {
        let start = rng.random_range(8..=18) * 60;
        let len = rng.random_range(3..=6) * 60;
        airline.arrival_time = Some(TimeWindow::new(start, (start + len).min(1440)));
    }
    if present(&mut rng, p.plane_types) {
        airline.plane_types = Some(pick_set(&mut rng, &params.plane_types, 3));
    }
    if present(&mut rng, p.preferred_airlines) {
        airline.preferred_airlines = Some(pick_set(&mut rng, &params.airlines, 3));
    }

    let mut hotel = HotelConstraints::default();
    if present(&mut rng, p.daily_budget_max) {
        hotel.daily_budget_max = Some(whole_dollars(&mut rng, 100, 400));
    }
    if present(&mut rng, p.total_budget_max) {
        hotel.total_budget_max = Some(Money::from_dollars(
            nights.max(1) * rng.random_range(100..=400),
        ));
    }
    if present(&mut rng, p.min_rating) {
        hotel.min_rating = Some(Rating(rng.random_range(6..=9) * 5));
    }
    if present(&mut rng, p.brands) {
        hotel.brands = Some(pick_set(&mut rng, &params.brands, 3));
    }

    let mut budget = BudgetConstraints::default();
    if present(&mut rng, p.total_budget) {
        budget.total_budget = Some(Money::from_dollars(
            n_legs * rng.random_range(150..=600) + nights * rng.random_range(100..=400),
        ));
    }
    if present(&mut rng, p.everyday_budget) {
        budget.everyday_budget = Some(whole_dollars(&mut rng, 100, 400));
    }

    let request = SymbolicRequest {
        legs,
        trip_kind: if one_way {
            TripKind::OneWay
        } else {
            TripKind::RoundTrip
        },
        airline,
        hotel,
        budget,
    };
    debug_assert!(request.validate().is_ok(), "generator produced {request:?}");
    request
}

fn cabin_factor(c: CabinClass) -> f64 {
    match c {
        CabinClass::Coach => 1.0,
        CabinClass::Premium => 1.5,
        CabinClass::Business => 2.5,
        CabinClass::First => 3.5,
    }
}

struct Allowance {
    per_leg: i64,
    per_night: i64,
}

/// Largest planted prices (cents) that keep every budget of `r` satisfied.
fn allowance(r: &SymbolicRequest) -> Allowance {
    let legs = r.legs.len() as i64;
    let nights = i64::from(r.total_nights());
    let mut per_leg = r.airline.price_total_max.map_or(i64::MAX, |m| m.0 / legs);
    let mut per_night = [r.hotel.daily_budget_max, r.budget.everyday_budget]
        .into_iter()
        .flatten()
        .map(|m| m.0)
        .chain(
            r.hotel
                .total_budget_max
                .filter(|_| nights > 0)
                .map(|m| m.0 / nights),
        )
        .min()
        .unwrap_or(i64::MAX);
    if let Some(total) = r.budget.total_budget {
        let weight_f = legs * 250;
        let weight_h = nights * 150;
        per_leg = per_leg.min(total.0 * weight_f / (weight_f + weight_h) / legs);
        if nights > 0 {
            per_night = per_night.min(total.0 * weight_h / (weight_f + weight_h) / nights);
        }
    }
    Allowance { per_leg, per_night }
}

fn planted_price(rng: &mut impl Rng, natural: i64, cap: i64) -> Money {
    let ceiling = natural.min(cap);
    let cents = (ceiling as f64 * rng.random_range(0.6..=1.0)) as i64;
    // Whole dollars, rounded down so the cap still holds.
    Money((cents / 100).max(1) * 100)
}

struct FlightDraw {
    dep_minute: u32,
    duration: u32,
}

/// Departure minute and duration; final-leg flights leave by 21:00 and land
/// by 23:00 on their own date so they stay on the grid.
fn random_times(rng: &mut impl Rng, last_leg: bool) -> FlightDraw {
    let duration = rng.random_range(4..=26) * 15;
    let dep_minute = if last_leg {
        rng.random_range(0..=(23 * 60 - duration).min(21 * 60) / 15) * 15
    } else {
        rng.random_range(0..=95) * 15
    };
    FlightDraw {
        dep_minute,
        duration,
    }
}

/// Times for the planted flight: inside the requested windows where that is
/// possible, daytime, and landing by 22:00.
fn planted_times(rng: &mut impl Rng, airline: &AirlineConstraints) -> FlightDraw {
    let duration = rng.random_range(4..=20) * 15;
    let latest = 22 * 60 - duration;
    let (mut lo, mut hi) = (6 * 60, latest.min(18 * 60));
    if let Some(w) = airline.departure_time {
        let (a, b) = (
            lo.max(u32::from(w.start)),
            hi.min(u32::from(w.end).saturating_sub(1)),
        );
        if a.div_ceil(15) <= b / 15 {
            (lo, hi) = (a, b);
        }
    }
    if let Some(w) = airline.arrival_time {
        let a = lo.max(u32::from(w.start).saturating_sub(duration));
        let b = hi.min((u32::from(w.end) - 1).saturating_sub(duration));
        if a.div_ceil(15) <= b / 15 {
            (lo, hi) = (a, b);
        }
    }
    let dep_minute = rng.random_range(lo.div_ceil(15)..=hi / 15) * 15;
    FlightDraw {
        dep_minute,
        duration,
    }
}

/// Inventory for `request`, seeded by the request's canonical text.
pub fn gen_inventory(params: &GenParams, request: &SymbolicRequest) -> Inventory {
    gen_inventory_with_base(params, request, None)
}

/// Like [`gen_inventory`]; when `base` is given, unplanted flights copy
/// price, duration, time of day and attributes from its rows.
pub fn gen_inventory_with_base(
    params: &GenParams,
    request: &SymbolicRequest,
    base: Option<&BaseFlightTable>,
) -> Inventory {
    let stream = fnv1a(serialize_request(request).as_bytes()) | 1;
    let mut rng = params.rng_for(stream);
    let allow = allowance(request);
    let a = &request.airline;
    let n_legs = request.legs.len();
    let mut flights = Vec::new();

    for (k, leg) in request.legs.iter().enumerate() {
        let count = params.flights_per_leg.sample(&mut rng) as usize;
        let natural = rng.random_range(120..=450) * 100;
        let mut leg_flights = Vec::with_capacity(count);

        // Planted option.
        let cabin = a.cabin_class.unwrap_or(CabinClass::Coach);
        let t = planted_times(&mut rng, a);
        let departure = date_at(leg.date, t.dep_minute);
        leg_flights.push(FlightOption {
            id: String::new(),
            origin: leg.origin.clone(),
            destination: leg.destination.clone(),
            departure,
            arrival: departure + Duration::minutes(i64::from(t.duration)),
            price: planted_price(
                &mut rng,
                (natural as f64 * cabin_factor(cabin)) as i64,
                allow.per_leg,
            ),
            cabin_class: cabin,
            is_basic_economy: a.must_not_basic_economy != Some(true)
                && cabin == CabinClass::Coach
                && rng.random_bool(0.2),
            is_mixed_cabin: a.no_mixed_cabin != Some(true) && rng.random_bool(0.15),
            is_nonstop: a.nonstop_only == Some(true) || rng.random_bool(0.6),
            airline: match &a.preferred_airlines {
                Some(set) => set
                    .iter()
                    .collect::<Vec<_>>()
                    .choose(&mut rng)
                    .map(|s| s.to_string()),
                None => params.airlines.choose(&mut rng).cloned(),
            }
            .expect("airline pools are non-empty"),
            plane_type: match &a.plane_types {
                Some(set) => set
                    .iter()
                    .collect::<Vec<_>>()
                    .choose(&mut rng)
                    .map(|s| s.to_string()),
                None => params.plane_types.choose(&mut rng).cloned(),
            }
            .expect("plane pools are non-empty"),
            refundable: a.refundable == Some(true) || rng.random_bool(0.4),
        });

        for _ in 1..count {
            let sampled = base.and_then(|b| b.rows.choose(&mut rng));
            let f = match sampled {
                Some(row) => {
                    let duration = row.duration_minutes().clamp(45, 23 * 60 - 15);
                    let mut dep_minute = u32::from(minute_of_day(row.departure.time()));
                    if k + 1 == n_legs {
                        dep_minute =
                            dep_minute.min((23 * 60 - duration as u32).min(21 * 60) / 15 * 15);
                    }
                    let departure = date_at(leg.date, dep_minute);
                    FlightOption {
                        id: String::new(),
                        origin: leg.origin.clone(),
                        destination: leg.destination.clone(),
                        departure,
                        arrival: departure + Duration::minutes(duration),
                        ..row.clone()
                    }
                }
                None => {
                    let cabin = *CabinClass::ALL.choose(&mut rng).expect("non-empty");
                    let t = random_times(&mut rng, k + 1 == n_legs);
                    let departure = date_at(leg.date, t.dep_minute);
                    let price =
                        (natural as f64 * cabin_factor(cabin) * rng.random_range(0.5..=1.8)) as i64;
                    FlightOption {
                        id: String::new(),
                        origin: leg.origin.clone(),
                        destination: leg.destination.clone(),
                        departure,
                        arrival: departure + Duration::minutes(i64::from(t.duration)),
                        price: Money((price / 100).max(1) * 100),
                        cabin_class: cabin,
                        is_basic_economy: cabin == CabinClass::Coach && rng.random_bool(0.3),
                        is_mixed_cabin: rng.random_bool(0.2),
                        is_nonstop: rng.random_bool(0.55),
                        airline: params
                            .airlines
                            .choose(&mut rng)
                            .cloned()
                            .expect("non-empty"),
                        plane_type: params
                            .plane_types
                            .choose(&mut rng)
                            .cloned()
                            .expect("non-empty"),
                        refundable: rng.random_bool(0.35),
                    }
                }
            };
            leg_flights.push(f);
        }
        leg_flights.shuffle(&mut rng);
        flights.extend(leg_flights);
    }
    for (i, f) in flights.iter_mut().enumerate() {
        f.id = format!("f{i}");
    }

    let mut hotels = Vec::new();
    for stay in request.stays() {
        let count = params.hotels_per_city.sample(&mut rng) as usize;
        let last_night = stay.first_night + Duration::days(i64::from(stay.nights) - 1);
        let covering = DateRange::new(
            stay.first_night - Duration::days(rng.random_range(0..=3)),
            last_night + Duration::days(rng.random_range(0..=3)),
        );
        let mut city_hotels = Vec::with_capacity(count);
        let min_rating = request.hotel.min_rating.map_or(20, |r| r.0);
        let natural = rng.random_range(90..=300) * 100;
        let brand = match &request.hotel.brands {
            Some(set) => set
                .iter()
                .collect::<Vec<_>>()
                .choose(&mut rng)
                .map(|s| s.to_string()),
            None => params.brands.choose(&mut rng).cloned(),
        }
        .expect("brand pools are non-empty");
        city_hotels.push(HotelOption {
            id: String::new(),
            city: stay.city.clone(),
            name: String::new(),
            brand,
            rating: Rating(rng.random_range(min_rating.max(20)..=50)),
            price_per_night: planted_price(&mut rng, natural, allow.per_night),
            earliest_checkin: clock(15 * 60),
            latest_checkout: clock(11 * 60),
            available_dates: covering,
        });
        for _ in 1..count {
            let available_dates = if rng.random_bool(0.85) {
                covering
            } else {
                // Misses at least the last night of the stay.
                let end = last_night - Duration::days(1);
                DateRange::new(end - Duration::days(rng.random_range(0..=5)), end)
            };
            city_hotels.push(HotelOption {
                id: String::new(),
                city: stay.city.clone(),
                name: String::new(),
                brand: params.brands.choose(&mut rng).cloned().expect("non-empty"),
                rating: Rating(rng.random_range(20..=50)),
                price_per_night: Money(rng.random_range(60..=450) * 100),
                earliest_checkin: clock(rng.random_range(14..=16) * 60),
                latest_checkout: clock(rng.random_range(10..=12) * 60),
                available_dates,
            });
        }
        city_hotels.shuffle(&mut rng);
        hotels.extend(city_hotels);
    }
    for (i, h) in hotels.iter_mut().enumerate() {
        h.id = format!("h{i}");
        h.name = format!(
            "{} {} {}",
            h.brand,
            h.city,
            HOTEL_SUFFIXES[i % HOTEL_SUFFIXES.len()]
        );
    }
    debug_assert!(flights.iter().all(|f| f.departure < f.arrival));
    Inventory { flights, hotels }
}

const HOTEL_SUFFIXES: [&str; 5] = ["Airport", "Downtown", "Central", "Riverside", "Suites"];

fn clock(minutes: u32) -> chrono::NaiveTime {
    chrono::NaiveTime::from_num_seconds_from_midnight_opt(minutes * 60, 0)
        .expect("minute within a day")
}

/// Full record `index`: request, inventory and rendered text.
pub fn gen_record(params: &GenParams, index: u64, base: Option<&BaseFlightTable>) -> DatasetRecord {
    let request = gen_request(params, index);
    let inventory = gen_inventory_with_base(params, &request, base);
    let mut rng = params.rng_for(index.wrapping_mul(2) + 1);
    let variant_seed: u64 = rng.random();
    let nl_text = if request.legs.len() >= 2 && rng.random_bool(params.date_swap_noise) {
        let mut noisy = request.clone();
        let i = rng.random_range(0..noisy.legs.len() - 1);
        let (a, b) = (noisy.legs[i].date, noisy.legs[i + 1].date);
        noisy.legs[i].date = b;
        noisy.legs[i + 1].date = a;
        crate::nl::render_nl(&noisy, variant_seed)
    } else {
        crate::nl::render_nl(&request, variant_seed)
    };
    DatasetRecord {
        id: format!("r{index}"),
        request,
        inventory,
        nl_text,
    }
}

/// Multiplies nightly prices by mean-one lognormal noise with relative
/// spread `sigma` and jitters ratings by up to `rating_jitter` tenths.
pub fn perturb_hotels(hotels: &[HotelOption], params: &GenParams, seed: u64) -> Vec<HotelOption> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = params.price_noise_sigma;
    hotels
        .iter()
        .map(|h| {
            let mut h = h.clone();
            if sigma > 0.0 {
                let z: f64 = StandardNormal.sample(&mut rng);
                let factor = (sigma * z - sigma * sigma / 2.0).exp();
                h.price_per_night =
                    Money(((h.price_per_night.0 as f64 * factor).round() as i64).max(1));
            }
            if params.rating_jitter > 0 {
                let j = i16::from(params.rating_jitter);
                let delta = rng.random_range(-j..=j);
                h.rating = Rating((i16::from(h.rating.0) + delta).clamp(0, 50) as u8);
            }
            h
        })
        .collect()
}

/// DEN to MIA to JFK and back in January 2025: coach, non-stop, no basic
/// economy or mixed cabin, $1383 for flights, $317 a night and $952 total
/// for hotels.
pub fn demo_request() -> SymbolicRequest {
    let d = |day| NaiveDate::from_ymd_opt(2025, 1, day).expect("valid date");
    let leg = |day, o: &str, t: &str| TripLeg {
        date: d(day),
        origin: Airport::new(o),
        destination: Airport::new(t),
    };
    SymbolicRequest {
        legs: vec![
            leg(15, "DEN", "MIA"),
            leg(17, "MIA", "JFK"),
            leg(18, "JFK", "DEN"),
        ],
        trip_kind: TripKind::RoundTrip,
        airline: AirlineConstraints {
            price_total_max: Some(Money::from_dollars(1383)),
            cabin_class: Some(CabinClass::Coach),
            nonstop_only: Some(true),
            must_not_basic_economy: Some(true),
            no_mixed_cabin: Some(true),
            ..AirlineConstraints::default()
        },
        hotel: HotelConstraints {
            daily_budget_max: Some(Money::from_dollars(317)),
            total_budget_max: Some(Money::from_dollars(952)),
            ..HotelConstraints::default()
        },
        budget: BudgetConstraints::default(),
    }
}

/// Inventory for [`demo_request`] at interactive scale: 33 to 34 flights per
/// leg and 15 hotels per city.
pub fn demo_inventory(seed: u64) -> Inventory {
    let params = GenParams {
        rng_seed: seed,
        flights_per_leg: IntRange::new(33, 34),
        hotels_per_city: IntRange::new(15, 15),
        ..GenParams::default()
    };
    gen_inventory(&params, &demo_request())
}

/// Records `0..count`, generated in parallel and returned in index order.
pub fn gen_dataset(
    params: &GenParams,
    count: u64,
    base: Option<&BaseFlightTable>,
) -> Vec<DatasetRecord> {
    use rayon::prelude::*;
    (0..count)
        .into_par_iter()
        .map(|i| gen_record(params, i, base))
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
}

/// One JSON object per line.
pub fn write_jsonl(
    records: &[DatasetRecord],
    out: &mut impl std::io::Write,
) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Reads records written by [`write_jsonl`], validating every request and
/// inventory. Blank lines are ignored.
pub fn read_jsonl(input: impl std::io::BufRead) -> Result<Vec<DatasetRecord>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| DatasetError::Record {
            line: i + 1,
            message,
        };
        let record: DatasetRecord = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        record.request.validate().map_err(|e| bad(e.0))?;
        record.inventory.validate().map_err(|e| bad(e.0))?;
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_index_same_record() {
        let p = GenParams::default();
        for i in 0..20 {
            let a = gen_record(&p, i, None);
            let b = gen_record(&p, i, None);
            assert_eq!(
                serde_json::to_string(&a).unwrap(),
                serde_json::to_string(&b).unwrap()
            );
            a.request.validate().unwrap();
            a.inventory.validate().unwrap();
        }
    }

    #[test]
    fn zero_sigma_keeps_prices() {
        let p = GenParams {
            price_noise_sigma: 0.0,
            ..GenParams::default()
        };
        let inv = gen_inventory(&p, &gen_request(&p, 3));
        assert_eq!(perturb_hotels(&inv.hotels, &p, 9), inv.hotels);
        let noisy = GenParams::default();
        let a = perturb_hotels(&inv.hotels, &noisy, 9);
        assert_eq!(a, perturb_hotels(&inv.hotels, &noisy, 9));
        assert!(a.iter().all(|h| h.price_per_night.0 > 0));
    }

    #[test]
    fn jsonl_round_trip() {
        let records = gen_dataset(&GenParams::default(), 5, None);
        let mut buf = Vec::new();
        write_jsonl(&records, &mut buf).unwrap();
        let back = read_jsonl(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, records);
        let err = read_jsonl(std::io::Cursor::new("{}\n")).unwrap_err();
        assert!(matches!(err, DatasetError::Record { line: 1, .. }));
    }

    #[test]
    fn params_validation() {
        assert!(GenParams::default().validate().is_ok());
        let p = GenParams {
            flights_per_leg: IntRange::new(4, 2),
            ..GenParams::default()
        };
        assert!(p.validate().unwrap_err().contains("flights_per_leg"));
    }
}
