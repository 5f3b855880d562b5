//! Compilation of a request and its inventory into a time-indexed 0-1 program.
//!
//! The timeline is split into slots ([`TimeGrid`]). Binary variables say where
//! the traveller is in every slot (`u`), whether they sleep (`m`), whether an
//! event lets them move (`e`), and which flights (`f`) and hotels (`h`) are
//! booked. Flight and hotel bookings imply schedule facts through the big-M
//! pairs of [`encode_implication`]; budgets and soft windows are ordinary rows
//! and objective terms. [`evaluate_cost`] re-derives everything by direct
//! simulation and is the reference the solver output is checked against.

mod build;
mod encode;
mod grid;
mod model;
mod schedule;
mod simulate;

pub use build::{build_model, prefilter_options, ModelError};
pub use encode::{encode_implication, EncodeError, Literal, Operand};
pub use grid::{build_time_grid, GridError, NightSpec, NightWindow, TimeGrid};
pub use model::{
    Family, LinExpr, LinearConstraint, MilpModel, ModelLayout, Sense, VarId, VarRole, Variable,
};
pub use schedule::{Schedule, AIR};
pub use simulate::{evaluate_cost, Verdict, Violation};

use serde::{Deserialize, Serialize};

use crate::model::{minute_of_day, FlightOption, HotelOption, Money, SymbolicRequest};

/// Objective coefficients are cents scaled by this factor so that percentage
/// mode weights stay integral.
pub const OBJECTIVE_SCALE: i64 = 100;

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    #[default]
    MinCost,
    BetterHotel,
    BetterFlight,
}

impl ObjectiveMode {
    pub const ALL: [ObjectiveMode; 3] = [
        ObjectiveMode::MinCost,
        ObjectiveMode::BetterHotel,
        ObjectiveMode::BetterFlight,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ObjectiveMode::MinCost => "min_cost",
            ObjectiveMode::BetterHotel => "better_hotel",
            ObjectiveMode::BetterFlight => "better_flight",
        }
    }
}

impl std::str::FromStr for ObjectiveMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min_cost" => Ok(ObjectiveMode::MinCost),
            "better_hotel" => Ok(ObjectiveMode::BetterHotel),
            "better_flight" => Ok(ObjectiveMode::BetterFlight),
            other => Err(format!(
                "unknown mode `{other}` (expected min_cost, better_hotel or better_flight)"
            )),
        }
    }
}

/// Per-mode objective shape. Percentages weight the prices; the penalty
/// terms express hotel and flight quality in cents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeWeights {
    pub flight_pct: i64,
    pub hotel_pct: i64,
    /// Per tenth of a star below 5, per night.
    pub rating_penalty: Money,
    /// Per minute of flight duration.
    pub flight_minute_penalty: Money,
    /// Per flight that is not nonstop.
    pub connection_penalty: Money,
}

impl ModeWeights {
    pub fn plain(flight_pct: i64, hotel_pct: i64) -> Self {
        ModeWeights {
            flight_pct,
            hotel_pct,
            rating_penalty: Money::ZERO,
            flight_minute_penalty: Money::ZERO,
            connection_penalty: Money::ZERO,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModeWeightTable {
    pub min_cost: ModeWeights,
    pub better_hotel: ModeWeights,
    pub better_flight: ModeWeights,
}

impl Default for ModeWeightTable {
    fn default() -> Self {
        ModeWeightTable {
            min_cost: ModeWeights::plain(100, 100),
            better_hotel: ModeWeights {
                rating_penalty: Money(200),
                ..ModeWeights::plain(100, 50)
            },
            better_flight: ModeWeights {
                flight_minute_penalty: Money(25),
                connection_penalty: Money(5000),
                ..ModeWeights::plain(50, 100)
            },
        }
    }
}

impl ModeWeightTable {
    pub fn get(&self, mode: ObjectiveMode) -> &ModeWeights {
        match mode {
            ObjectiveMode::MinCost => &self.min_cost,
            ObjectiveMode::BetterHotel => &self.better_hotel,
            ObjectiveMode::BetterFlight => &self.better_flight,
        }
    }
}

/// Departure window `[start, end)` in minutes that may wrap past midnight.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockWindow {
    pub start_minute: u16,
    pub end_minute: u16,
}

impl ClockWindow {
    pub fn contains(&self, minute: u16) -> bool {
        if self.start_minute <= self.end_minute {
            minute >= self.start_minute && minute < self.end_minute
        } else {
            minute >= self.start_minute || minute < self.end_minute
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub slot_minutes: u32,
    /// Minimum sleep slots per night (`L`).
    pub min_sleep_slots: u32,
    pub night: NightSpec,
    /// Departures inside this window count as red-eye.
    pub red_eye: ClockWindow,
    pub big_m: i64,
    /// Cost per slot of deviation from a soft time window.
    pub soft_penalty_weight: Money,
    pub max_span_days: u32,
    pub objective_mode: ObjectiveMode,
    pub weights: ModeWeightTable,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            slot_minutes: 60,
            min_sleep_slots: 6,
            night: NightSpec::default(),
            red_eye: ClockWindow {
                start_minute: 23 * 60,
                end_minute: 5 * 60,
            },
            big_m: 1,
            soft_penalty_weight: Money::from_dollars(10),
            max_span_days: 10,
            objective_mode: ObjectiveMode::MinCost,
            weights: ModeWeightTable::default(),
        }
    }
}

impl ModelParams {
    pub fn with_mode(&self, mode: ObjectiveMode) -> ModelParams {
        ModelParams {
            objective_mode: mode,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.slot_minutes == 0 || 1440 % self.slot_minutes != 0 {
            return Err(format!(
                "slot_minutes: {} must be positive and divide 1440",
                self.slot_minutes
            ));
        }
        if self.min_sleep_slots < 1 {
            return Err("min_sleep_slots: must be at least 1".into());
        }
        if self.big_m < 1 {
            return Err("big_m: must be at least 1 for binary implications".into());
        }
        if self.night.start_minute < 720
            || self.night.start_minute >= 1440
            || self.night.end_minute > 720
        {
            return Err("night: start must lie in [12:00, 24:00) and end in [00:00, 12:00]".into());
        }
        if self.red_eye.start_minute >= 1440 || self.red_eye.end_minute > 1440 {
            return Err("red_eye: minutes must lie within one day".into());
        }
        if self.max_span_days == 0 {
            return Err("max_span_days: must be positive".into());
        }
        if self.soft_penalty_weight.0 < 0 {
            return Err("soft_penalty_weight: must be non-negative".into());
        }
        for (name, w) in [
            ("weights.min_cost", &self.weights.min_cost),
            ("weights.better_hotel", &self.weights.better_hotel),
            ("weights.better_flight", &self.weights.better_flight),
        ] {
            if w.flight_pct < 0
                || w.hotel_pct < 0
                || w.rating_penalty.0 < 0
                || w.flight_minute_penalty.0 < 0
                || w.connection_penalty.0 < 0
            {
                return Err(format!(
                    "{name}: weights and penalties must be non-negative"
                ));
            }
        }
        Ok(())
    }

    pub fn mode_weights(&self) -> &ModeWeights {
        self.weights.get(self.objective_mode)
    }

    pub fn is_red_eye(&self, flight: &FlightOption) -> bool {
        self.red_eye
            .contains(minute_of_day(flight.departure.time()))
    }

    /// Soft-window deviation of a flight, in whole slots (rounded up per window).
    pub fn deviation_slots(&self, request: &SymbolicRequest, flight: &FlightOption) -> i64 {
        let s = self.slot_minutes;
        let mut slots = 0;
        if let Some(w) = request.airline.departure_time {
            slots += w
                .deviation_minutes(minute_of_day(flight.departure.time()))
                .div_ceil(s);
        }
        if let Some(w) = request.airline.arrival_time {
            slots += w
                .deviation_minutes(minute_of_day(flight.arrival.time()))
                .div_ceil(s);
        }
        i64::from(slots)
    }

    pub fn soft_penalty(&self, request: &SymbolicRequest, flight: &FlightOption) -> Money {
        Money(self.deviation_slots(request, flight) * self.soft_penalty_weight.0)
    }

    /// Objective contribution of booking a flight (soft penalty excluded).
    pub fn flight_objective(&self, flight: &FlightOption) -> i64 {
        let w = self.mode_weights();
        let quality = w.flight_minute_penalty.0 * flight.duration_minutes()
            + if flight.is_nonstop {
                0
            } else {
                w.connection_penalty.0
            };
        w.flight_pct * flight.price.0 + OBJECTIVE_SCALE * quality
    }

    /// Objective contribution of booking a hotel for `nights` nights.
    pub fn hotel_objective(&self, hotel: &HotelOption, nights: u32) -> i64 {
        let w = self.mode_weights();
        let nights = i64::from(nights);
        let deficit = i64::from(50u8.saturating_sub(hotel.rating.0));
        w.hotel_pct * hotel.price_per_night.0 * nights
            + OBJECTIVE_SCALE * w.rating_penalty.0 * deficit * nights
    }
}
