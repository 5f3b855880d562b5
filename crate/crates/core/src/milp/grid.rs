//! Discretized trip timeline.
//!
//! Slot `t` covers `[origin + t*s, origin + (t+1)*s)`. Option times round
//! outward to conservative slots: departures floor, arrivals ceil, hotel
//! coverage keeps only slots lying fully inside the check-in/check-out span.

use std::ops::Range;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{date_at, FlightOption, HotelOption, Stay, SymbolicRequest, MINUTES_PER_DAY};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("trip spans {days} days, more than the {cap}-day cap")]
    SpanTooLong { days: i64, cap: u32 },
    #[error("slot length {0} min must be positive and divide a day")]
    BadSlotLength(u32),
    #[error("{what} falls outside the planning grid")]
    OutsideGrid { what: String },
}

/// Clock bounds of the nightly sleep window: `[start on day k, end on day k+1)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NightSpec {
    pub start_minute: u16,
    pub end_minute: u16,
}

impl Default for NightSpec {
    fn default() -> Self {
        NightSpec {
            start_minute: 22 * 60,
            end_minute: 8 * 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NightWindow {
    /// Calendar date on which the night starts.
    pub date: NaiveDate,
    pub slots: Range<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub slot_minutes: u32,
    pub origin: NaiveDateTime,
    pub num_slots: usize,
    pub nights: Vec<NightWindow>,
}

/// Builds the grid from midnight of the first leg date to midnight after the
/// last leg date, with one night window per calendar night in between.
pub fn build_time_grid(
    request: &SymbolicRequest,
    slot_minutes: u32,
    night: NightSpec,
    max_span_days: u32,
) -> Result<TimeGrid, GridError> {
    if slot_minutes == 0 || u32::from(MINUTES_PER_DAY) % slot_minutes != 0 {
        return Err(GridError::BadSlotLength(slot_minutes));
    }
    let first = request.first_date();
    let days = (request.last_date() - first).num_days() + 1;
    if days > i64::from(max_span_days) {
        return Err(GridError::SpanTooLong {
            days,
            cap: max_span_days,
        });
    }
    let per_day = (u32::from(MINUTES_PER_DAY) / slot_minutes) as usize;
    let origin = date_at(first, 0);
    let s = i64::from(slot_minutes);
    let nights = (0..days - 1)
        .map(|k| {
            let start = k * 1440 + i64::from(night.start_minute);
            let end = (k + 1) * 1440 + i64::from(night.end_minute);
            NightWindow {
                date: first + Duration::days(k),
                slots: ceil_div(start, s) as usize..ceil_div(end, s) as usize,
            }
        })
        .collect();
    Ok(TimeGrid {
        slot_minutes,
        origin,
        num_slots: days as usize * per_day,
        nights,
    })
}

fn ceil_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b) + i64::from(a.rem_euclid(b) != 0)
}

impl TimeGrid {
    fn offset_minutes(&self, at: NaiveDateTime) -> i64 {
        (at - self.origin).num_minutes()
    }

    pub fn slot_floor(&self, at: NaiveDateTime) -> i64 {
        self.offset_minutes(at)
            .div_euclid(i64::from(self.slot_minutes))
    }

    pub fn slot_ceil(&self, at: NaiveDateTime) -> i64 {
        ceil_div(self.offset_minutes(at), i64::from(self.slot_minutes))
    }

    pub fn slot_start(&self, slot: usize) -> NaiveDateTime {
        self.origin + Duration::minutes(slot as i64 * i64::from(self.slot_minutes))
    }

    pub fn slots_per_day(&self) -> usize {
        (u32::from(MINUTES_PER_DAY) / self.slot_minutes) as usize
    }

    /// `(t_dep, t_land)` for a flight. The traveller is at the origin during
    /// `t_dep`, aboard during `t_dep+1 ..= t_land-1` and at the destination
    /// from `t_land`; at least one airborne slot is always kept.
    pub fn flight_slots(&self, flight: &FlightOption) -> Result<(usize, usize), GridError> {
        let dep = self.slot_floor(flight.departure);
        let land = self.slot_ceil(flight.arrival).max(dep + 2);
        if dep < 0 || land >= self.num_slots as i64 {
            return Err(GridError::OutsideGrid {
                what: format!("flight {}", flight.id),
            });
        }
        Ok((dep as usize, land as usize))
    }

    /// Slots during which a booking of `hotel` for `stay` lets the traveller
    /// sleep: per booked night, check-in on that date to check-out the next day.
    pub fn hotel_slots(&self, hotel: &HotelOption, stay: &Stay) -> Vec<usize> {
        let s = i64::from(self.slot_minutes);
        let checkin = i64::from(crate::model::minute_of_day(hotel.earliest_checkin));
        let checkout = i64::from(crate::model::minute_of_day(hotel.latest_checkout));
        let mut out = Vec::new();
        for date in stay.night_dates() {
            let day = (date - self.origin.date()).num_days();
            let from = ceil_div(day * 1440 + checkin, s).max(0);
            let to = ((day + 1) * 1440 + checkout)
                .div_euclid(s)
                .min(self.num_slots as i64);
            for t in from..to {
                let t = t as usize;
                if out.last().is_none_or(|&last| last < t) {
                    out.push(t);
                }
            }
        }
        out
    }
}
