use std::collections::BTreeSet;

use chrono::NaiveDate;
use regex::Captures;
use thiserror::Error;

use crate::model::{
    Airport, CabinClass, Money, Rating, SymbolicRequest, TimeWindow, TripKind, TripLeg,
};

use super::grammar::{compiled, headers, Clause, Section, CLOSERS, MONTHS, OPENERS};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    /// Byte span `[start, end)` of the first text the grammar cannot read.
    #[error("cannot parse `{text}` at {start}..{end}")]
    UnparsableSegment {
        start: usize,
        end: usize,
        text: String,
    },
    #[error("no travel legs found")]
    MissingLegs,
    #[error("field `{0}` is stated more than once")]
    DuplicateField(String),
    #[error("parsed request is invalid: {0}")]
    InvalidRequest(String),
}

/// Splits text into sentences at `.`, `!` or `?` followed by whitespace or
/// the end. Returns byte offsets of each trimmed sentence, terminator included.
fn sentences(text: &str) -> Vec<(usize, usize)> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        let at_boundary = i + 1 == bytes.len() || bytes[i + 1].is_ascii_whitespace();
        if matches!(b, b'.' | b'!' | b'?') && at_boundary {
            out.push((start, i + 1));
            start = i + 1;
        }
    }
    if start < bytes.len() {
        out.push((start, bytes.len()));
    }
    out.into_iter()
        .filter_map(|(s, e)| {
            let piece = &text[s..e];
            let lead = piece.len() - piece.trim_start().len();
            let trail = piece.len() - piece.trim_end().len();
            (s + lead < e - trail).then_some((s + lead, e - trail))
        })
        .collect()
}

struct Matched<'t> {
    clause: Clause,
    caps: Captures<'t>,
}

/// Splits `body` into a sequence of clauses, backtracking over ambiguous
/// prefixes. On failure returns the furthest offset reached.
fn clause_sequence<'t>(section: Section, body: &'t str) -> Result<Vec<Matched<'t>>, usize> {
    fn go<'t>(
        section: Section,
        body: &'t str,
        pos: usize,
        acc: &mut Vec<Matched<'t>>,
        furthest: &mut usize,
    ) -> bool {
        *furthest = (*furthest).max(pos);
        let rest = &body[pos..];
        for c in compiled(section) {
            let Some(caps) = c.regex.captures(rest) else {
                continue;
            };
            let len = caps.get(0).expect("whole match").end();
            let last = caps.name("sep").is_some_and(|s| s.as_str().is_empty());
            acc.push(Matched {
                clause: c.clause,
                caps,
            });
            if last {
                if pos + len == body.len() {
                    return true;
                }
            } else if go(section, body, pos + len, acc, furthest) {
                return true;
            }
            acc.pop();
        }
        false
    }
    let mut acc = Vec::new();
    let mut furthest = 0;
    if go(section, body, 0, &mut acc, &mut furthest) {
        Ok(acc)
    } else {
        Err(furthest)
    }
}

fn money(caps: &Captures<'_>) -> Result<Money, String> {
    let s = &caps["money"];
    let (whole, frac) = s.split_once('.').unwrap_or((s, "00"));
    let whole: i64 = whole
        .parse()
        .map_err(|_| format!("amount `{s}` is too large"))?;
    let frac: i64 = frac.parse().expect("two digits");
    whole
        .checked_mul(100)
        .and_then(|c| c.checked_add(frac))
        .map(Money)
        .ok_or_else(|| format!("amount `{s}` is too large"))
}

fn clock(s: &str) -> Result<u16, String> {
    let (h, m) = s.split_once(':').expect("HH:MM");
    let (h, m): (u16, u16) = (h.parse().expect("digits"), m.parse().expect("digits"));
    if m >= 60 || h * 60 + m > 1440 {
        return Err(format!("`{s}` is not a time of day"));
    }
    Ok(h * 60 + m)
}

fn window(caps: &Captures<'_>) -> Result<TimeWindow, String> {
    Ok(TimeWindow::new(clock(&caps["t1"])?, clock(&caps["t2"])?))
}

fn rating(caps: &Captures<'_>) -> Rating {
    let s = &caps["rating"];
    let (whole, frac) = s.split_once('.').unwrap_or((s, "0"));
    let tenths = whole.parse::<u8>().expect("digit") * 10 + frac.parse::<u8>().expect("digit");
    Rating(tenths)
}

fn name_list(caps: &Captures<'_>) -> Result<BTreeSet<String>, String> {
    let s = &caps["list"];
    let mut out = BTreeSet::new();
    for part in s.split(" or ").flat_map(|p| p.split(" and ")) {
        if part.is_empty() || part != part.trim() || !out.insert(part.to_string()) {
            return Err(format!("malformed name list `{s}`"));
        }
    }
    Ok(out)
}

fn leg(caps: &Captures<'_>) -> Result<TripLeg, String> {
    let text = &caps["date"];
    let (month, rest) = text.split_once(' ').expect("month day, year");
    let (day, year) = rest.split_once(", ").expect("month day, year");
    let day_digits = day.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    let m = MONTHS.iter().position(|&x| x == month).expect("month name") as u32 + 1;
    let date = NaiveDate::from_ymd_opt(
        year.parse().expect("digits"),
        m,
        day_digits.parse().expect("digits"),
    )
    .ok_or_else(|| format!("`{text}` is not a calendar date"))?;
    Ok(TripLeg {
        date,
        origin: Airport::new(&caps["from"]),
        destination: Airport::new(&caps["to"]),
    })
}

fn set<T>(slot: &mut Option<T>, field: &str, value: T) -> Result<(), ParseError> {
    if slot.is_some() {
        return Err(ParseError::DuplicateField(field.to_string()));
    }
    *slot = Some(value);
    Ok(())
}

struct Draft {
    legs: Option<Vec<TripLeg>>,
    request: SymbolicRequest,
}

impl Draft {
    /// `offset` is the byte position of the clause's section body in the text.
    fn apply(&mut self, m: &Matched<'_>, offset: usize) -> Result<(), ParseError> {
        let caps = &m.caps;
        let whole = caps.get(0).expect("whole match");
        let bad = |msg: String| ParseError::UnparsableSegment {
            start: offset + whole.start(),
            end: offset + whole.end(),
            text: format!("{} ({msg})", whole.as_str()),
        };
        let money = |c: &Captures<'_>| money(c).map_err(bad);
        let window = |c: &Captures<'_>| window(c).map_err(bad);
        let name_list = |c: &Captures<'_>| name_list(c).map_err(bad);
        let a = &mut self.request.airline;
        let h = &mut self.request.hotel;
        let b = &mut self.request.budget;
        use Clause::*;
        match m.clause {
            PriceTotalMax => set(
                &mut a.price_total_max,
                "airline.price_total_max",
                money(caps)?,
            ),
            Cabin => {
                let c: CabinClass = caps["cabin"].parse().expect("cabin slot");
                set(&mut a.cabin_class, "airline.cabin_class", c)
            }
            Refundable(v) => set(&mut a.refundable, "airline.refundable", v),
            Nonstop(v) => set(&mut a.nonstop_only, "airline.nonstop_only", v),
            NoBasicEconomy(v) => set(
                &mut a.must_not_basic_economy,
                "airline.must_not_basic_economy",
                v,
            ),
            NoMixedCabin(v) => set(&mut a.no_mixed_cabin, "airline.no_mixed_cabin", v),
            NoBasicNoMixed => set(
                &mut a.must_not_basic_economy,
                "airline.must_not_basic_economy",
                true,
            )
            .and_then(|_| set(&mut a.no_mixed_cabin, "airline.no_mixed_cabin", true)),
            AvoidRedEye(v) => set(&mut a.avoid_red_eye, "airline.avoid_red_eye", v),
            DepartureWindow => set(
                &mut a.departure_time,
                "airline.departure_time",
                window(caps)?,
            ),
            ArrivalWindow => set(&mut a.arrival_time, "airline.arrival_time", window(caps)?),
            PlaneTypes => set(&mut a.plane_types, "airline.plane_types", name_list(caps)?),
            Airlines => set(
                &mut a.preferred_airlines,
                "airline.preferred_airlines",
                name_list(caps)?,
            ),
            HotelDaily => set(
                &mut h.daily_budget_max,
                "hotel.daily_budget_max",
                money(caps)?,
            ),
            HotelTotal => set(
                &mut h.total_budget_max,
                "hotel.total_budget_max",
                money(caps)?,
            ),
            MinRating => set(&mut h.min_rating, "hotel.min_rating", rating(caps)),
            Brands => set(&mut h.brands, "hotel.brands", name_list(caps)?),
            TripTotal => set(&mut b.total_budget, "budget.total_budget", money(caps)?),
            Everyday => set(
                &mut b.everyday_budget,
                "budget.everyday_budget",
                money(caps)?,
            ),
            Leg => {
                let leg = leg(caps).map_err(bad)?;
                self.legs.get_or_insert_with(Vec::new).push(leg);
                Ok(())
            }
        }
    }
}

fn section_of(sentence: &str) -> Option<(Section, usize)> {
    [
        Section::Airline,
        Section::Hotel,
        Section::Budget,
        Section::Legs,
    ]
    .into_iter()
    .find_map(|s| {
        headers(s)
            .iter()
            .find(|h| sentence.starts_with(*h))
            .map(|h| (s, h.len()))
    })
}

/// Reads text in the rendering grammar back into a request.
pub fn parse_nl(text: &str) -> Result<SymbolicRequest, ParseError> {
    let mut draft = Draft {
        legs: None,
        request: SymbolicRequest {
            legs: Vec::new(),
            trip_kind: TripKind::OneWay,
            airline: Default::default(),
            hotel: Default::default(),
            budget: Default::default(),
        },
    };
    let mut seen = BTreeSet::new();
    let unparsable = |start: usize, end: usize| ParseError::UnparsableSegment {
        start,
        end,
        text: text[start..end].to_string(),
    };
    for (start, end) in sentences(text) {
        let sentence = &text[start..end];
        if OPENERS.contains(&sentence) || CLOSERS.contains(&sentence) {
            continue;
        }
        let Some((section, header_len)) = section_of(sentence) else {
            return Err(unparsable(start, end));
        };
        if !seen.insert(format!("{section:?}")) {
            return Err(ParseError::DuplicateField(
                format!("{section:?} section").to_lowercase(),
            ));
        }
        let Some(body) = sentence[header_len..].strip_suffix('.') else {
            return Err(unparsable(start, end));
        };
        let body_start = start + header_len;
        let matched = clause_sequence(section, body).map_err(|furthest| {
            let seg_start = body_start + furthest;
            let seg_len = body[furthest..].find(", ").unwrap_or(body.len() - furthest);
            unparsable(seg_start, seg_start + seg_len.max(1).min(end - seg_start))
        })?;
        for m in &matched {
            draft.apply(m, body_start)?;
        }
    }
    let legs = draft.legs.ok_or(ParseError::MissingLegs)?;
    let mut request = draft.request;
    request.trip_kind = if legs.len() == 1 {
        TripKind::OneWay
    } else {
        TripKind::RoundTrip
    };
    request.legs = legs;
    request
        .validate()
        .map_err(|e| ParseError::InvalidRequest(e.0))?;
    Ok(request)
}
