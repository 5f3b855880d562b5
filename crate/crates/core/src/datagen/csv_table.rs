//! Flight tables read from CSV with a configurable column mapping.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Duration, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Airport, CabinClass, DateRange, FlightOption, Money};

/// Source column for each flight field. Fields without a source take a
/// default (`coach`, `false`, `"Unknown"`); the five required ones must be mapped.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMap {
    pub id: Option<String>,
    pub origin: Option<String>,
    pub destination: Option<String>,
    pub departure: Option<String>,
    pub arrival: Option<String>,
    pub price: Option<String>,
    pub cabin_class: Option<String>,
    pub is_basic_economy: Option<String>,
    pub is_mixed_cabin: Option<String>,
    pub is_nonstop: Option<String>,
    pub airline: Option<String>,
    pub plane_type: Option<String>,
    pub refundable: Option<String>,
}

impl ColumnMap {
    fn required(&self) -> [(&'static str, &Option<String>); 5] {
        [
            ("origin", &self.origin),
            ("destination", &self.destination),
            ("departure", &self.departure),
            ("arrival", &self.arrival),
            ("price", &self.price),
        ]
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {message}")]
    FileUnreadable { path: String, message: String },
    #[error("column map has no source column for required field `{0}`")]
    MappingIncomplete(&'static str),
    #[error("column `{0}` named in the column map is not in the CSV header")]
    UnknownColumn(String),
    #[error("no valid rows in {0}")]
    Empty(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedRow {
    /// 1-based line number in the file, header included.
    pub line: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: u64,
    pub skipped: Vec<SkippedRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseFlightTable {
    pub rows: Vec<FlightOption>,
    /// Departure dates covered.
    pub span: DateRange,
}

const DATETIME_FORMATS: [&str; 4] = [
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
];

fn parse_datetime(s: &str) -> Result<NaiveDateTime, String> {
    DATETIME_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s.trim(), f).ok())
        .ok_or_else(|| format!("unrecognized datetime `{s}`"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "y" | "t" => Ok(true),
        "false" | "0" | "no" | "n" | "f" | "" => Ok(false),
        other => Err(format!("unrecognized boolean `{other}`")),
    }
}

fn parse_price(s: &str) -> Result<Money, String> {
    let v: f64 = s
        .trim()
        .trim_start_matches('$')
        .parse()
        .map_err(|_| format!("unrecognized price `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("unrecognized price `{s}`"));
    }
    Ok(Money((v * 100.0).round() as i64))
}

/// Reads flights from a CSV file. Rows that fail to parse or validate are
/// skipped and listed in the report.
pub fn ingest_flight_csv(
    path: &Path,
    map: &ColumnMap,
) -> Result<(BaseFlightTable, IngestReport), IngestError> {
    for (field, col) in map.required() {
        if col.is_none() {
            return Err(IngestError::MappingIncomplete(field));
        }
    }
    let unreadable = |e: &dyn std::fmt::Display| IngestError::FileUnreadable {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| unreadable(&e))?;
    let headers = reader.headers().map_err(|e| unreadable(&e))?.clone();
    let index: BTreeMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let col = |name: &Option<String>| -> Result<Option<usize>, IngestError> {
        match name {
            None => Ok(None),
            Some(n) => index
                .get(n.as_str())
                .copied()
                .map(Some)
                .ok_or_else(|| IngestError::UnknownColumn(n.clone())),
        }
    };
    let cols = [
        col(&map.id)?,
        col(&map.origin)?,
        col(&map.destination)?,
        col(&map.departure)?,
        col(&map.arrival)?,
        col(&map.price)?,
        col(&map.cabin_class)?,
        col(&map.is_basic_economy)?,
        col(&map.is_mixed_cabin)?,
        col(&map.is_nonstop)?,
        col(&map.airline)?,
        col(&map.plane_type)?,
        col(&map.refundable)?,
    ];

    let mut report = IngestReport::default();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        report.rows_read += 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                report.skipped.push(SkippedRow {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let get = |c: Option<usize>| c.and_then(|c| record.get(c));
        let parsed = (|| -> Result<FlightOption, String> {
            let code = |c: Option<usize>, what: &str| {
                let a = Airport::new(get(c).unwrap_or("").trim());
                if a.is_well_formed() {
                    Ok(a)
                } else {
                    Err(format!("{what} `{a}` is not an airport code"))
                }
            };
            let flag = |c: Option<usize>| get(c).map_or(Ok(false), parse_bool);
            let name = |c: Option<usize>| {
                get(c)
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .unwrap_or("Unknown")
                    .to_string()
            };
            let f = FlightOption {
                id: get(cols[0])
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .unwrap_or_else(|| format!("csv-{line}")),
                origin: code(cols[1], "origin")?,
                destination: code(cols[2], "destination")?,
                departure: parse_datetime(get(cols[3]).unwrap_or(""))?,
                arrival: parse_datetime(get(cols[4]).unwrap_or(""))?,
                price: parse_price(get(cols[5]).unwrap_or(""))?,
                cabin_class: match get(cols[6]).map(str::trim).filter(|s| !s.is_empty()) {
                    Some(s) => s
                        .to_ascii_lowercase()
                        .parse::<CabinClass>()
                        .map_err(|e| e.0)?,
                    None => CabinClass::Coach,
                },
                is_basic_economy: flag(cols[7])?,
                is_mixed_cabin: flag(cols[8])?,
                is_nonstop: flag(cols[9])?,
                airline: name(cols[10]),
                plane_type: name(cols[11]),
                refundable: flag(cols[12])?,
            };
            f.validate().map_err(|e| e.0)?;
            Ok(f)
        })();
        match parsed {
            Ok(f) => rows.push(f),
            Err(reason) => report.skipped.push(SkippedRow { line, reason }),
        }
    }
    if rows.is_empty() {
        return Err(IngestError::Empty(path.display().to_string()));
    }
    let mut seen = std::collections::HashSet::new();
    for (i, f) in rows.iter_mut().enumerate() {
        if !seen.insert(f.id.clone()) {
            f.id = format!("{}-{i}", f.id);
            seen.insert(f.id.clone());
        }
    }
    let start = rows
        .iter()
        .map(|f| f.departure.date())
        .min()
        .expect("non-empty");
    let end = rows
        .iter()
        .map(|f| f.departure.date())
        .max()
        .expect("non-empty");
    Ok((
        BaseFlightTable {
            rows,
            span: DateRange::new(start, end),
        },
        report,
    ))
}

/// Tiles the table across `horizon` by shifting whole copies of the base
/// span. Copy `k` gets ids suffixed `-r{k}`; rows departing outside the
/// horizon are dropped.
pub fn replicate_dates(table: &BaseFlightTable, horizon: DateRange) -> BaseFlightTable {
    let span_days = table.span.num_days();
    let offset0 = (horizon.start - table.span.start).num_days();
    let copies = (horizon.num_days() + span_days - 1) / span_days;
    let mut rows = Vec::new();
    for k in 0..copies.max(0) {
        let shift = Duration::days(offset0 + k * span_days);
        for f in &table.rows {
            let departure = f.departure + shift;
            if !horizon.contains(departure.date()) {
                continue;
            }
            rows.push(FlightOption {
                id: format!("{}-r{k}", f.id),
                departure,
                arrival: f.arrival + shift,
                ..f.clone()
            });
        }
    }
    BaseFlightTable {
        rows,
        span: horizon,
    }
}
