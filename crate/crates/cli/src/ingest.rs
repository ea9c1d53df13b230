//! Reading bid-time CSV files.
//!
//! Accepted layouts, with an optional `auction_id` column in both:
//!
//! * `bid_time`: offset from the auction start in the working unit;
//! * `bid_timestamp` and `auction_start`: absolute times as RFC 3339,
//!   `YYYY-MM-DD HH:MM:SS` (UTC) or epoch seconds.
//!
//! An optional `horizon` column gives each auction's length. Lines starting
//! with `#` are comments; `# horizon: <x>` and `# unit: <name>` supply
//! defaults for the flags of the same name.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use barista::BidSample;
use chrono::{DateTime, NaiveDateTime};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::units::{ClampPolicy, Unit, CLAMP_EPSILON};

/// Metadata found in `#` comment lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileMeta {
    pub horizon: Option<f64>,
    pub unit: Option<Unit>,
}

pub fn scan_meta(text: &str) -> FileMeta {
    let mut meta = FileMeta::default();
    for line in text.lines() {
        let Some(body) = line.strip_prefix('#') else {
            continue;
        };
        let Some((key, value)) = body.split_once(':') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "horizon" => meta.horizon = value.parse().ok(),
            "unit" => {
                meta.unit = serde_json::from_value(serde_json::Value::String(value.into())).ok()
            }
            _ => {}
        }
    }
    meta
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuctionSummary {
    pub auction_id: String,
    pub bids: usize,
    pub first_bid: f64,
    pub last_bid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub path: String,
    pub events: usize,
    pub auctions: usize,
    pub horizon: f64,
    pub unit: Unit,
    pub clamp_policy: ClampPolicy,
    pub clamped: usize,
    pub per_auction: Vec<AuctionSummary>,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub sample: BidSample,
    pub summary: IngestSummary,
}

/// Options resolved from flags and config. `None` falls back to the file's
/// metadata.
#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    pub horizon: Option<f64>,
    pub unit: Option<Unit>,
    pub clamp: ClampPolicy,
}

enum TimeColumns {
    Offset(usize),
    Absolute { bid: usize, start: usize },
}

pub fn read_bids(path: &Path, opts: IngestOptions) -> Result<Ingested> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_bids(&text, path, opts)
}

pub fn parse_bids(text: &str, path: &Path, opts: IngestOptions) -> Result<Ingested> {
    let meta = scan_meta(text);
    let unit = opts.unit.or(meta.unit).unwrap_or(Unit::Days);
    let input_err = |message: String| CliError::Input {
        path: path.to_path_buf(),
        message,
    };
    let row_err = |line: u64, message: String| CliError::Row {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| input_err(format!("cannot read header: {e}")))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("auction_id");
    let horizon_col = col("horizon");
    let columns = match (col("bid_time"), col("bid_timestamp"), col("auction_start")) {
        (Some(i), None, None) => TimeColumns::Offset(i),
        (None, Some(bid), Some(start)) => TimeColumns::Absolute { bid, start },
        _ => {
            return Err(input_err(
                "need a bid_time column, or bid_timestamp and auction_start columns".into(),
            ))
        }
    };

    struct Row {
        line: u64,
        id: String,
        time: f64,
    }
    let mut rows = Vec::new();
    let mut horizons: BTreeMap<String, (f64, u64)> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            row_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let id = id_col.map_or_else(String::new, |i| field(i).to_string());
        let time = match columns {
            TimeColumns::Offset(i) => parse_number(field(i))
                .ok_or_else(|| row_err(line, format!("bid_time '{}' is not a number", field(i))))?,
            TimeColumns::Absolute { bid, start } => {
                let b = parse_instant(field(bid)).ok_or_else(|| {
                    row_err(line, format!("bid_timestamp '{}' is not a time", field(bid)))
                })?;
                let s = parse_instant(field(start)).ok_or_else(|| {
                    row_err(line, format!("auction_start '{}' is not a time", field(start)))
                })?;
                (b - s) / unit.seconds()
            }
        };
        if let Some(i) = horizon_col {
            let h = parse_number(field(i))
                .filter(|h| *h > 0.0)
                .ok_or_else(|| row_err(line, format!("horizon '{}' is not positive", field(i))))?;
            match horizons.get(&id) {
                Some(&(prev, _)) if prev != h => {
                    return Err(row_err(
                        line,
                        format!("auction '{id}' has horizon {h} here but {prev} earlier"),
                    ))
                }
                Some(_) => {}
                None => {
                    horizons.insert(id.clone(), (h, line));
                }
            }
        }
        rows.push(Row { line, id, time });
    }

    // one horizon for the whole pool
    let mut distinct: Vec<(f64, &str, u64)> = Vec::new();
    for (id, &(h, line)) in &horizons {
        if !distinct.iter().any(|d| d.0 == h) {
            distinct.push((h, id, line));
        }
    }
    if distinct.len() > 1 {
        let list: Vec<String> = distinct
            .iter()
            .map(|(h, id, line)| format!("{h} (auction '{id}', line {line})"))
            .collect();
        return Err(input_err(format!(
            "auctions of different lengths cannot be pooled: {}",
            list.join(", ")
        )));
    }
    let column_h = distinct.first().map(|d| d.0);
    let horizon = match (opts.horizon, column_h) {
        (Some(flag), Some(col)) if flag != col => {
            return Err(input_err(format!(
                "horizon {flag} from the options disagrees with {col} in the horizon column"
            )))
        }
        (Some(h), _) | (None, Some(h)) => h,
        (None, None) => meta.horizon.ok_or_else(|| {
            input_err("horizon unknown: pass --horizon or add a horizon column".into())
        })?,
    };
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(input_err(format!("horizon {horizon} is not positive")));
    }

    let top = horizon * (1.0 - CLAMP_EPSILON);
    let mut clamped = 0;
    let mut times = Vec::with_capacity(rows.len());
    let mut ids = Vec::with_capacity(rows.len());
    for row in rows {
        let mut t = row.time;
        if !t.is_finite() {
            return Err(row_err(row.line, format!("bid time {t} is not finite")));
        }
        if !(0.0..horizon).contains(&t) {
            match opts.clamp {
                ClampPolicy::Reject => {
                    return Err(row_err(
                        row.line,
                        format!("bid time {t} is outside [0, {horizon})"),
                    ))
                }
                ClampPolicy::ClampEpsilon => {
                    t = if t < 0.0 { 0.0 } else { top };
                    clamped += 1;
                }
            }
        }
        times.push(t);
        ids.push(row.id);
    }

    let mut per: BTreeMap<&str, AuctionSummary> = BTreeMap::new();
    for (id, &t) in ids.iter().zip(&times) {
        let e = per.entry(id).or_insert_with(|| AuctionSummary {
            auction_id: id.clone(),
            bids: 0,
            first_bid: t,
            last_bid: t,
        });
        e.bids += 1;
        e.first_bid = e.first_bid.min(t);
        e.last_bid = e.last_bid.max(t);
    }
    let per_auction: Vec<AuctionSummary> = per.into_values().collect();
    let summary = IngestSummary {
        path: display_path(path),
        events: times.len(),
        auctions: per_auction.len(),
        horizon,
        unit,
        clamp_policy: opts.clamp,
        clamped,
        per_auction,
    };
    let sample = BidSample::with_sources(times, horizon, ids)
        .map_err(|e| input_err(e.to_string()))?;
    Ok(Ingested { sample, summary })
}

fn display_path(p: &Path) -> String {
    PathBuf::from(p).display().to_string()
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok()
}

/// Seconds since the epoch.
fn parse_instant(s: &str) -> Option<f64> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp() as f64 + dt.timestamp_subsec_nanos() as f64 * 1e-9);
    }
    for fmt in ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            let dt = dt.and_utc();
            return Some(dt.timestamp() as f64 + dt.timestamp_subsec_nanos() as f64 * 1e-9);
        }
    }
    parse_number(s).filter(|x| x.is_finite())
}
