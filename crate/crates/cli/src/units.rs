//! Time units, the clamp policy for out-of-range times, and window lists.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Unit of the timeline: bid offsets, the horizon and every fitted
/// duration are expressed in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Unit {
    Days,
    Hours,
    Minutes,
    Seconds,
}

impl Unit {
    pub fn seconds(self) -> f64 {
        match self {
            Unit::Days => 86_400.0,
            Unit::Hours => 3_600.0,
            Unit::Minutes => 60.0,
            Unit::Seconds => 1.0,
        }
    }

    pub fn to_minutes(self, x: f64) -> f64 {
        x * self.seconds() / 60.0
    }

    pub fn name(self) -> &'static str {
        match self {
            Unit::Days => "days",
            Unit::Hours => "hours",
            Unit::Minutes => "minutes",
            Unit::Seconds => "seconds",
        }
    }
}

/// What to do with times outside `[0, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ClampPolicy {
    /// Fail with the offending line number.
    Reject,
    /// Move negative times to 0 and times at or past `T` to
    /// `T (1 - CLAMP_EPSILON)`.
    ClampEpsilon,
}

/// Relative gap below the horizon for clamped times.
pub const CLAMP_EPSILON: f64 = 1e-9;

/// One requested zoom window, kept with its label for file names.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub label: String,
    /// Length in the working unit.
    pub length: f64,
}

/// Parses `"7d,1d,3h,5min,30s,0.5"`: each entry is a number with an
/// optional suffix `d`, `h`, `min` or `s`; bare numbers are in `unit`.
pub fn parse_windows(spec: &str, unit: Unit) -> Result<Vec<Window>> {
    let mut out = Vec::new();
    for raw in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let split = raw
            .find(|c: char| c.is_ascii_alphabetic())
            .unwrap_or(raw.len());
        let (num, suffix) = raw.split_at(split);
        let value: f64 = num
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("window '{raw}' does not start with a number")))?;
        let seconds = match suffix {
            "" => unit.seconds(),
            "d" => Unit::Days.seconds(),
            "h" => Unit::Hours.seconds(),
            "min" => Unit::Minutes.seconds(),
            "s" => Unit::Seconds.seconds(),
            other => {
                return Err(CliError::Usage(format!(
                    "window '{raw}' has unknown suffix '{other}' (use d, h, min or s)"
                )))
            }
        };
        let length = value * seconds / unit.seconds();
        if !(length.is_finite() && length > 0.0) {
            return Err(CliError::Usage(format!("window '{raw}' must be positive")));
        }
        out.push(Window {
            label: raw.to_string(),
            length,
        });
    }
    if out.is_empty() {
        return Err(CliError::Usage("no windows given".into()));
    }
    Ok(out)
}
