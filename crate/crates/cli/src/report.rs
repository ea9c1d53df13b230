//! JSON report envelope and the views of fitted models it carries.

use std::io::Write;
use std::path::Path;

use barista::estimate::FitResult;
use barista::{BaristaParams, FamilyKind};
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::units::Unit;

pub const SCHEMA: &str = "barista/1";

#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'static str,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub seed: u64,
    pub config: &'a Config,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<&'a crate::ingest::IngestSummary>,
    pub result: T,
}

/// Current UTC time, or `None` when timestamps are suppressed.
pub fn timestamp(enabled: bool) -> Option<String> {
    enabled.then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

impl<T: Serialize> Report<'_, T> {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Writes to `path`, or to stdout if there is none.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

/// Full parameter vector with `d2` also in minutes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsView {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub d1: f64,
    pub d2: f64,
    pub d2_minutes: f64,
    pub c: f64,
    pub horizon: f64,
    pub unit: Unit,
}

impl ParamsView {
    pub fn new(p: &BaristaParams, unit: Unit) -> Self {
        Self {
            alpha1: p.alpha1(),
            alpha2: p.alpha2(),
            alpha3: p.alpha3(),
            d1: p.d1(),
            d2: p.d2(),
            d2_minutes: unit.to_minutes(p.d2()),
            c: p.c(),
            horizon: p.horizon(),
            unit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub name: &'static str,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitView {
    pub family: FamilyKind,
    pub method: barista::estimate::FitMethod,
    pub estimates: Vec<Estimate>,
    pub loglik: f64,
    pub c_hat: f64,
    pub params: ParamsView,
}

impl FitView {
    pub fn new(fit: &FitResult, unit: Unit) -> Self {
        let kind = fit.kind();
        let estimates = kind
            .param_names()
            .iter()
            .zip(fit.family.shape())
            .enumerate()
            .map(|(i, (&name, value))| Estimate {
                name,
                value,
                stderr: fit.stderrs.as_ref().and_then(|s| s.get(i).copied()),
            })
            .collect();
        Self {
            family: kind,
            method: fit.method,
            estimates,
            loglik: fit.loglik,
            c_hat: fit.c_hat,
            params: ParamsView::new(&fit.params, unit),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use barista::simulate::sample_fixed_n;
    use barista::Seed;

    #[test]
    fn fit_view_names_and_minutes() {
        let p = BaristaParams::new(3.0, 0.4, 1.0, 2.5, 5.0 / 1440.0, 1.0, 7.0).unwrap();
        let s = sample_fixed_n(&p, 200, Seed(1));
        let mut fit = barista::estimate::fit_nhpp1(&s).unwrap();
        fit.stderrs = Some(vec![0.1]);
        let v = FitView::new(&fit, Unit::Days);
        assert_eq!(v.estimates.len(), 1);
        assert_eq!(v.estimates[0].name, "alpha");
        assert_eq!(v.estimates[0].stderr, Some(0.1));
        let pv = ParamsView::new(&p, Unit::Days);
        assert!((pv.d2_minutes - 5.0).abs() < 1e-12);
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["family"], "one-stage");
        assert_eq!(json["params"]["unit"], "days");
    }

    #[test]
    fn report_envelope() {
        let cfg = Config::default();
        let r = Report {
            schema: SCHEMA,
            command: "fit",
            version: "0",
            generated_at: timestamp(false),
            seed: 3,
            config: &cfg,
            input: None,
            result: 1,
        };
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], "barista/1");
        assert!(v.get("generated_at").is_none());
        assert!(timestamp(true).unwrap().ends_with('Z'));
    }
}
