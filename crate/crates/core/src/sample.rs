use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Sorted event times on `[0, T)` with an optional source label per event
/// (for pooled auctions, the auction id).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidSample {
    times: Vec<f64>,
    horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sources: Option<Vec<String>>,
}

impl BidSample {
    /// Builds a sample, sorting the times. The sort is stable, so tied
    /// times keep their input order.
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        Self::build(times, horizon, None)
    }

    pub fn with_sources(times: Vec<f64>, horizon: f64, sources: Vec<String>) -> Result<Self> {
        if sources.len() != times.len() {
            return Err(Error::InvalidSample(format!(
                "{} times but {} sources",
                times.len(),
                sources.len()
            )));
        }
        Self::build(times, horizon, Some(sources))
    }

    fn build(times: Vec<f64>, horizon: f64, sources: Option<Vec<String>>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(domain("horizon", horizon, "(0, inf)"));
        }
        if let Some((i, &t)) = times
            .iter()
            .enumerate()
            .find(|(_, t)| !(t.is_finite() && **t >= 0.0 && **t < horizon))
        {
            return Err(Error::InvalidSample(format!(
                "event {i} at {t} is outside [0, {horizon})"
            )));
        }
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        let sorted = order.iter().map(|&i| times[i]).collect();
        let sources = sources.map(|s| order.iter().map(|&i| s[i].clone()).collect());
        Ok(Self {
            times: sorted,
            horizon,
            sources,
        })
    }

    pub(crate) fn from_sorted_unchecked(times: Vec<f64>, horizon: f64) -> Self {
        debug_assert!(times.windows(2).all(|w| w[0] <= w[1]));
        Self {
            times,
            horizon,
            sources: None,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn sources(&self) -> Option<&[String]> {
        self.sources.as_deref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of events at or before `t`.
    pub fn count_le(&self, t: f64) -> usize {
        self.times.partition_point(|&x| x <= t)
    }

    /// Number of events strictly before `t`.
    pub fn count_lt(&self, t: f64) -> usize {
        self.times.partition_point(|&x| x < t)
    }

    /// Empirical CDF `N(t) / N(T)`, right-continuous.
    pub fn ecdf(&self, t: f64) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptySample);
        }
        if !(t.is_finite() && (0.0..=self.horizon).contains(&t)) {
            return Err(domain("t", t, format!("[0, {}]", self.horizon)));
        }
        Ok(self.count_le(t) as f64 / self.len() as f64)
    }

    /// Pools several samples with a common horizon.
    pub fn pool(parts: &[BidSample]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptySample)?;
        let horizon = first.horizon;
        if let Some(p) = parts.iter().find(|p| p.horizon != horizon) {
            return Err(Error::InvalidSample(format!(
                "cannot pool horizons {horizon} and {}",
                p.horizon
            )));
        }
        let times = parts.iter().flat_map(|p| p.times.iter().copied()).collect();
        Self::new(times, horizon)
    }
}
