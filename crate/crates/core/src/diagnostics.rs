//! Goodness-of-fit and exploratory diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::params::BaristaParams;
use crate::sample::BidSample;

/// Terms of the Kolmogorov series.
const KOLMOGOROV_TERMS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d_statistic: f64,
    pub p_value: f64,
    pub n_effective: f64,
}

/// Asymptotic survival function of the Kolmogorov distribution,
/// `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 1.0;
    }
    if lambda < 1.18 {
        // the alternating series converges slowly here; use the
        // theta-function form of the CDF instead
        let pi2 = std::f64::consts::PI.powi(2);
        let cdf: f64 = (1..=KOLMOGOROV_TERMS)
            .map(|k| {
                let odd = (2 * k - 1) as f64;
                (-odd * odd * pi2 / (8.0 * lambda * lambda)).exp()
            })
            .sum::<f64>()
            * (2.0 * std::f64::consts::PI).sqrt()
            / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let sf: f64 = (1..=KOLMOGOROV_TERMS)
        .map(|k| {
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * kf * kf * lambda * lambda).exp()
        })
        .sum::<f64>()
        * 2.0;
    sf.clamp(0.0, 1.0)
}

/// p-value for a KS distance `d` at effective size `n`, with Stephens'
/// small-sample correction to the scaling.
pub fn ks_p_value(d: f64, n_effective: f64) -> f64 {
    let rn = n_effective.sqrt();
    kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d)
}

/// One-sample KS test of `sample` against a continuous CDF. Unsorted input
/// is sorted on a copy.
pub fn ks_against<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let sorted;
    let sample = if sample.is_sorted() {
        sample
    } else {
        let mut v = sample.to_vec();
        v.sort_by(f64::total_cmp);
        sorted = v;
        &sorted[..]
    };
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(KsResult {
        d_statistic: d,
        p_value: ks_p_value(d, n),
        n_effective: n,
    })
}

/// One-sample KS test of `sample` against the model CDF of `p`.
pub fn ks_one_sample(sample: &BidSample, p: &BaristaParams) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if sample.horizon() != p.horizon() {
        return Err(Error::InvalidSample(format!(
            "sample horizon {} differs from model horizon {}",
            sample.horizon(),
            p.horizon()
        )));
    }
    ks_against(sample.times(), |x| p.cdf(x).expect("time inside the horizon"))
}

/// Two-sample KS test on value sets sorted ascending.
pub fn ks_two_sample_sorted(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(a.is_sorted() && b.is_sorted()) {
        return Err(Error::InvalidSample("two-sample KS inputs must be sorted".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let n_effective = na * nb / (na + nb);
    Ok(KsResult {
        d_statistic: d,
        p_value: ks_p_value(d, n_effective),
        n_effective,
    })
}

pub fn ks_two_sample(a: &BidSample, b: &BidSample) -> Result<KsResult> {
    ks_two_sample_sorted(a.times(), b.times())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqData {
    /// `(observed quantile, reference quantile)`.
    pub pairs: Vec<(f64, f64)>,
}

impl QqData {
    /// Largest `|observed - reference|`.
    pub fn max_deviation(&self) -> f64 {
        self.pairs
            .iter()
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// What the observed quantiles are plotted against.
#[derive(Debug, Clone, Copy)]
pub enum QqReference<'a> {
    Model(&'a BaristaParams),
    Sample(&'a BidSample),
}

/// QQ pairs at plotting positions `(i - 0.5)/n`. A sample reference is
/// interpolated linearly between its own plotting positions.
pub fn qq_points(sample: &BidSample, reference: QqReference<'_>) -> Result<QqData> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = sample.len() as f64;
    let probs = (0..sample.len()).map(|i| (i as f64 + 0.5) / n);
    let pairs = match reference {
        QqReference::Model(p) => sample
            .times()
            .iter()
            .zip(probs)
            .map(|(&x, q)| Ok((x, p.inverse_cdf(q)?)))
            .collect::<Result<Vec<_>>>()?,
        QqReference::Sample(r) => {
            if r.is_empty() {
                return Err(Error::EmptySample);
            }
            let n = sample.len();
            sample
                .times()
                .iter()
                .enumerate()
                .map(|(i, &x)| (x, interpolated_quantile(r.times(), i, n)))
                .collect()
        }
    };
    Ok(QqData { pairs })
}

/// Quantile of sorted `xs` at the `i`-th of `n` plotting positions,
/// interpolating linearly between the points `((j - 0.5)/m, x_j)` and flat
/// beyond the ends. The position `(2i + 1) m / 2n - 1/2` is split into
/// integer and fractional parts exactly, so equal sizes give `x_i`.
fn interpolated_quantile(xs: &[f64], i: usize, n: usize) -> f64 {
    let m = xs.len();
    let num = (2 * i + 1) * m;
    if num <= n {
        return xs[0];
    }
    let num = num - n;
    let den = 2 * n;
    let lo = num / den;
    if lo + 1 >= m {
        return xs[m - 1];
    }
    let frac = (num % den) as f64 / den as f64;
    xs[lo] + frac * (xs[lo + 1] - xs[lo])
}

/// Events in the final window `[T - w, T)`, mapped to `[0, 1)` by
/// `(x - (T - w))/w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseTimeEcdf {
    pub window: f64,
    /// Sorted rescaled times.
    pub points: Vec<f64>,
}

impl ReverseTimeEcdf {
    pub fn eval(&self, x: f64) -> f64 {
        self.points.partition_point(|&p| p <= x) as f64 / self.points.len() as f64
    }

    /// Step points `(x, F(x))` at every distinct rescaled time.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.points.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(self.points.len());
        for (i, &x) in self.points.iter().enumerate() {
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = (i + 1) as f64 / n,
                _ => out.push((x, (i + 1) as f64 / n)),
            }
        }
        out
    }

    /// The rescaled times as a sample on the unit horizon.
    pub fn as_sample(&self) -> BidSample {
        BidSample::from_sorted_unchecked(self.points.clone(), 1.0)
    }
}

pub fn reverse_time_ecdf(sample: &BidSample, window: f64) -> Result<ReverseTimeEcdf> {
    let t = sample.horizon();
    if !(window > 0.0 && window <= t) {
        return Err(domain("window", window, format!("(0, {t}]")));
    }
    let start = t - window;
    let first = sample.count_lt(start);
    let points: Vec<f64> = sample.times()[first..]
        .iter()
        .map(|&x| ((x - start) / window).clamp(0.0, 1.0_f64.next_down()))
        .collect();
    if points.is_empty() {
        return Err(Error::InvalidSample(format!(
            "no events in the final window of length {window}"
        )));
    }
    Ok(ReverseTimeEcdf { window, points })
}

/// `(1 - F(T - t theta)) / (1 - F(T - t))` under the one-stage model with
/// exponent `alpha`; equals `theta^alpha` for every `t`.
pub fn self_similarity_ratio(alpha: f64, theta: f64, t: f64, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(domain("horizon", horizon, "(0, inf)"));
    }
    if !(t > 0.0 && t <= horizon) {
        return Err(domain("t", t, format!("(0, {horizon}]")));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(domain("theta", theta, "[0, 1]"));
    }
    let p = BaristaParams::new(alpha, alpha, alpha, 0.0, 0.0, 1.0, horizon)?;
    Ok(p.survival(horizon - t * theta)? / p.survival(horizon - t)?)
}
