//! Quick-and-crude estimators: closed-form expressions for the exponents and
//! changepoints in terms of the CDF, evaluated with the empirical CDF.

use serde::{Deserialize, Serialize};

use super::closed_form::estimate_c;
use super::likelihood::loglik;
use super::{FitMethod, FitResult};
use crate::error::{domain, Error, Result};
use crate::params::{BaristaParams, ModelFamily};
use crate::sample::BidSample;

/// Exponent of the stage containing `[T - t, T - s]`, from the ratio of
/// CDF increments over `[T - t, T - sqrt(st)]` and `[T - sqrt(st), T - s]`.
///
/// Both increments are taken as magnitudes and must be strictly positive.
pub fn qc_alpha<F: Fn(f64) -> f64>(cdf: F, horizon: f64, t: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < t && t <= horizon) {
        return Err(Error::Estimation(format!(
            "need 0 < s < t <= T for the exponent window, got s = {s}, t = {t}"
        )));
    }
    let mid = (s * t).sqrt();
    let f_t = cdf(horizon - t);
    let f_mid = cdf(horizon - mid);
    let f_s = cdf(horizon - s);
    let near = f_mid - f_t;
    let far = f_s - f_mid;
    if !(near > 0.0 && far > 0.0) {
        return Err(Error::Estimation(format!(
            "window [{}, {}] has a zero or non-monotone CDF increment",
            horizon - t,
            horizon - s
        )));
    }
    Ok(2.0 * (near.ln() - far.ln()) / (t.ln() - s.ln()))
}

/// Final-stage exponent from the survival ratio at two points inside the
/// final stage: `ln(R(t3)/R(t3p)) / ln((T - t3)/(T - t3p))`.
pub fn qc_alpha3_survival<R: Fn(f64) -> f64>(
    survival: R,
    horizon: f64,
    t3: f64,
    t3p: f64,
) -> Result<f64> {
    if !(t3 < t3p && t3p < horizon && t3 >= 0.0) {
        return Err(Error::Estimation(format!(
            "need 0 <= t3 < t3' < T, got t3 = {t3}, t3' = {t3p}"
        )));
    }
    let r3 = survival(t3);
    let r3p = survival(t3p);
    if !(r3 > 0.0 && r3p > 0.0) {
        return Err(Error::Estimation(format!(
            "zero survival at t3 = {t3} or t3' = {t3p}"
        )));
    }
    Ok((r3 / r3p).ln() / ((horizon - t3) / (horizon - t3p)).ln())
}

/// "Safe" evaluation points for the changepoint formulas: `t1` in stage 1,
/// `t2p < t2` in stage 2 and `t3` in stage 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafePoints {
    pub t1: f64,
    pub t2p: f64,
    pub t2: f64,
    pub t3: f64,
}

/// Changepoints recovered from CDF ratios given the three exponents.
pub fn qc_changepoints<F: Fn(f64) -> f64>(
    cdf: F,
    alphas: [f64; 3],
    safe: SafePoints,
    horizon: f64,
) -> Result<(f64, f64)> {
    let [a1, a2, a3] = alphas;
    let SafePoints { t1, t2p, t2, t3 } = safe;
    if !(0.0 < t1 && t1 <= t2p && t2p < t2 && t2 <= t3 && t3 < horizon) {
        return Err(Error::Estimation(format!(
            "safe points must satisfy 0 < t1 <= t2' < t2 <= t3 < T, got {safe:?}"
        )));
    }
    if a1 == a2 {
        return Err(Error::Unidentifiable("alpha1 = alpha2, d1 has no effect".into()));
    }
    if a2 == a3 {
        return Err(Error::Unidentifiable("alpha2 = alpha3, d2 has no effect".into()));
    }
    let rev = |x: f64, a: f64| (1.0 - x / horizon).powf(a);
    let mid_mass = cdf(t2) - cdf(t2p);
    let mid_shape = rev(t2p, a2) - rev(t2, a2);
    let f1 = cdf(t1);
    let r3 = 1.0 - cdf(t3);

    let base1 = a1 / a2 * f1 / mid_mass * mid_shape / (1.0 - rev(t1, a1));
    if !(base1 > 0.0 && base1.is_finite()) {
        return Err(Error::Estimation(format!(
            "d1 formula has non-positive base {base1}"
        )));
    }
    let d1 = horizon - horizon * base1.powf(1.0 / (a2 - a1));

    let base2 = a3 / a2 * r3 / mid_mass * mid_shape / rev(t3, a3);
    if !(base2 > 0.0 && base2.is_finite()) {
        return Err(Error::Estimation(format!(
            "d2 formula has non-positive base {base2}"
        )));
    }
    let d2 = horizon * base2.powf(1.0 / (a2 - a3));
    Ok((d1, d2))
}

/// Windows and points used by [`qc_fit`], all in forward time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QcConfig {
    /// Interval believed to lie inside `[0, d1]`.
    pub stage1_window: (f64, f64),
    /// Interval believed to lie inside `[d1, T - d2]`.
    pub stage2_window: (f64, f64),
    /// Two points `t3 < t3'` inside `[T - d2, T)`.
    pub stage3_points: (f64, f64),
    pub safe_points: SafePoints,
}

impl QcConfig {
    /// The windows used for the 7-day simulation study, rescaled to
    /// `horizon`: stage 1 `[0.001, 1]` days, stage 2 `[3, 6.9]` days, stage
    /// 3 at two and 0.4 minutes before the close, safe points 1, 3, 6 days
    /// and two minutes before the close.
    pub fn seven_day_study(horizon: f64) -> Self {
        let k = horizon / 7.0;
        let minute = horizon / 10080.0;
        Self {
            stage1_window: (0.001 * k, 1.0 * k),
            stage2_window: (3.0 * k, 6.9 * k),
            stage3_points: (horizon - 2.0 * minute, horizon - 0.4 * minute),
            safe_points: SafePoints {
                t1: 1.0 * k,
                t2p: 3.0 * k,
                t2: 6.0 * k,
                t3: horizon - 2.0 * minute,
            },
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        for (name, (lo, hi)) in [
            ("stage1_window", self.stage1_window),
            ("stage2_window", self.stage2_window),
            ("stage3_points", self.stage3_points),
        ] {
            if !(lo >= 0.0 && lo < hi && hi <= horizon) {
                return Err(domain(name, hi, format!("nondegenerate window in [0, {horizon}] starting at {lo}")));
            }
        }
        Ok(())
    }
}

/// Quick-and-crude exponents only.
pub fn qc_alphas(sample: &BidSample, cfg: &QcConfig) -> Result<[f64; 3]> {
    let t = sample.horizon();
    cfg.validate(t)?;
    let ecdf = |x: f64| sample.count_le(x) as f64 / sample.len() as f64;
    let esurv = |x: f64| 1.0 - ecdf(x);
    let (lo1, hi1) = cfg.stage1_window;
    let (lo2, hi2) = cfg.stage2_window;
    let a1 = qc_alpha(ecdf, t, t - lo1, t - hi1).map_err(|e| stage("stage 1", e))?;
    let a2 = qc_alpha(ecdf, t, t - lo2, t - hi2).map_err(|e| stage("stage 2", e))?;
    let a3 = qc_alpha3_survival(esurv, t, cfg.stage3_points.0, cfg.stage3_points.1)
        .map_err(|e| stage("stage 3", e))?;
    Ok([a1, a2, a3])
}

fn stage(name: &str, e: Error) -> Error {
    Error::Estimation(format!("{name}: {e}"))
}

/// Full quick-and-crude pipeline: exponents from the three windows,
/// changepoints from the safe points, then the scale from the count.
pub fn qc_fit(sample: &BidSample, cfg: &QcConfig) -> Result<FitResult> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let t = sample.horizon();
    let alphas = qc_alphas(sample, cfg)?;
    let ecdf = |x: f64| sample.count_le(x) as f64 / sample.len() as f64;
    let (d1, d2) = qc_changepoints(ecdf, alphas, cfg.safe_points, t)
        .map_err(|e| stage("changepoints", e))?;
    let shape = BaristaParams::new(alphas[0], alphas[1], alphas[2], d1, d2, 1.0, t)
        .map_err(|e| stage("changepoints", e))?;
    let c_hat = estimate_c(&shape, sample.len());
    let params = shape.with_c(c_hat)?;
    Ok(FitResult {
        family: ModelFamily::ThreeStage(params),
        params,
        loglik: loglik(sample, &params)?,
        method: FitMethod::QuickCrude,
        stderrs: None,
        c_hat,
    })
}
