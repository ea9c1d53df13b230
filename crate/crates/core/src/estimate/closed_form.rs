use crate::error::{Error, Result};
use crate::params::BaristaParams;
use crate::sample::BidSample;

/// Joint MLE of `(alpha, c)` for the one-stage family:
/// `alpha = -n / sum ln(1 - x/T)`, `c = n alpha / T`.
pub fn mle_nhpp1(sample: &BidSample) -> Result<(f64, f64)> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let t = sample.horizon();
    let log_sum: f64 = sample.times().iter().map(|&x| (-x / t).ln_1p()).sum();
    if !(log_sum < 0.0) {
        return Err(Error::Estimation(
            "all events at time 0; one-stage exponent is unbounded".into(),
        ));
    }
    let n = sample.len() as f64;
    let alpha = -n / log_sum;
    Ok((alpha, n * alpha / t))
}

/// Scale estimate `n / h(theta)` given the shape parameters of `shape`
/// (its own `c` is ignored).
pub fn estimate_c(shape: &BaristaParams, n: usize) -> f64 {
    n as f64 / shape.shape_integral()
}
