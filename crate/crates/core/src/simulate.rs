//! Exact sampling by inversion, and bidder-level simulators whose pooled
//! bid times follow the one- and two-stage laws.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::params::{BaristaParams, ModelFamily};
use crate::rng::Seed;
use crate::sample::BidSample;

/// Upper bound on rebid attempts per bidder before giving up.
pub const MAX_ATTEMPTS: u64 = 1_000_000;

fn sorted_sample(mut times: Vec<f64>, horizon: f64) -> BidSample {
    // stable: ties keep generation order
    times.sort_by(f64::total_cmp);
    BidSample::from_sorted_unchecked(times, horizon)
}

/// `n` independent arrival times drawn by inverting the CDF, sorted.
pub fn sample_fixed_n(p: &BaristaParams, n: usize, seed: Seed) -> BidSample {
    sample_fixed_n_with(p, n, &mut seed.rng())
}

pub fn sample_fixed_n_with<R: Rng + ?Sized>(p: &BaristaParams, n: usize, rng: &mut R) -> BidSample {
    let times = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            p.inverse_cdf(u).expect("uniform draw lies in [0, 1)")
        })
        .collect();
    sorted_sample(times, p.horizon())
}

/// A full realisation on `[0, T]`: Poisson(`m(T)`) arrivals placed by
/// inversion.
pub fn sample_poisson_count(p: &BaristaParams, seed: Seed) -> BidSample {
    sample_poisson_count_with(p, &mut seed.rng())
}

pub fn sample_poisson_count_with<R: Rng + ?Sized>(p: &BaristaParams, rng: &mut R) -> BidSample {
    let mean = p.c() * p.shape_integral();
    let n = poisson_draw(mean, rng);
    sample_fixed_n_with(p, n, rng)
}

fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive mean");
    dist.sample(rng) as usize
}

/// Nested-uniform walk: `X1 ~ U(a, b)`, `X(k+1) ~ U(Xk, b)`, stopping at each point
/// with probability `alpha`. Returns the stopping point, whose survival
/// function is `(1 - (s - a)/(b - a))^alpha`.
pub fn sample_geometric_uniform(a: f64, b: f64, alpha: f64, seed: Seed) -> Result<f64> {
    sample_geometric_uniform_with(a, b, alpha, &mut seed.rng())
}

pub fn sample_geometric_uniform_with<R: Rng + ?Sized>(
    a: f64,
    b: f64,
    alpha: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(domain("b", b, format!("({a}, inf) with finite a")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain("alpha", alpha, "(0, 1]"));
    }
    let mut x = rng.random_range(a..b);
    for _ in 0..MAX_ATTEMPTS {
        if rng.random_bool(alpha) {
            return Ok(x);
        }
        x = uniform_above(x, b, rng);
    }
    Err(Error::Simulation(format!(
        "geometric walk did not stop within {MAX_ATTEMPTS} attempts (alpha = {alpha})"
    )))
}

/// `U(x, b)`; collapses to `x` once the interval has no representable
/// interior.
fn uniform_above<R: Rng + ?Sized>(x: f64, b: f64, rng: &mut R) -> f64 {
    let y = x + (b - x) * rng.random::<f64>();
    if y < b {
        y
    } else {
        x
    }
}

/// Bidder-level parameters of the geometric-uniform rebid strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BidderStrategyParams {
    /// Bidder arrival rate (per time unit).
    pub lambda: f64,
    /// Per-attempt bid probability up to `T - d`.
    pub alpha2: f64,
    /// Per-attempt bid probability on `(T - d, T]`.
    pub alpha3: f64,
    /// Width of the final window.
    pub d: f64,
    pub horizon: f64,
}

impl BidderStrategyParams {
    pub fn new(lambda: f64, alpha2: f64, alpha3: f64, d: f64, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(domain("horizon", horizon, "(0, inf)"));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(domain("lambda", lambda, "(0, inf)"));
        }
        if !(alpha2 > 0.0 && alpha2 <= alpha3 && alpha3 <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "need 0 < alpha2 <= alpha3 <= 1, got alpha2 = {alpha2}, alpha3 = {alpha3}"
            )));
        }
        if !(0.0..=horizon).contains(&d) {
            return Err(domain("d", d, format!("[0, {horizon}]")));
        }
        Ok(Self {
            lambda,
            alpha2,
            alpha3,
            d,
            horizon,
        })
    }

    /// The single-exponent strategy (`d = 0`).
    pub fn one_stage(lambda: f64, alpha: f64, horizon: f64) -> Result<Self> {
        Self::new(lambda, alpha, alpha, 0.0, horizon)
    }

    /// Probability that an arriving bidder eventually bids,
    /// `1 - (d/T)^alpha2 (1 - alpha2/alpha3)`.
    pub fn success_probability(&self) -> f64 {
        1.0 - (self.d / self.horizon).powf(self.alpha2) * (1.0 - self.alpha2 / self.alpha3)
    }

    /// Expected number of bids per auction.
    pub fn expected_bids(&self) -> f64 {
        self.lambda * self.horizon * self.success_probability()
    }

    /// The bid-arrival law this strategy produces.
    pub fn bid_process(&self) -> Result<BaristaParams> {
        let c = self.expected_bids();
        let family = if self.d == 0.0 || self.alpha2 == self.alpha3 {
            ModelFamily::OneStage {
                alpha: self.alpha2,
                c: 1.0,
                horizon: self.horizon,
            }
        } else {
            ModelFamily::TwoStage {
                alpha2: self.alpha2,
                alpha3: self.alpha3,
                d2: self.d,
                c: 1.0,
                horizon: self.horizon,
            }
        };
        let unit = family.as_barista()?;
        unit.with_c(c / unit.shape_integral())
    }
}

/// Simulates one auction under the rebid strategy and returns the times of
/// the bids that were actually placed.
///
/// Bidders arrive as a Poisson(`lambda`) stream. A bidder bids at the
/// current potential time with probability `alpha2` (before `T - d`) or
/// `alpha3` (after), and otherwise draws the next potential time uniformly
/// on the remaining interval. On first entering `(T - d, T]` without having
/// bid, the bidder leaves with probability `1 - alpha2/alpha3`.
pub fn simulate_bidder_strategy(sp: &BidderStrategyParams, seed: Seed) -> Result<BidSample> {
    let mut rng = seed.rng();
    let t = sp.horizon;
    let boundary = t - sp.d;
    let stay = sp.alpha2 / sp.alpha3;
    let n = poisson_draw(sp.lambda * t, &mut rng);
    let mut bids = Vec::with_capacity(n);
    for _ in 0..n {
        let mut x = rng.random_range(0.0..t);
        let mut entered_final = false;
        let mut attempts = 0u64;
        let bid = loop {
            attempts += 1;
            if attempts > MAX_ATTEMPTS {
                return Err(Error::Simulation(format!(
                    "bidder exceeded {MAX_ATTEMPTS} attempts"
                )));
            }
            let prob = if x <= boundary {
                sp.alpha2
            } else {
                if !entered_final {
                    entered_final = true;
                    if !rng.random_bool(stay) {
                        break None;
                    }
                }
                sp.alpha3
            };
            if rng.random_bool(prob) {
                break Some(x);
            }
            x = uniform_above(x, t, &mut rng);
        };
        bids.extend(bid);
    }
    Ok(sorted_sample(bids, t))
}

/// Intensity of bids when Poisson(`lambda`) bidders each place one bid
/// uniformly on their remaining time: `lambda ln(T / (T - t))`.
pub fn uniform_rebid_intensity(lambda: f64, horizon: f64, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0 && t < horizon) {
        return Err(domain("t", t, format!("[0, {horizon})")));
    }
    Ok(lambda * -(-t / horizon).ln_1p())
}

/// One auction under the single-uniform-bid strategy: each Poisson(`lambda`)
/// bidder arriving at `s` bids once at `U(s, T)`.
pub fn simulate_uniform_rebid(lambda: f64, horizon: f64, seed: Seed) -> Result<BidSample> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(domain("lambda", lambda, "(0, inf)"));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(domain("horizon", horizon, "(0, inf)"));
    }
    let mut rng = seed.rng();
    let n = poisson_draw(lambda * horizon, &mut rng);
    let bids = (0..n)
        .map(|_| {
            let s = rng.random_range(0.0..horizon);
            uniform_above(s, horizon, &mut rng)
        })
        .collect();
    Ok(sorted_sample(bids, horizon))
}
