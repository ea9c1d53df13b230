//! Closed-form evaluation of the process: intensity, mean count, CDF,
//! density, quantiles, and the additive / regenerative transformations.
//!
//! Everything is written in the reverse-time variable `x = 1 - s/T`, where
//! each stage is a pure power of `x`. The integral of the intensity over
//! `[0, T]` divided by `c` is
//!
//! ```text
//! h / T = u^(a2-a1) (1 - u^a1) / a1 + (u^a2 - v^a2) / a2 + v^a2 / a3
//! ```
//!
//! with `u = 1 - d1/T` and `v = d2/T`; the three summands are the stage
//! masses used throughout this module.

use crate::error::{domain, Error, Result};
use crate::params::BaristaParams;

const SHAPE_RTOL: f64 = 1e-9;

/// Stage masses of the unit-scale intensity, in units of `T`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StageMasses {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl StageMasses {
    pub fn total(&self) -> f64 {
        self.a1 + self.a2 + self.a3
    }
}

impl BaristaParams {
    /// `1 - d1/T`.
    pub(crate) fn u(&self) -> f64 {
        1.0 - self.d1() / self.horizon()
    }

    /// `d2/T`.
    pub(crate) fn v(&self) -> f64 {
        self.d2() / self.horizon()
    }

    pub(crate) fn stage_masses(&self) -> StageMasses {
        let [a1, a2, a3] = self.alphas();
        let ln_u = self.u().ln();
        let v = self.v();
        let u_a2 = (a2 * ln_u).exp();
        let v_a2 = if v > 0.0 { v.powf(a2) } else { 0.0 };
        StageMasses {
            a1: ((a2 - a1) * ln_u).exp() * -(a1 * ln_u).exp_m1() / a1,
            a2: (u_a2 - v_a2) / a2,
            a3: v_a2 / a3,
        }
    }

    /// `m(T) / c`, the integral of the unit-scale intensity over `[0, T]`.
    pub fn shape_integral(&self) -> f64 {
        self.horizon() * self.stage_masses().total()
    }

    /// The constant `C = c / m(T)` that turns the intensity into the
    /// density of a single arrival time. It does not depend on `c`.
    pub fn normalization_constant(&self) -> f64 {
        let [a1, a2, a3] = self.alphas();
        let u = self.u();
        let v = self.v();
        let v_a2 = if v > 0.0 { v.powf(a2) } else { 0.0 };
        let denom = u.powf(a2) * a3 * (a1 - a2) + a3 * a2 * u.powf(a2 - a1) + v_a2 * a1 * (a2 - a3);
        a1 * a2 * a3 / self.horizon() / denom
    }

    fn check_time(&self, s: f64) -> Result<()> {
        if s.is_finite() && (0.0..=self.horizon()).contains(&s) {
            Ok(())
        } else {
            Err(domain("s", s, format!("[0, {}]", self.horizon())))
        }
    }

    /// Reverse time `1 - s/T` and its logarithm.
    fn reverse(&self, s: f64) -> (f64, f64) {
        let r = s / self.horizon();
        (1.0 - r, (-r).ln_1p())
    }

    /// Intensity divided by `c`.
    fn unit_intensity(&self, s: f64) -> f64 {
        let [a1, a2, a3] = self.alphas();
        let (x, ln_x) = self.reverse(s);
        match self.stage_of(s) {
            1 => ((a2 - a1) * self.u().ln() + (a1 - 1.0) * ln_x).exp(),
            2 => pow(x, ln_x, a2 - 1.0),
            _ => {
                let ln_v = self.v().ln();
                ((a2 - a3) * ln_v).exp() * pow(x, ln_x, a3 - 1.0)
            }
        }
    }

    /// Arrival rate at time `s`. Infinite at `s = T` when the final
    /// exponent is below one.
    pub fn intensity(&self, s: f64) -> Result<f64> {
        self.check_time(s)?;
        Ok(self.c() * self.unit_intensity(s))
    }

    /// Mean count divided by `c * T`.
    fn unit_mean(&self, s: f64) -> f64 {
        let [a1, a2, a3] = self.alphas();
        let (x, ln_x) = self.reverse(s);
        let ln_u = self.u().ln();
        match self.stage_of(s) {
            1 => ((a2 - a1) * ln_u).exp() * -(a1 * ln_x).exp_m1() / a1,
            2 => {
                let m = self.stage_masses();
                m.a1 + ((a2 * ln_u).exp() - pow(x, ln_x, a2)) / a2
            }
            _ => {
                let m = self.stage_masses();
                let v = self.v();
                m.a1 + m.a2 + v.powf(a2 - a3) * (v.powf(a3) - pow(x, ln_x, a3)) / a3
            }
        }
    }

    /// Expected number of arrivals on `[0, s]`.
    pub fn mean_count(&self, s: f64) -> Result<f64> {
        self.check_time(s)?;
        Ok(self.c() * self.horizon() * self.unit_mean(s))
    }

    /// Distribution function of a single arrival time given the count.
    pub fn cdf(&self, s: f64) -> Result<f64> {
        self.check_time(s)?;
        if s == self.horizon() {
            return Ok(1.0);
        }
        Ok((self.unit_mean(s) / self.stage_masses().total()).clamp(0.0, 1.0))
    }

    /// `1 - cdf(s)`, evaluated from the right end so that it keeps full
    /// relative precision near `T`.
    pub fn survival(&self, s: f64) -> Result<f64> {
        self.check_time(s)?;
        let [a1, a2, a3] = self.alphas();
        let m = self.stage_masses();
        let (x, ln_x) = self.reverse(s);
        let tail = match self.stage_of(s) {
            1 => {
                let ln_u = self.u().ln();
                m.a3 + m.a2 + ((a2 - a1) * ln_u).exp() * (pow(x, ln_x, a1) - (a1 * ln_u).exp()) / a1
            }
            2 => {
                let v = self.v();
                let v_a2 = if v > 0.0 { v.powf(a2) } else { 0.0 };
                m.a3 + (pow(x, ln_x, a2) - v_a2) / a2
            }
            _ => self.v().powf(a2 - a3) * pow(x, ln_x, a3) / a3,
        };
        Ok((tail / m.total()).clamp(0.0, 1.0))
    }

    /// Density of a single arrival time, `intensity / m(T)`.
    pub fn pdf(&self, s: f64) -> Result<f64> {
        self.check_time(s)?;
        Ok(self.unit_intensity(s) / self.shape_integral())
    }

    /// Quantile function. Each branch inverts the corresponding piece of
    /// the CDF; the branch is picked by comparing `p` with `F(d1)` and
    /// `F(T - d2)`.
    pub fn inverse_cdf(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
            return Err(domain("p", p, "[0, 1]"));
        }
        let t = self.horizon();
        if p == 1.0 {
            return Ok(t);
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        let [a1, a2, a3] = self.alphas();
        let m = self.stage_masses();
        let total = m.total();
        let ln_u = self.u().ln();
        let f_d1 = m.a1 / total;
        let f_d2 = (m.a1 + m.a2) / total;
        let ln_x = if p < f_d1 {
            // 1 - x^a1 = p * total * a1 * u^(a1 - a2)
            let q = p * total * a1 * ((a1 - a2) * ln_u).exp();
            (-q).ln_1p() / a1
        } else if p < f_d2 {
            let x_a2 = (a2 * ln_u).exp() - (p * total - m.a1) * a2;
            x_a2.max(0.0).ln() / a2
        } else {
            let ln_v = self.v().ln();
            let ln_x_a3 = ((1.0 - p) * total * a3).ln() - (a2 - a3) * ln_v;
            ln_x_a3 / a3
        };
        let s = -t * ln_x.exp_m1();
        Ok(if s >= t { t.next_down() } else { s.max(0.0) })
    }

    /// Process seen by an observer who starts counting at `beta * T`, on a
    /// clock that restarts at zero there. Intensity of the result at `s`
    /// equals the original intensity at `beta * T + s`.
    ///
    /// When `beta * T` already lies in the final stage the result is a
    /// single-stage process with exponent `alpha3`.
    pub fn restrict(&self, beta: f64) -> Result<BaristaParams> {
        if !(beta.is_finite() && (0.0..1.0).contains(&beta)) {
            return Err(domain("beta", beta, "[0, 1)"));
        }
        if beta == 0.0 {
            return Ok(*self);
        }
        let [a1, a2, a3] = self.alphas();
        let t = self.horizon();
        let start = beta * t;
        let t_beta = (1.0 - beta) * t;
        if self.d2() == 0.0 || start < self.final_stage_start() {
            let c_beta = self.c() * (1.0 - beta).powf(a2 - 1.0);
            let d1_beta = (self.d1() - start).max(0.0);
            let d2_beta = self.d2().min(t_beta);
            BaristaParams::new(a1, a2, a3, d1_beta, d2_beta, c_beta, t_beta)
        } else {
            let c_beta = self.c() * self.v().powf(a2 - a3) * (1.0 - beta).powf(a3 - 1.0);
            BaristaParams::new(a3, a3, a3, 0.0, 0.0, c_beta, t_beta)
        }
    }

    /// Superposition of independent processes sharing all shape parameters:
    /// the scales add.
    pub fn superpose(parts: &[BaristaParams]) -> Result<BaristaParams> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidParams("superpose needs at least one process".into()))?;
        let reference = [
            ("alpha1", first.alpha1()),
            ("alpha2", first.alpha2()),
            ("alpha3", first.alpha3()),
            ("d1", first.d1()),
            ("d2", first.d2()),
            ("horizon", first.horizon()),
        ];
        let mut c = 0.0;
        for (index, p) in parts.iter().enumerate() {
            let values = [p.alpha1(), p.alpha2(), p.alpha3(), p.d1(), p.d2(), p.horizon()];
            for ((param, expected), found) in reference.iter().zip(values) {
                if (found - expected).abs() > SHAPE_RTOL * found.abs().max(expected.abs()) {
                    return Err(Error::ShapeMismatch {
                        index,
                        param,
                        found,
                        expected: *expected,
                    });
                }
            }
            c += p.c();
        }
        first.with_c(c)
    }
}

/// `x^a` given `ln x`, with `0^a = 0` for positive `a`.
fn pow(x: f64, ln_x: f64, a: f64) -> f64 {
    if x == 0.0 {
        if a > 0.0 {
            0.0
        } else if a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        (a * ln_x).exp()
    }
}
