//! Conditional log-likelihood of the arrival times given their count, with
//! analytic first and second derivatives in the three exponents.
//!
//! Writing `h` for the integral of the unit-scale intensity (so `C = 1/h`),
//!
//! ```text
//! L = -n ln h + n1 (a2 - a1) ln u + n3 (a2 - a3) ln v + sum_j (a_j - 1) S_j
//! ```
//!
//! where `S_j` sums `ln(1 - x/T)` over the events of stage `j`. The
//! derivatives of `h` are taken term by term from its closed form.

use crate::error::{Error, Result};
use crate::params::{BaristaParams, FamilyKind};
use crate::sample::BidSample;

/// Per-stage counts and log-reverse-time sums for one set of changepoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageStats {
    pub n: [usize; 3],
    pub sums: [f64; 3],
}

/// A sample prepared for repeated likelihood evaluation: prefix sums of
/// `ln(1 - x/T)` make each evaluation `O(log n)`.
#[derive(Debug, Clone)]
pub struct Likelihood<'a> {
    sample: &'a BidSample,
    prefix: Vec<f64>,
}

impl<'a> Likelihood<'a> {
    pub fn new(sample: &'a BidSample) -> Self {
        let t = sample.horizon();
        let mut prefix = Vec::with_capacity(sample.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for &x in sample.times() {
            // log1p keeps precision for events close to T
            acc += (-x / t).ln_1p();
            prefix.push(acc);
        }
        Self { sample, prefix }
    }

    pub fn sample(&self) -> &BidSample {
        self.sample
    }

    fn check(&self, p: &BaristaParams) -> Result<()> {
        if p.horizon() != self.sample.horizon() {
            return Err(Error::InvalidParams(format!(
                "parameter horizon {} differs from sample horizon {}",
                p.horizon(),
                self.sample.horizon()
            )));
        }
        Ok(())
    }

    pub fn stage_stats(&self, p: &BaristaParams) -> StageStats {
        let n = self.sample.len();
        let i1 = self.sample.count_lt(p.d1());
        let i3 = if p.d2() > 0.0 {
            self.sample.count_lt(p.final_stage_start()).max(i1)
        } else {
            n
        };
        StageStats {
            n: [i1, i3 - i1, n - i3],
            sums: [
                self.prefix[i1],
                self.prefix[i3] - self.prefix[i1],
                self.prefix[n] - self.prefix[i3],
            ],
        }
    }

    /// Conditional log-likelihood. Returns an error only for a horizon
    /// mismatch; the sample type already guarantees every event is `< T`.
    pub fn loglik(&self, p: &BaristaParams) -> Result<f64> {
        self.check(p)?;
        Ok(self.loglik_unchecked(p))
    }

    pub(crate) fn loglik_unchecked(&self, p: &BaristaParams) -> f64 {
        let st = self.stage_stats(p);
        let [a1, a2, a3] = p.alphas();
        let n = self.sample.len() as f64;
        let mut ll = -n * p.shape_integral().ln();
        if st.n[0] > 0 {
            ll += st.n[0] as f64 * (a2 - a1) * p.u().ln();
        }
        if st.n[2] > 0 {
            ll += st.n[2] as f64 * (a2 - a3) * p.v().ln();
        }
        ll + (a1 - 1.0) * st.sums[0] + (a2 - 1.0) * st.sums[1] + (a3 - 1.0) * st.sums[2]
    }

    /// Gradient in `(alpha1, alpha2, alpha3)` at fixed changepoints.
    pub fn gradient(&self, p: &BaristaParams) -> Result<[f64; 3]> {
        self.check(p)?;
        let st = self.stage_stats(p);
        let d = ShapeIntegral::of(p);
        let n = self.sample.len() as f64;
        let (n1_ln_u, n3_ln_v) = self.boundary_terms(p, &st);
        Ok([
            -n * d.grad[0] / d.h - n1_ln_u + st.sums[0],
            -n * d.grad[1] / d.h + n1_ln_u + n3_ln_v + st.sums[1],
            -n * d.grad[2] / d.h - n3_ln_v + st.sums[2],
        ])
    }

    /// Hessian in `(alpha1, alpha2, alpha3)` at fixed changepoints. Only the
    /// `-n ln h` term is nonlinear in the exponents.
    pub fn hessian(&self, p: &BaristaParams) -> Result<[[f64; 3]; 3]> {
        self.check(p)?;
        let d = ShapeIntegral::of(p);
        let n = self.sample.len() as f64;
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let v = -n * (d.hess[i][j] / d.h - d.grad[i] * d.grad[j] / (d.h * d.h));
                out[i][j] = v;
                out[j][i] = v;
            }
        }
        Ok(out)
    }

    fn boundary_terms(&self, p: &BaristaParams, st: &StageStats) -> (f64, f64) {
        let a = if st.n[0] > 0 {
            st.n[0] as f64 * p.u().ln()
        } else {
            0.0
        };
        let b = if st.n[2] > 0 {
            st.n[2] as f64 * p.v().ln()
        } else {
            0.0
        };
        (a, b)
    }

    /// Newton iterations on the exponents at fixed changepoints, with step
    /// halving so the likelihood never decreases. Exponents that are tied
    /// together by `kind` move together (one-stage: all three; two-stage:
    /// `alpha1` follows `alpha2`).
    pub fn refine_alphas(
        &self,
        p: &BaristaParams,
        kind: FamilyKind,
        max_iter: usize,
    ) -> Result<BaristaParams> {
        self.check(p)?;
        let basis: &[[f64; 3]] = match kind {
            FamilyKind::OneStage => &[[1.0, 1.0, 1.0]],
            FamilyKind::TwoStage => &[[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            FamilyKind::ThreeStage => &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
        let k = basis.len();
        let mut current = *p;
        let mut ll = self.loglik_unchecked(&current);
        for _ in 0..max_iter {
            let g = self.gradient(&current)?;
            let h = self.hessian(&current)?;
            let mut rg = [0.0; 3];
            let mut rh = [[0.0; 3]; 3];
            for a in 0..k {
                rg[a] = (0..3).map(|i| basis[a][i] * g[i]).sum();
                for b in 0..k {
                    rh[a][b] = (0..3)
                        .flat_map(|i| (0..3).map(move |j| (i, j)))
                        .map(|(i, j)| basis[a][i] * h[i][j] * basis[b][j])
                        .sum();
                }
            }
            let neg_h: Vec<Vec<f64>> = (0..k).map(|a| (0..k).map(|b| -rh[a][b]).collect()).collect();
            // Newton direction if the reduced Hessian is negative definite,
            // plain gradient ascent otherwise.
            let step = solve_spd(&neg_h, &rg[..k]).unwrap_or_else(|| rg[..k].to_vec());
            let mut scale = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let mut alphas = current.alphas();
                for a in 0..k {
                    for i in 0..3 {
                        alphas[i] += scale * step[a] * basis[a][i];
                    }
                }
                if let Ok(cand) = current.with_alphas(alphas) {
                    let cand_ll = self.loglik_unchecked(&cand);
                    if cand_ll.is_finite() && cand_ll >= ll {
                        let gain = cand_ll - ll;
                        current = cand;
                        ll = cand_ll;
                        improved = gain > 1e-13 * ll.abs().max(1.0);
                        break;
                    }
                }
                scale *= 0.5;
            }
            if !improved {
                break;
            }
        }
        Ok(current)
    }
}

/// Cholesky solve of `a x = b` for a small symmetric matrix; `None` if `a`
/// is not positive definite.
fn solve_spd(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let k = b.len();
    let mut l = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let s: f64 = (0..j).map(|m| l[i][m] * l[j][m]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; k];
    for i in 0..k {
        y[i] = (b[i] - (0..i).map(|m| l[i][m] * y[m]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        x[i] = (y[i] - (i + 1..k).map(|m| l[m][i] * x[m]).sum::<f64>()) / l[i][i];
    }
    Some(x)
}

/// `h` with its gradient and Hessian in the exponents.
#[derive(Debug, Clone, Copy)]
pub struct ShapeIntegral {
    pub h: f64,
    pub grad: [f64; 3],
    pub hess: [[f64; 3]; 3],
}

impl ShapeIntegral {
    pub fn of(p: &BaristaParams) -> Self {
        let [a1, a2, a3] = p.alphas();
        let t = p.horizon();
        let l = p.u().ln();
        let v = p.v();
        let u21 = ((a2 - a1) * l).exp();
        let u2 = (a2 * l).exp();
        // v^a2, v^a2 ln v, v^a2 ln^2 v, all vanishing at v = 0
        let (v2, vl, vll) = if v > 0.0 {
            let m = v.ln();
            let v2 = v.powf(a2);
            (v2, v2 * m, v2 * m * m)
        } else {
            (0.0, 0.0, 0.0)
        };
        let h = t * p.stage_masses().total();
        let g1 = -l * u21 / a1 - u21 / (a1 * a1) + u2 / (a1 * a1);
        let g2 = l * u21 / a1 - l * u2 / a1 + l * u2 / a2 - u2 / (a2 * a2) - vl / a2
            + v2 / (a2 * a2)
            + vl / a3;
        let g3 = -v2 / (a3 * a3);
        let h11 = u21 * (l * l / a1 + 2.0 * l / (a1 * a1) + 2.0 / a1.powi(3)) - 2.0 * u2 / a1.powi(3);
        let h12 = -l * u21 * (l / a1 + 1.0 / (a1 * a1)) + l * u2 / (a1 * a1);
        let h22 = l * l * u21 / a1 - l * l * u2 / a1 + l * l * u2 / a2 - 2.0 * l * u2 / (a2 * a2)
            + 2.0 * u2 / a2.powi(3)
            - vll / a2
            + 2.0 * vl / (a2 * a2)
            - 2.0 * v2 / a2.powi(3)
            + vll / a3;
        let h23 = -vl / (a3 * a3);
        let h33 = 2.0 * v2 / a3.powi(3);
        Self {
            h,
            grad: [t * g1, t * g2, t * g3],
            hess: [
                [t * h11, t * h12, 0.0],
                [t * h12, t * h22, t * h23],
                [0.0, t * h23, t * h33],
            ],
        }
    }
}

/// `dC/d alpha_j` for `C = 1/h`.
pub fn normalization_gradient(p: &BaristaParams) -> [f64; 3] {
    let d = ShapeIntegral::of(p);
    let c2 = 1.0 / (d.h * d.h);
    [-d.grad[0] * c2, -d.grad[1] * c2, -d.grad[2] * c2]
}

/// Conditional log-likelihood of `sample` under `p`.
pub fn loglik(sample: &BidSample, p: &BaristaParams) -> Result<f64> {
    Likelihood::new(sample).loglik(p)
}

pub fn loglik_gradient(sample: &BidSample, p: &BaristaParams) -> Result<[f64; 3]> {
    Likelihood::new(sample).gradient(p)
}

pub fn loglik_hessian(sample: &BidSample, p: &BaristaParams) -> Result<[[f64; 3]; 3]> {
    Likelihood::new(sample).hessian(p)
}
