//! Forward likelihood-ratio selection among the nested one-, two- and
//! three-stage families.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::estimate::{
    estimate_c, fit_nhpp1, ga_fit, FitResult, GaConfig, GridAxis, Likelihood,
};
use crate::params::{BaristaParams, FamilyKind, ModelFamily};
use crate::rng::Seed;
use crate::sample::BidSample;

/// Statistics below this are reported as optimizer under-shoot.
pub const NEGATIVE_LR_TOLERANCE: f64 = 1e-6;

/// `-2 (ll_small - ll_big)` clamped at zero, and whether the raw value was
/// below `-NEGATIVE_LR_TOLERANCE`.
pub fn lr_statistic(ll_small: f64, ll_big: f64) -> (f64, bool) {
    let raw = -2.0 * (ll_small - ll_big);
    (raw.max(0.0), raw < -NEGATIVE_LR_TOLERANCE)
}

/// Survival function of the chi-square distribution with two degrees of
/// freedom.
pub fn chi2_sf_2df(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain("x", x, "[0, inf)"));
    }
    Ok((-x / 2.0).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrTest {
    pub statistic: f64,
    pub p_value: f64,
    /// The larger model's loglik was below the smaller one's by more than
    /// the tolerance, even after the retry.
    pub negative_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub chosen: FamilyKind,
    /// One fit per family, smallest first.
    pub fits: Vec<FitResult>,
    pub lr_12: LrTest,
    /// Present only if the one-vs-two comparison rejected.
    pub lr_23: Option<LrTest>,
    pub alpha_level: f64,
}

impl SelectionResult {
    pub fn fit(&self, kind: FamilyKind) -> &FitResult {
        self.fits
            .iter()
            .find(|f| f.kind() == kind)
            .expect("one fit per family")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectConfig {
    pub two_stage: GaConfig,
    pub three_stage: GaConfig,
    pub alpha_level: f64,
    /// Newton iterations on the exponents after each GA run.
    pub refine_iterations: usize,
}

impl SelectConfig {
    pub fn defaults(horizon: f64, seed: Seed) -> Self {
        Self {
            two_stage: GaConfig::for_family(FamilyKind::TwoStage, horizon, seed.derive(2)),
            three_stage: GaConfig::for_family(FamilyKind::ThreeStage, horizon, seed.derive(3)),
            alpha_level: 0.05,
            refine_iterations: 50,
        }
    }
}

/// Fits all three families, then walks up the nesting: the two-stage model
/// replaces the one-stage one if the LR p-value is at most `alpha_level`,
/// and likewise for three-stage against two-stage.
///
/// The one-stage family is fitted in closed form. The larger families are
/// fitted by GA followed by Newton refinement of the exponents. If a larger
/// fit ends up below the smaller one, it is re-fitted from the smaller
/// model's embedding over a grid of the extra changepoint.
pub fn select_model(sample: &BidSample, cfg: &SelectConfig) -> Result<SelectionResult> {
    if !(cfg.alpha_level > 0.0 && cfg.alpha_level < 1.0) {
        return Err(domain("alpha_level", cfg.alpha_level, "(0, 1)"));
    }
    let one = fit_nhpp1(sample)?;
    let (two, three) = rayon::join(
        || refined_ga_fit(sample, FamilyKind::TwoStage, &cfg.two_stage, cfg.refine_iterations),
        || refined_ga_fit(sample, FamilyKind::ThreeStage, &cfg.three_stage, cfg.refine_iterations),
    );
    let mut two = two?;
    let mut three = three?;

    if two.loglik < one.loglik - NEGATIVE_LR_TOLERANCE {
        if let Some(better) = embed_and_refit(sample, &one, &cfg.two_stage, cfg.refine_iterations)? {
            if better.loglik > two.loglik {
                two = better;
            }
        }
    }
    if three.loglik < two.loglik - NEGATIVE_LR_TOLERANCE {
        if let Some(better) =
            embed_and_refit(sample, &two, &cfg.three_stage, cfg.refine_iterations)?
        {
            if better.loglik > three.loglik {
                three = better;
            }
        }
    }

    let test = |small: &FitResult, big: &FitResult| -> Result<LrTest> {
        let (statistic, negative_flag) = lr_statistic(small.loglik, big.loglik);
        Ok(LrTest {
            statistic,
            p_value: chi2_sf_2df(statistic)?,
            negative_flag,
        })
    };
    let lr_12 = test(&one, &two)?;
    let (chosen, lr_23) = if lr_12.p_value > cfg.alpha_level {
        (FamilyKind::OneStage, None)
    } else {
        let lr_23 = test(&two, &three)?;
        let chosen = if lr_23.p_value > cfg.alpha_level {
            FamilyKind::TwoStage
        } else {
            FamilyKind::ThreeStage
        };
        (chosen, Some(lr_23))
    };
    Ok(SelectionResult {
        chosen,
        fits: vec![one, two, three],
        lr_12,
        lr_23,
        alpha_level: cfg.alpha_level,
    })
}

/// GA fit followed by Newton refinement of the exponents at the GA's
/// changepoints.
pub fn refined_ga_fit(
    sample: &BidSample,
    kind: FamilyKind,
    cfg: &GaConfig,
    refine_iterations: usize,
) -> Result<FitResult> {
    let fit = ga_fit(sample, kind, cfg)?;
    refine_fit(sample, fit, refine_iterations)
}

fn refine_fit(sample: &BidSample, fit: FitResult, iterations: usize) -> Result<FitResult> {
    if iterations == 0 {
        return Ok(fit);
    }
    let lk = Likelihood::new(sample);
    let kind = fit.kind();
    let refined = lk.refine_alphas(&fit.params, kind, iterations)?;
    let ll = lk.loglik(&refined)?;
    if ll <= fit.loglik {
        return Ok(fit);
    }
    rebuild(sample, kind, &refined, ll, fit)
}

/// Recomputes `c` for new shape parameters and repackages the fit.
fn rebuild(
    sample: &BidSample,
    kind: FamilyKind,
    p: &BaristaParams,
    ll: f64,
    template: FitResult,
) -> Result<FitResult> {
    let c_hat = estimate_c(&p.with_c(1.0)?, sample.len());
    let params = p.with_c(c_hat)?;
    let family = match kind {
        FamilyKind::OneStage => ModelFamily::OneStage {
            alpha: params.alpha2(),
            c: c_hat,
            horizon: params.horizon(),
        },
        FamilyKind::TwoStage => ModelFamily::TwoStage {
            alpha2: params.alpha2(),
            alpha3: params.alpha3(),
            d2: params.d2(),
            c: c_hat,
            horizon: params.horizon(),
        },
        FamilyKind::ThreeStage => ModelFamily::ThreeStage(params),
    };
    Ok(FitResult {
        family,
        params,
        loglik: ll,
        c_hat,
        ..template
    })
}

/// Starts the next larger family at the smaller fit's embedding, scans the
/// changepoint the smaller family lacks over its GA range, and refines the
/// exponents at every grid point.
fn embed_and_refit(
    sample: &BidSample,
    small: &FitResult,
    big_cfg: &GaConfig,
    iterations: usize,
) -> Result<Option<FitResult>> {
    let Some(big) = small.kind().larger() else {
        return Ok(None);
    };
    let t = sample.horizon();
    let s = small.family.shape();
    // range of the changepoint the smaller family lacks
    let axis = match big {
        FamilyKind::TwoStage => big_cfg.bounds[2],
        FamilyKind::ThreeStage => big_cfg.bounds[3],
        FamilyKind::OneStage => unreachable!(),
    };
    let axis = GridAxis::linspace(axis.0, axis.1, 21);
    let lk = Likelihood::new(sample);
    let mut best: Option<(BaristaParams, f64)> = None;
    for &cp in &axis.values {
        let shape = match big {
            FamilyKind::TwoStage => vec![s[0], s[0], cp],
            _ => vec![s[0], s[0], s[1], cp, s[2]],
        };
        let Ok(fam) = big.from_shape(&shape, 1.0, t) else {
            continue;
        };
        let start = fam.as_barista()?;
        let refined = lk.refine_alphas(&start, big, iterations)?;
        let ll = lk.loglik(&refined)?;
        if best.as_ref().is_none_or(|(_, b)| ll > *b) {
            best = Some((refined, ll));
        }
    }
    let Some((p, ll)) = best else {
        return Ok(None);
    };
    let template = FitResult {
        family: small.family,
        params: small.params,
        loglik: ll,
        method: crate::estimate::FitMethod::Grid,
        stderrs: None,
        c_hat: small.c_hat,
    };
    rebuild(sample, big, &p, ll, template).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::sample_fixed_n;

    #[test]
    fn lr_examples() {
        assert_eq!(lr_statistic(-5.0, -5.0), (0.0, false));
        assert_eq!(lr_statistic(-10.0, -7.0), (6.0, false));
        assert_eq!(lr_statistic(-7.0 + 1e-9, -7.0), (0.0, false));
        assert_eq!(lr_statistic(-7.0, -7.5), (0.0, true));
    }

    #[test]
    fn chi2_examples() {
        assert_eq!(chi2_sf_2df(0.0).unwrap(), 1.0);
        assert!((chi2_sf_2df(2.0 * 20f64.ln()).unwrap() - 0.05).abs() < 1e-15);
        assert!((chi2_sf_2df(4.6052).unwrap() - 0.10).abs() < 1e-5);
        assert!(chi2_sf_2df(-1.0).is_err());
        assert!(chi2_sf_2df(3.0).unwrap() < chi2_sf_2df(2.9).unwrap());
    }

    fn quick(horizon: f64, seed: Seed) -> SelectConfig {
        let mut cfg = SelectConfig::defaults(horizon, seed);
        cfg.two_stage.generations = 60;
        cfg.three_stage.generations = 60;
        cfg
    }

    #[test]
    fn nesting_and_determinism() {
        let p = BaristaParams::new(3.0, 0.4, 1.0, 2.5, 5.0 / 1440.0, 1.0, 7.0).unwrap();
        let s = sample_fixed_n(&p, 2000, Seed(21));
        let cfg = quick(7.0, Seed(4));
        let a = select_model(&s, &cfg).unwrap();
        let b = select_model(&s, &cfg).unwrap();
        assert_eq!(a, b);
        let ll: Vec<f64> = a.fits.iter().map(|f| f.loglik).collect();
        assert!(ll[1] >= ll[0] - NEGATIVE_LR_TOLERANCE);
        assert!(ll[2] >= ll[1] - NEGATIVE_LR_TOLERANCE);
        assert_eq!(a.chosen, FamilyKind::ThreeStage);
    }

    #[test]
    fn embedding_retry_recovers_smaller_loglik() {
        let p = BaristaParams::homogeneous(1.0, 1.0).unwrap();
        let s = sample_fixed_n(&p, 500, Seed(3));
        let one = fit_nhpp1(&s).unwrap();
        let cfg = GaConfig::for_family(FamilyKind::TwoStage, 1.0, Seed(0));
        let two = embed_and_refit(&s, &one, &cfg, 50).unwrap().unwrap();
        assert!(two.loglik >= one.loglik - 1e-9);
        assert_eq!(two.kind(), FamilyKind::TwoStage);
    }

    #[test]
    fn rejects_bad_level() {
        let s = BidSample::new(vec![0.1, 0.5], 1.0).unwrap();
        let mut cfg = quick(1.0, Seed(0));
        cfg.alpha_level = 0.0;
        assert!(select_model(&s, &cfg).is_err());
    }
}
