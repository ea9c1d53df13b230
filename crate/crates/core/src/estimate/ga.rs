//! Real-coded genetic algorithm maximising the conditional log-likelihood.
//!
//! Each generation: rank the population by fitness, keep the top
//! `elite_fraction` as the mating pool, and create `offspring_pairs` pairs
//! by blend crossover (`u a + (1 - u) b` with a fresh `u` per coordinate)
//! followed by Gaussian mutation clipped to the bounds. The offspring
//! replace the parents, except that the best parent takes the place of one
//! child so the population's best fitness never drops.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closed_form::estimate_c;
use super::likelihood::Likelihood;
use super::{FitMethod, FitResult};
use crate::error::{Error, Result};
use crate::params::FamilyKind;
use crate::rng::Seed;
use crate::sample::BidSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub elite_fraction: f64,
    pub offspring_pairs: usize,
    pub generations: usize,
    /// Search box per gene, `(lo, hi)`.
    pub bounds: Vec<(f64, f64)>,
    /// Standard deviation of the additive mutation per gene.
    pub mutation_scale: Vec<f64>,
    pub seed: Seed,
}

impl GaConfig {
    /// Population 100, top 10% as parents, 50 offspring pairs, 500
    /// generations; mutation scale 2% of each bound width.
    pub fn with_bounds(bounds: Vec<(f64, f64)>, seed: Seed) -> Self {
        let mutation_scale = bounds.iter().map(|(lo, hi)| 0.02 * (hi - lo)).collect();
        Self {
            population_size: 100,
            elite_fraction: 0.10,
            offspring_pairs: 50,
            generations: 500,
            bounds,
            mutation_scale,
            seed,
        }
    }

    /// Default search box for a family on horizon `T`. Exponents use the
    /// 7-day study's box `[1, 15] x [0.1, 1] x [0.5, 15]`; the changepoints
    /// `d1 in [1, 5]` days and `d2 in [0, 0.01]` days are scaled by `T/7`.
    /// The one-stage exponent gets `[0.05, 15]`.
    pub fn for_family(kind: FamilyKind, horizon: f64, seed: Seed) -> Self {
        let k = horizon / 7.0;
        let bounds = match kind {
            FamilyKind::OneStage => vec![(0.05, 15.0)],
            FamilyKind::TwoStage => vec![(0.1, 1.0), (0.5, 15.0), (0.0, 0.01 * k)],
            FamilyKind::ThreeStage => vec![
                (1.0, 15.0),
                (0.1, 1.0),
                (0.5, 15.0),
                (1.0 * k, 5.0 * k),
                (0.0, 0.01 * k),
            ],
        };
        Self::with_bounds(bounds, seed)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.population_size < 2 {
            return bad(format!("population_size must be >= 2, got {}", self.population_size));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return bad(format!("elite_fraction must be in (0, 1], got {}", self.elite_fraction));
        }
        if self.offspring_pairs == 0 {
            return bad("offspring_pairs must be >= 1".into());
        }
        if self.bounds.len() != dim || self.mutation_scale.len() != dim {
            return bad(format!(
                "expected {dim} bounds and mutation scales, got {} and {}",
                self.bounds.len(),
                self.mutation_scale.len()
            ));
        }
        if let Some((lo, hi)) = self.bounds.iter().find(|(lo, hi)| !(lo < hi)) {
            return bad(format!("bound ({lo}, {hi}) is empty"));
        }
        if self.mutation_scale.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return bad("mutation scales must be finite and >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaOutcome {
    pub best: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness seen so far, after the initial population and after
    /// each generation.
    pub history: Vec<f64>,
}

/// Maximises `fitness` over the box in `cfg`. Infeasible points should
/// score `-inf`. Fitness is evaluated in parallel but reduced in index
/// order, so the result depends only on the seed.
pub fn genetic_maximize<F>(cfg: &GaConfig, fitness: F) -> Result<GaOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = cfg.bounds.len();
    cfg.validate(dim)?;
    let mut rng = cfg.seed.rng();
    let evaluate = |pop: &[Vec<f64>]| -> Vec<f64> {
        pop.par_iter()
            .map(|x| {
                let f = fitness(x);
                if f.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    f
                }
            })
            .collect()
    };

    let mut population: Vec<Vec<f64>> = (0..cfg.population_size)
        .map(|_| {
            cfg.bounds
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..=hi))
                .collect()
        })
        .collect();
    let mut scores = evaluate(&population);
    let mut best_idx = argmax(&scores);
    let mut best = population[best_idx].clone();
    let mut best_fitness = scores[best_idx];
    let mut history = Vec::with_capacity(cfg.generations + 1);
    history.push(best_fitness);

    let elite_count = ((cfg.elite_fraction * population.len() as f64).ceil() as usize)
        .clamp(1, population.len());
    let noise: Vec<Option<Normal<f64>>> = cfg
        .mutation_scale
        .iter()
        .map(|&s| (s > 0.0).then(|| Normal::new(0.0, s).expect("finite scale")))
        .collect();

    for _ in 0..cfg.generations {
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let elite: Vec<&Vec<f64>> = order[..elite_count].iter().map(|&i| &population[i]).collect();

        let mut offspring = Vec::with_capacity(2 * cfg.offspring_pairs);
        for _ in 0..cfg.offspring_pairs {
            let (a, b) = if elite.len() >= 2 {
                let pair: Vec<&&Vec<f64>> = elite.choose_multiple(&mut rng, 2).collect();
                (*pair[0], *pair[1])
            } else {
                (elite[0], elite[0])
            };
            let mut c1 = Vec::with_capacity(dim);
            let mut c2 = Vec::with_capacity(dim);
            for i in 0..dim {
                let u: f64 = rng.random();
                c1.push(u * a[i] + (1.0 - u) * b[i]);
                c2.push((1.0 - u) * a[i] + u * b[i]);
            }
            for child in [&mut c1, &mut c2] {
                for (i, g) in child.iter_mut().enumerate() {
                    if let Some(n) = &noise[i] {
                        *g += n.sample(&mut rng);
                    }
                    let (lo, hi) = cfg.bounds[i];
                    *g = g.clamp(lo, hi);
                }
            }
            offspring.push(c1);
            offspring.push(c2);
        }
        offspring[0] = population[order[0]].clone();
        population = offspring;
        scores = evaluate(&population);
        best_idx = argmax(&scores);
        if scores[best_idx] > best_fitness {
            best_fitness = scores[best_idx];
            best = population[best_idx].clone();
        }
        history.push(best_fitness);
    }
    Ok(GaOutcome {
        best,
        best_fitness,
        history,
    })
}

/// First index of the maximum.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Fits `kind` to `sample` by GA search over its shape parameters, then
/// sets `c` from the count.
pub fn ga_fit(sample: &BidSample, kind: FamilyKind, cfg: &GaConfig) -> Result<FitResult> {
    Ok(ga_fit_traced(sample, kind, cfg)?.0)
}

/// As [`ga_fit`], also returning the fitness history.
pub fn ga_fit_traced(
    sample: &BidSample,
    kind: FamilyKind,
    cfg: &GaConfig,
) -> Result<(FitResult, Vec<f64>)> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    cfg.validate(kind.shape_dim())?;
    let t = sample.horizon();
    let lk = Likelihood::new(sample);
    let outcome = genetic_maximize(cfg, |genes| match kind.from_shape(genes, 1.0, t) {
        Ok(fam) => fam
            .as_barista()
            .map(|p| lk.loglik_unchecked(&p))
            .unwrap_or(f64::NEG_INFINITY),
        Err(_) => f64::NEG_INFINITY,
    })?;
    if !outcome.best_fitness.is_finite() {
        return Err(Error::Estimation(
            "genetic search found no feasible parameter vector".into(),
        ));
    }
    let unit = kind.from_shape(&outcome.best, 1.0, t)?.as_barista()?;
    let c_hat = estimate_c(&unit, sample.len());
    let family = kind.from_shape(&outcome.best, c_hat, t)?;
    let params = family.as_barista()?;
    Ok((
        FitResult {
            family,
            params,
            loglik: outcome.best_fitness,
            method: FitMethod::Ga,
            stderrs: None,
            c_hat,
        },
        outcome.history,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::BaristaParams;
    use crate::simulate::sample_fixed_n;

    #[test]
    fn maximises_a_quadratic() {
        let cfg = GaConfig::with_bounds(vec![(-5.0, 5.0), (-5.0, 5.0)], Seed(1));
        let out = genetic_maximize(&cfg, |x| -(x[0] - 1.0).powi(2) - (x[1] + 2.0).powi(2)).unwrap();
        assert!((out.best[0] - 1.0).abs() < 0.05);
        assert!((out.best[1] + 2.0).abs() < 0.05);
        assert!(out.history.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(out.history.len(), 501);
    }

    #[test]
    fn zero_generations_returns_best_initial() {
        let mut cfg = GaConfig::with_bounds(vec![(0.0, 1.0)], Seed(5));
        cfg.generations = 0;
        let out = genetic_maximize(&cfg, |x| x[0]).unwrap();
        assert_eq!(out.history.len(), 1);

        let mut rng = Seed(5).rng();
        let init: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..=1.0)).collect();
        let best = init.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(out.best[0], best);
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = GaConfig::with_bounds(vec![(1.0, 1.0)], Seed(0));
        assert!(cfg.validate(1).is_err());
        cfg.bounds = vec![(0.0, 1.0)];
        assert!(cfg.validate(1).is_ok());
        assert!(cfg.validate(2).is_err());
        cfg.population_size = 1;
        assert!(cfg.validate(1).is_err());
    }

    #[test]
    fn deterministic_fit() {
        let p = BaristaParams::new(3.0, 0.4, 1.0, 2.5, 5.0 / 1440.0, 1.0, 7.0).unwrap();
        let s = sample_fixed_n(&p, 1000, Seed(8));
        let mut cfg = GaConfig::for_family(FamilyKind::ThreeStage, 7.0, Seed(2));
        cfg.generations = 50;
        let a = ga_fit(&s, FamilyKind::ThreeStage, &cfg).unwrap();
        let b = ga_fit(&s, FamilyKind::ThreeStage, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
