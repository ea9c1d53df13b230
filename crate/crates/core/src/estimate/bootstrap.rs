use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::sample::BidSample;

/// Largest tolerated fraction of failed refits.
pub const MAX_FAILURE_FRACTION: f64 = 0.2;

/// Nonparametric bootstrap standard errors: resample the pooled event times
/// with replacement `replicates` times, refit each, and report the sample
/// standard deviation of every returned parameter.
///
/// Replicate `i` draws from `seed.derive(i)`, so the result is independent
/// of thread scheduling. With two replicates the estimate is computed but
/// is of little use.
pub fn bootstrap_se<F>(
    sample: &BidSample,
    fitter: F,
    replicates: usize,
    seed: Seed,
) -> Result<Vec<f64>>
where
    F: Fn(&BidSample) -> Result<Vec<f64>> + Sync,
{
    if replicates < 2 {
        return Err(Error::InvalidParams(format!(
            "bootstrap needs at least 2 replicates, got {replicates}"
        )));
    }
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = sample.len();
    let times = sample.times();
    let results: Vec<Result<Vec<f64>>> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.derive(i as u64).rng();
            let resampled: Vec<f64> = (0..n).map(|_| times[rng.random_range(0..n)]).collect();
            fitter(&BidSample::new(resampled, sample.horizon())?)
        })
        .collect();
    let ok: Vec<Vec<f64>> = results.into_iter().filter_map(|r| r.ok()).collect();
    let failed = replicates - ok.len();
    if failed as f64 > MAX_FAILURE_FRACTION * replicates as f64 || ok.len() < 2 {
        return Err(Error::BootstrapFailures {
            failed,
            total: replicates,
        });
    }
    let dim = ok[0].len();
    if ok.iter().any(|v| v.len() != dim) {
        return Err(Error::Estimation(
            "fitter returned vectors of different lengths".into(),
        ));
    }
    let m = ok.len() as f64;
    Ok((0..dim)
        .map(|k| {
            let mean = ok.iter().map(|v| v[k]).sum::<f64>() / m;
            let var = ok.iter().map(|v| (v[k] - mean).powi(2)).sum::<f64>() / (m - 1.0);
            var.sqrt()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BidSample {
        BidSample::new((0..50).map(|i| i as f64 * 0.1).collect(), 7.0).unwrap()
    }

    #[test]
    fn constant_fitter_has_zero_se() {
        let se = bootstrap_se(&sample(), |_| Ok(vec![1.0, 2.0]), 20, Seed(1)).unwrap();
        assert_eq!(se, vec![0.0, 0.0]);
    }

    #[test]
    fn two_replicates_allowed() {
        let se = bootstrap_se(&sample(), |s| Ok(vec![s.times()[0]]), 2, Seed(1)).unwrap();
        assert_eq!(se.len(), 1);
        assert!(bootstrap_se(&sample(), |_| Ok(vec![1.0]), 1, Seed(1)).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let mean = |s: &BidSample| Ok(vec![s.times().iter().sum::<f64>() / s.len() as f64]);
        let a = bootstrap_se(&sample(), mean, 100, Seed(3)).unwrap();
        let b = bootstrap_se(&sample(), mean, 100, Seed(3)).unwrap();
        assert_eq!(a, b);
        // standard error of the mean of 0..4.9 step 0.1 is about 1.44/sqrt(50)
        assert!((a[0] - 1.443 / 50f64.sqrt()).abs() < 0.05);
    }

    #[test]
    fn too_many_failures() {
        let flaky = |s: &BidSample| {
            if s.times()[0] > 0.05 {
                Err(Error::Estimation("nope".into()))
            } else {
                Ok(vec![0.0])
            }
        };
        match bootstrap_se(&sample(), flaky, 50, Seed(2)) {
            Err(Error::BootstrapFailures { failed, total }) => {
                assert_eq!(total, 50);
                assert!(failed > 10);
            }
            other => panic!("{other:?}"),
        }
    }
}
