use serde::{Deserialize, Serialize};

use super::closed_form::estimate_c;
use super::likelihood::Likelihood;
use super::{FitMethod, FitResult};
use crate::error::{Error, Result};
use crate::params::FamilyKind;
use crate::sample::BidSample;

/// Values scanned for one shape parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub values: Vec<f64>,
}

impl GridAxis {
    /// `steps` evenly spaced values from `lo` to `hi` inclusive; one step
    /// gives just `lo`.
    pub fn linspace(lo: f64, hi: f64, steps: usize) -> Self {
        let values = match steps {
            0 => vec![],
            1 => vec![lo],
            _ => (0..steps)
                .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
                .collect(),
        };
        Self { values }
    }

    pub fn point(v: f64) -> Self {
        Self { values: vec![v] }
    }
}

/// Exhaustive scan of the grid (first axis outermost). Ties keep the first
/// point in scan order; infeasible points are skipped.
pub fn grid_search(sample: &BidSample, kind: FamilyKind, grid: &[GridAxis]) -> Result<FitResult> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if grid.len() != kind.shape_dim() {
        return Err(Error::InvalidParams(format!(
            "{kind} grid needs {} axes, got {}",
            kind.shape_dim(),
            grid.len()
        )));
    }
    if grid.iter().any(|a| a.values.is_empty()) {
        return Err(Error::InfeasibleGrid);
    }
    let t = sample.horizon();
    let lk = Likelihood::new(sample);
    let mut idx = vec![0usize; grid.len()];
    let mut point = vec![0.0; grid.len()];
    let mut best: Option<(Vec<f64>, f64)> = None;
    loop {
        for (k, axis) in grid.iter().enumerate() {
            point[k] = axis.values[idx[k]];
        }
        if let Ok(p) = kind
            .from_shape(&point, 1.0, t)
            .and_then(|f| f.as_barista())
        {
            let ll = lk.loglik_unchecked(&p);
            if ll.is_finite() && best.as_ref().is_none_or(|(_, b)| ll > *b) {
                best = Some((point.clone(), ll));
            }
        }
        // odometer increment, last axis fastest
        let mut k = grid.len();
        loop {
            if k == 0 {
                let (shape, ll) = best.ok_or(Error::InfeasibleGrid)?;
                let unit = kind.from_shape(&shape, 1.0, t)?.as_barista()?;
                let c_hat = estimate_c(&unit, sample.len());
                let family = kind.from_shape(&shape, c_hat, t)?;
                return Ok(FitResult {
                    family,
                    params: family.as_barista()?,
                    loglik: ll,
                    method: FitMethod::Grid,
                    stderrs: None,
                    c_hat,
                });
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < grid[k].values.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::BaristaParams;
    use crate::rng::Seed;
    use crate::simulate::sample_fixed_n;
    use crate::estimate::loglik;

    #[test]
    fn single_point() {
        let s = BidSample::new(vec![1.0, 2.0, 6.5], 7.0).unwrap();
        let grid = vec![GridAxis::point(0.7)];
        let fit = grid_search(&s, FamilyKind::OneStage, &grid).unwrap();
        assert_eq!(fit.family.shape(), vec![0.7]);
    }

    #[test]
    fn infeasible_grid() {
        let s = BidSample::new(vec![1.0, 2.0, 6.5], 7.0).unwrap();
        // d1 = 6 with d2 = 2 violates d1 < T - d2 everywhere
        let grid = vec![
            GridAxis::point(2.0),
            GridAxis::point(0.5),
            GridAxis::point(1.0),
            GridAxis::point(6.0),
            GridAxis::point(2.0),
        ];
        assert_eq!(
            grid_search(&s, FamilyKind::ThreeStage, &grid).unwrap_err(),
            Error::InfeasibleGrid
        );
        assert!(grid_search(&s, FamilyKind::OneStage, &[GridAxis { values: vec![] }]).is_err());
    }

    #[test]
    fn ties_keep_first() {
        // the uniform unit sample has loglik 0 for alpha = 1 regardless of d2
        // when alpha2 = alpha3
        let s = BidSample::new(vec![0.1, 0.5, 0.9], 1.0).unwrap();
        let grid = vec![
            GridAxis::point(1.0),
            GridAxis::point(1.0),
            GridAxis::linspace(0.0, 0.5, 6),
        ];
        let fit = grid_search(&s, FamilyKind::TwoStage, &grid).unwrap();
        assert_eq!(fit.family.shape()[2], 0.0);
    }

    #[test]
    fn grid_containing_truth_is_at_least_as_likely() {
        let p = BaristaParams::new(3.0, 0.4, 1.0, 2.5, 5.0 / 1440.0, 1.0, 7.0).unwrap();
        let s = sample_fixed_n(&p, 3000, Seed(4));
        let grid = vec![
            GridAxis::linspace(2.0, 4.0, 5),
            GridAxis::linspace(0.3, 0.5, 5),
            GridAxis::linspace(0.5, 1.5, 5),
            GridAxis::linspace(2.0, 3.0, 5),
            GridAxis::linspace(0.0, 10.0 / 1440.0, 5),
        ];
        let fit = grid_search(&s, FamilyKind::ThreeStage, &grid).unwrap();
        assert!(fit.loglik >= loglik(&s, &p).unwrap());
    }
}
