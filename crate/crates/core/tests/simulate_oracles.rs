mod common;

use barista::diagnostics::ks_against;
use barista::simulate::{
    sample_fixed_n, sample_geometric_uniform_with, sample_poisson_count, simulate_bidder_strategy,
    simulate_uniform_rebid, BidderStrategyParams,
};
use barista::{BaristaParams, Seed};
use common::*;

/// Largest gap between the empirical CDF of `xs` and `cdf`, computed here
/// rather than through the crate's KS routine.
fn sup_distance<F: Fn(f64) -> f64>(xs: &mut [f64], cdf: F) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

#[test]
fn homogeneous_draws_are_uniform() {
    let p = BaristaParams::homogeneous(1.0, 3.0).unwrap();
    let s = sample_fixed_n(&p, 100_000, Seed(1));
    let mut xs = s.times().to_vec();
    assert!(sup_distance(&mut xs, |x| x / 3.0) < 0.006);
}

#[test]
fn fixed_n_draws_follow_the_model_cdf() {
    let mut r = rng(2);
    for k in 0..10 {
        let p = random_params(&mut r);
        let s = sample_fixed_n(&p, 20_000, Seed(10 + k));
        let m_t = quad_mean(&p, p.horizon());
        // compare on a 400-point grid so the quadrature runs a bounded
        // number of times
        let t = p.horizon();
        let n = s.len() as f64;
        let d = (1..400)
            .map(|i| {
                let x = t * i as f64 / 400.0;
                (s.count_le(x) as f64 / n - quad_mean(&p, x) / m_t).abs()
            })
            .fold(0.0, f64::max);
        // 1.95 / sqrt(n) is the 0.1% critical value of the full supremum
        assert!(d < 1.95 / n.sqrt(), "{p:?}: {d}");
    }
}

#[test]
fn poisson_counts_have_matching_mean_and_variance() {
    let p = pstar().with_c(30.0).unwrap();
    let m = p.mean_count(7.0).unwrap();
    let counts: Vec<f64> = (0..4000)
        .map(|i| sample_poisson_count(&p, Seed(i)).len() as f64)
        .collect();
    let k = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / k;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (k - 1.0);
    assert!((mean - m).abs() < 4.0 * (m / k).sqrt(), "{mean} vs {m}");
    // sd of the sample variance is about m sqrt(2 / k)
    assert!((var - m).abs() < 4.0 * m * (2.0 / k).sqrt(), "{var} vs {m}");
}

#[test]
fn counts_in_disjoint_intervals_are_uncorrelated() {
    let p = pstar().with_c(20.0).unwrap();
    let (cut, t) = (5.0, 7.0);
    let pairs: Vec<(f64, f64)> = (0..10_000)
        .map(|i| {
            let s = sample_poisson_count(&p, Seed(50_000 + i));
            let a = s.count_lt(cut) as f64;
            (a, s.len() as f64 - a)
        })
        .collect();
    let k = pairs.len() as f64;
    let ma = pairs.iter().map(|p| p.0).sum::<f64>() / k;
    let mb = pairs.iter().map(|p| p.1).sum::<f64>() / k;
    let cov = pairs.iter().map(|p| (p.0 - ma) * (p.1 - mb)).sum::<f64>() / (k - 1.0);
    let va = pairs.iter().map(|p| (p.0 - ma).powi(2)).sum::<f64>() / (k - 1.0);
    let vb = pairs.iter().map(|p| (p.1 - mb).powi(2)).sum::<f64>() / (k - 1.0);
    let corr = cov / (va * vb).sqrt();
    assert!(corr.abs() < 0.05, "{corr}");
    let want_a = p.mean_count(cut).unwrap();
    let want_b = p.mean_count(t).unwrap() - want_a;
    assert!((ma - want_a).abs() < 4.0 * (want_a / k).sqrt());
    assert!((mb - want_b).abs() < 4.0 * (want_b / k).sqrt());
}

#[test]
fn geometric_uniform_survival_is_a_power_law() {
    for (a, b, alpha) in [(0.0, 1.0, 0.3), (0.0, 1.0, 1.0), (1.0, 3.0, 0.7)] {
        let mut rng = Seed(77).rng();
        let mut xs: Vec<f64> = (0..100_000)
            .map(|_| sample_geometric_uniform_with(a, b, alpha, &mut rng).unwrap())
            .collect();
        let d = sup_distance(&mut xs, |x: f64| 1.0 - ((b - x) / (b - a)).powf(alpha));
        assert!(d < 0.01, "({a}, {b}, {alpha}): {d}");
    }
}

#[test]
fn bidder_strategy_bids_follow_the_two_stage_law() {
    let sp = BidderStrategyParams::new(1500.0, 0.4, 1.0, 0.05, 1.0).unwrap();
    let p = sp.bid_process().unwrap();
    let mut counts = Vec::new();
    let mut passed = 0;
    for i in 0..10 {
        let bids = simulate_bidder_strategy(&sp, Seed(900 + i)).unwrap();
        counts.push(bids.len() as f64);
        let ks = ks_against(bids.times(), |x| p.cdf(x).unwrap()).unwrap();
        passed += usize::from(ks.p_value > 0.01);
    }
    assert!(passed >= 8, "{passed}/10");
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let want = sp.expected_bids();
    assert!((mean - want).abs() < 4.0 * (want / 10.0).sqrt(), "{mean} vs {want}");
    // success probability from the strategy's own description
    let stay = 0.4f64;
    let reach_final = 0.05f64.powf(0.4);
    assert!((sp.success_probability() - (1.0 - reach_final * (1.0 - stay))).abs() < 1e-15);
}

#[test]
fn uniform_rebid_mean_count() {
    // each bidder bids once, so the count is Poisson(lambda T)
    let counts: Vec<f64> = (0..400)
        .map(|i| simulate_uniform_rebid(50.0, 2.0, Seed(i)).unwrap().len() as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / 400.0;
    assert!((mean - 100.0).abs() < 4.0 * (100.0f64 / 400.0).sqrt());
}

#[test]
fn uniform_rebid_bid_time_cdf() {
    // P(bid <= x) = x/T + (1 - x/T) ln(1 - x/T) for arrival U(0,T), bid U(s,T)
    let s = simulate_uniform_rebid(100_000.0, 1.0, Seed(3)).unwrap();
    let mut xs = s.times().to_vec();
    let d = sup_distance(&mut xs, |x| x + (1.0 - x) * (1.0 - x).ln());
    assert!(d < 0.008, "{d}");
}
