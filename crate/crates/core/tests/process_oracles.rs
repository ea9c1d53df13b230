mod common;

use barista::estimate::estimate_c;
use barista::{BaristaParams, ModelFamily};
use common::*;
use rand::Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn normalization_constant_matches_quadrature_for_pstar() {
    let p = pstar();
    let m_t = quad_mean(&p, 7.0);
    assert!(rel(p.normalization_constant(), p.c() / m_t) < 1e-8);
    assert!(rel(p.normalization_constant(), closed_forms::c(&p)) < 1e-12);
    let p10 = p.with_c(10.0).unwrap();
    assert_eq!(p.normalization_constant(), p10.normalization_constant());
    assert!(rel(estimate_c(&p, 5000), 5000.0 / m_t) < 1e-8);
}

#[test]
fn homogeneous_normalization() {
    for (d1, d2) in [(0.0, 0.0), (2.0, 0.5), (1.0, 0.0)] {
        let p = BaristaParams::new(1.0, 1.0, 1.0, d1, d2, 1.0, 7.0).unwrap();
        assert!(rel(p.normalization_constant(), 1.0 / 7.0) < 1e-14);
        assert!(rel(p.mean_count(7.0).unwrap(), 7.0) < 1e-14);
    }
}

#[test]
fn pstar_values_against_quadrature() {
    let p = pstar();
    let m_t = quad_mean(&p, 7.0);
    assert!(rel(p.mean_count(3.5).unwrap(), quad_mean(&p, 3.5)) < 1e-8);
    assert!(rel(p.cdf(2.5).unwrap(), quad_mean(&p, 2.5) / m_t) < 1e-8);
    assert!(rel(p.intensity(0.0).unwrap(), (4.5f64 / 7.0).powf(-2.6)) < 1e-14);
    assert!((p.intensity(0.0).unwrap() - 3.154).abs() < 1e-3);
    for s in [1.0, 4.0, 6.999] {
        assert!(rel(p.pdf(s).unwrap(), p.intensity(s).unwrap() / m_t) < 1e-8);
    }
}

#[test]
fn intensity_matches_literal_branches_and_derivative_of_mean() {
    let mut r = rng(11);
    for _ in 0..100 {
        let p = random_params(&mut r);
        let t = p.horizon();
        for _ in 0..10 {
            let s = r.random_range(0.0..t);
            let lam = p.intensity(s).unwrap();
            assert!(rel(lam, literal_intensity(&p, s)) < 1e-12);
            let h = 1e-6 * t;
            if s > h && s + h < t && (s - p.d1()).abs() > 2.0 * h && (s - t + p.d2()).abs() > 2.0 * h
            {
                let dm = central_diff(|x| p.mean_count(x).unwrap(), s, h);
                // differencing m loses about eps m(T) / h absolutely
                let floor = 1e-8 * p.mean_count(t).unwrap() / t;
                assert!((dm - lam).abs() < 1e-5 * lam + floor, "{p:?} s={s}");
            }
        }
    }
}

#[test]
fn random_vectors_consistency() {
    let mut r = rng(12);
    for _ in 0..100 {
        let p = random_params(&mut r);
        let t = p.horizon();
        let m_t = p.mean_count(t).unwrap();
        assert!(rel(m_t, quad_mean(&p, t)) < 1e-8, "{p:?}");
        assert!(rel(p.normalization_constant(), p.c() / m_t) < 1e-10);
        for _ in 0..10 {
            let s = r.random_range(0.0..t);
            let m = p.mean_count(s).unwrap();
            assert!((m - quad_mean(&p, s)).abs() <= 1e-8 * m_t, "{p:?} s={s}");
            assert!((p.cdf(s).unwrap() - m / m_t).abs() <= 1e-12);
            assert!((p.survival(s).unwrap() - (1.0 - m / m_t)).abs() <= 1e-12);
        }
    }
}

#[test]
fn density_integrates_to_one() {
    let mut r = rng(13);
    for _ in 0..50 {
        let p = random_params(&mut r);
        // the density is the intensity over m(T), so its integral is the
        // quadrature of the intensity divided by the closed-form m(T)
        let total = quad_mean(&p, p.horizon()) * p.normalization_constant() / p.c();
        assert!((total - 1.0).abs() < 1e-8, "{p:?}");
    }
}

#[test]
fn continuity_at_changepoints() {
    let mut r = rng(14);
    for _ in 0..100 {
        let p = random_params(&mut r);
        let t = p.horizon();
        let c = p.c();
        let (a1, a2, a3) = (p.alpha1(), p.alpha2(), p.alpha3());
        let u = 1.0 - p.d1() / t;
        let v = p.d2() / t;
        if p.d1() > 0.0 {
            // limits of the neighbouring branches at d1
            let left = c * u.powf(a2 - a1) * u.powf(a1 - 1.0);
            let right = c * u.powf(a2 - 1.0);
            assert!((left - right).abs() < 1e-10 * p.intensity(p.d1()).unwrap());
            assert!(rel(p.intensity(p.d1()).unwrap(), right) < 1e-10);
        }
        if p.d2() > 0.0 {
            let left = c * v.powf(a2 - 1.0);
            let right = c * v.powf(a2 - a3) * v.powf(a3 - 1.0);
            assert!((left - right).abs() < 1e-10 * left);
            assert!(rel(p.intensity(t - p.d2()).unwrap(), left) < 1e-10);
        }
    }
}

#[test]
fn quantiles_roundtrip_and_bisection() {
    let p = pstar();
    let q = p.inverse_cdf(0.5).unwrap();
    assert!((p.cdf(q).unwrap() - 0.5).abs() < 1e-9);
    let b = bisect(|s| p.cdf(s).unwrap(), 0.5, 0.0, 7.0);
    assert!((q - b).abs() < 1e-9);

    let mut r = rng(15);
    for _ in 0..100 {
        let p = random_params(&mut r);
        for i in 0..1000 {
            let u = (i as f64 + 0.5) / 1000.0;
            assert!(quantile_excess(&p, u) < 1e-9, "{p:?} u={u}");
        }
    }
}

#[test]
fn one_stage_closed_form() {
    let p = ModelFamily::OneStage {
        alpha: 2.0,
        c: 1.0,
        horizon: 1.0,
    }
    .as_barista()
    .unwrap();
    for s in [0.0, 0.2, 0.5, 0.9] {
        assert!((p.intensity(s).unwrap() - (1.0 - s)).abs() < 1e-15);
        assert!((p.cdf(s).unwrap() - (1.0 - (1.0 - s).powi(2))).abs() < 1e-15);
    }
}

#[test]
fn restricted_process_matches_original_intensity() {
    let mut r = rng(16);
    for _ in 0..100 {
        let p = random_params(&mut r);
        let t = p.horizon();
        let beta = r.random_range(0.0..0.999);
        let q = p.restrict(beta).unwrap();
        assert!(rel(q.horizon(), (1.0 - beta) * t) < 1e-14);
        for _ in 0..10 {
            let s = r.random_range(0.0..q.horizon());
            let want = literal_intensity(&p, beta * t + s);
            assert!(rel(q.intensity(s).unwrap(), want) < 1e-9, "{p:?} beta={beta} s={s}");
        }
    }
}

#[test]
fn restrict_examples() {
    let q = pstar().restrict(0.5).unwrap();
    assert!(rel(q.c(), 0.5f64.powf(-0.6)) < 1e-14);
    assert!((q.c() - 1.5157).abs() < 1e-4);
    assert_eq!(q.d1(), 0.0);
    let q = pstar().restrict(0.2).unwrap();
    assert_eq!(q.d1(), 2.5 - 0.2 * 7.0);
    assert_eq!(pstar().restrict(0.0).unwrap(), pstar());
}
