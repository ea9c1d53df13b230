//! Independent oracles shared by the integration tests. Nothing here calls
//! into the closed forms under test except where noted.

#![allow(dead_code)]

use barista::{BaristaParams, Seed};
use rand::Rng;

pub fn pstar() -> BaristaParams {
    BaristaParams::new(3.0, 0.4, 1.0, 2.5, 5.0 / 1440.0, 1.0, 7.0).unwrap()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its embedded 7-point Gauss estimate.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(mid - dx) + f(mid + dx);
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    (k * half, g * half)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let (k, g) = gk15(f, a, b);
    // stop at the local share of the tolerance or once the difference is
    // rounding noise
    let local = tol * (b - a) / whole;
    if (k - g).abs() <= local.max(4.0 * f64::EPSILON * k.abs()) || depth == 0 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, whole, tol, depth - 1) + adapt(f, m, b, whole, tol, depth - 1)
}

/// Adaptive Gauss-Kronrod quadrature with absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    adapt(&f, a, b, b - a, tol, 30)
}

/// The intensity written out branch by branch from its definition.
pub fn literal_intensity(p: &BaristaParams, s: f64) -> f64 {
    let t = p.horizon();
    let (a1, a2, a3) = (p.alpha1(), p.alpha2(), p.alpha3());
    if s < p.d1() {
        p.c() * (1.0 - p.d1() / t).powf(a2 - a1) * (1.0 - s / t).powf(a1 - 1.0)
    } else if s < t - p.d2() {
        p.c() * (1.0 - s / t).powf(a2 - 1.0)
    } else {
        p.c() * (p.d2() / t).powf(a2 - a3) * (1.0 - s / t).powf(a3 - 1.0)
    }
}

/// `int_0^s lambda`, splitting at the changepoints and using the
/// substitution `s = T - (T - a) y^q` on any piece that ends at `T`, which
/// removes the `(1 - s/T)^(alpha - 1)` endpoint singularity.
pub fn quad_mean(p: &BaristaParams, s: f64) -> f64 {
    let t = p.horizon();
    let tol = 1e-13 * p.c() * t;
    let mut cuts = vec![0.0];
    for b in [p.d1(), t - p.d2()] {
        if b > 0.0 && b < s && b > *cuts.last().unwrap() {
            cuts.push(b);
        }
    }
    cuts.push(s);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b < t {
            total += integrate(|x| literal_intensity(p, x), a, b, tol);
        } else {
            // on the last piece the intensity is `k (1 - x/T)^(alpha - 1)`;
            // evaluate it in reverse time so no precision is lost near T
            let x0 = a.max(0.0);
            let alpha = if p.d2() > 0.0 && x0 >= t - p.d2() {
                p.alpha3()
            } else {
                p.alpha2()
            };
            let k = literal_intensity(p, x0) / (1.0 - x0 / t).powf(alpha - 1.0);
            let q = (4.0 / alpha).max(1.0);
            let span = t - a;
            total += integrate(
                |y: f64| {
                    let r = span * y.powf(q) / t;
                    k * r.powf(alpha - 1.0) * span * q * y.powf(q - 1.0)
                },
                0.0,
                1.0,
                tol,
            );
        }
    }
    total
}

/// `|F(F^-1(u)) - u|`, or zero when the returned time is as good as f64
/// allows: near `T` a quantile can fall between adjacent representable
/// times, and then no answer gets closer than the CDF's jump to a
/// neighbour.
pub fn quantile_excess(p: &BaristaParams, u: f64) -> f64 {
    let s = p.inverse_cdf(u).unwrap();
    let f = |x: f64| p.cdf(x.clamp(0.0, p.horizon())).unwrap();
    let err = (f(s) - u).abs();
    let slack = (f(s.next_up()) - f(s)).abs().max((f(s) - f(s.next_down())).abs());
    if err <= slack {
        0.0
    } else {
        err
    }
}

/// Central difference of `f` at `x` with step `h`.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Golden-section search for the maximiser of a unimodal function.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Bisection for an increasing function crossing `target` on `[a, b]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, target: f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) < target {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// A random valid parameter vector covering all stage configurations.
pub fn random_params<R: Rng>(rng: &mut R) -> BaristaParams {
    let t = rng.random_range(1.0..10.0);
    let d1 = if rng.random_bool(0.15) {
        0.0
    } else {
        rng.random_range(0.0..0.6) * t
    };
    let d2 = if rng.random_bool(0.15) {
        0.0
    } else {
        rng.random_range(0.001..0.3) * (t - d1)
    };
    BaristaParams::new(
        rng.random_range(0.3..6.0),
        rng.random_range(0.1..1.5),
        rng.random_range(0.3..6.0),
        d1,
        d2,
        rng.random_range(0.5..5.0),
        t,
    )
    .unwrap()
}

pub fn rng(seed: u64) -> barista::rng::BaristaRng {
    Seed(seed).rng()
}

/// The normalising constant and its derivatives in expanded closed form,
/// independent of the crate's `h`-based derivatives. Two variants of
/// dC/dalpha2 with known sign and bracket slips are kept so the tests can
/// show they are wrong.
pub mod closed_forms {
    use barista::BaristaParams;

    fn parts(p: &BaristaParams) -> (f64, f64, f64, f64, f64, f64, f64) {
        let t = p.horizon();
        (
            p.alpha1(),
            p.alpha2(),
            p.alpha3(),
            1.0 - p.d1() / t,
            p.d2() / t,
            t,
            p.normalization_constant(),
        )
    }

    /// Ratio formula for C.
    pub fn c(p: &BaristaParams) -> f64 {
        let (a1, a2, a3, u, v, t, _) = parts(p);
        (a1 * a2 * a3 / t)
            / (u.powf(a2) * a3 * (a1 - a2) + a3 * a2 * u.powf(a2 - a1) + v.powf(a2) * a1 * (a2 - a3))
    }

    /// dC/dalpha1.
    pub fn dc_da1(p: &BaristaParams) -> f64 {
        let (a1, a2, _, u, _, t, c) = parts(p);
        c * c * t / (a1 * a1) * u.powf(a2) * (u.powf(-a1) * (1.0 + a1 * u.ln()) - 1.0)
    }

    /// Expanded dC/dalpha2 with the overall sign flipped and `(alpha2 -
    /// alpha1)` in the bracket: a plausible but wrong variant.
    pub fn dc_da2_expanded_wrong_sign(p: &BaristaParams) -> f64 {
        let (a1, a2, a3, u, v, t, c) = parts(p);
        c * c * t / (a1 * a3 * a2 * a2)
            * (a3 * u.powf(a2) * (a2 * u.ln() * (a2 - a1 + a2 * u.powf(-a1)) - a1)
                + a1 * v.powf(a2) * (a3 + a2 * v.ln() * (a2 - a3)))
    }

    /// dC/dalpha2 in expanded form.
    pub fn dc_da2_expanded(p: &BaristaParams) -> f64 {
        let (a1, a2, a3, u, v, t, c) = parts(p);
        -c * c * t / (a1 * a3 * a2 * a2)
            * (a3 * u.powf(a2) * (a2 * u.ln() * (a1 - a2 + a2 * u.powf(-a1)) - a1)
                + a1 * v.powf(a2) * (a3 + a2 * v.ln() * (a2 - a3)))
    }

    /// Compact form of -dC/dalpha2.
    pub fn dc_da2_compact_negated(p: &BaristaParams) -> f64 {
        let (a1, a2, a3, u, v, t, c) = parts(p);
        let (lu, lv) = (u.ln(), v.ln());
        c * c * t / (a2 * a2)
            * (v.powf(a2) - u.powf(a2)
                - a2 * a2 / a1 * u.powf(a2) * lu * (1.0 - u.powf(-a1))
                - a2 * v.powf(a2) * lv
                + a2 * u.powf(a2) * lu
                + a2 * a2 / a3 * v.powf(a2) * lv)
    }

    pub fn dc_da3(p: &BaristaParams) -> f64 {
        let (_, a2, a3, _, v, t, c) = parts(p);
        c * c * t / (a3 * a3) * v.powf(a2)
    }

    /// Left-hand minus right-hand side of the stationarity equations, i.e.
    /// the gradient of the log-likelihood, given dC/dalpha.
    pub fn gradient_from_closed_forms(
        p: &BaristaParams,
        times: &[f64],
        dc: [f64; 3],
    ) -> [f64; 3] {
        let t = p.horizon();
        let (u, v) = (1.0 - p.d1() / t, p.d2() / t);
        let c = p.normalization_constant();
        let n = times.len() as f64;
        let (mut n1, mut n3) = (0.0, 0.0);
        let mut s = [0.0; 3];
        for &x in times {
            let l = (1.0 - x / t).ln();
            if x < p.d1() {
                n1 += 1.0;
                s[0] += l;
            } else if x < t - p.d2() {
                s[1] += l;
            } else {
                n3 += 1.0;
                s[2] += l;
            }
        }
        let (lu, lv) = (u.ln(), if v > 0.0 { v.ln() } else { 0.0 });
        [
            s[0] - n1 * lu + n / c * dc[0],
            s[1] + n1 * lu + n3 * lv + n / c * dc[1],
            s[2] - n3 * lv + n / c * dc[2],
        ]
    }
}
