#![allow(dead_code)]

use newsvendor::dist::Distribution;
use proptest::prelude::*;

/// Composite Simpson rule on [a, b] with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Simpson over consecutive breakpoints; `points` must be sorted.
pub fn piecewise_simpson(f: impl Fn(f64) -> f64, points: &[f64], n: usize) -> f64 {
    points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| simpson(&f, w[0], w[1], n))
        .sum()
}

/// Point beyond which `d` has survival below 1e-15.
pub fn far_tail(d: &Distribution) -> f64 {
    let (_, hi) = d.support();
    if hi.is_finite() {
        return hi;
    }
    let mut x = d.mean().max(1.0);
    while d.sf(x) > 1e-15 {
        x *= 1.5;
    }
    x
}

/// E[max(X, Y)] = ∫₀^∞ 1 − F_X(t) F_Y(t) dt for non-negative X, Y.
pub fn expected_max_oracle(a: &Distribution, b: &Distribution) -> f64 {
    let top = far_tail(a).max(far_tail(b));
    let mut pts = vec![0.0, top];
    for d in [a, b] {
        let (lo, hi) = d.support();
        pts.push(lo);
        pts.extend(d.breakpoints());
        if hi.is_finite() {
            pts.push(hi);
        }
        // resolve the bulk of long-tailed laws with extra cut points
        for u in [0.01, 0.1, 0.5, 0.9, 0.99, 0.999999] {
            pts.push(d.quantile(u).unwrap());
        }
    }
    pts.retain(|x| *x >= 0.0 && *x <= top);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    piecewise_simpson(|t| 1.0 - a.cdf(t) * b.cdf(t), &pts, 4000)
}

pub fn uniform() -> impl Strategy<Value = Distribution> {
    (0.0..5.0f64, 0.1..5.0f64).prop_map(|(lo, w)| Distribution::uniform(lo, lo + w).unwrap())
}

pub fn exponential() -> impl Strategy<Value = Distribution> {
    (0.2..5.0f64).prop_map(|r| Distribution::exponential(r).unwrap())
}

pub fn lognormal() -> impl Strategy<Value = Distribution> {
    (-1.0..1.5f64, 0.1..1.0f64).prop_map(|(m, s)| Distribution::lognormal(m, s).unwrap())
}

pub fn truncated_normal() -> impl Strategy<Value = Distribution> {
    (-1.0..5.0f64, 0.2..3.0f64).prop_map(|(m, s)| Distribution::truncated_normal(m, s).unwrap())
}

pub fn continuous() -> impl Strategy<Value = Distribution> {
    prop_oneof![uniform(), exponential(), lognormal(), truncated_normal()]
}

pub fn mixture() -> impl Strategy<Value = Distribution> {
    (continuous(), continuous(), 0.1..0.9f64)
        .prop_map(|(a, b, w)| Distribution::mixture(vec![(w, a), (1.0 - w, b)]).unwrap())
}

pub fn any_continuous() -> impl Strategy<Value = Distribution> {
    prop_oneof![4 => continuous(), 1 => mixture()]
}

pub fn empirical() -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.0..10.0f64, 1..30).prop_map(|v| Distribution::empirical(v).unwrap())
}

pub fn any_distribution() -> impl Strategy<Value = Distribution> {
    prop_oneof![4 => continuous(), 1 => mixture(), 1 => empirical()]
}
