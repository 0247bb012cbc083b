mod common;

use common::*;
use newsvendor::bench::{self, MarketParams};
use newsvendor::dist::Distribution;
use proptest::prelude::*;

fn market() -> impl Strategy<Value = MarketParams> {
    (0.5..20.0f64, 0.02..0.98f64).prop_map(|(p, frac)| MarketParams::new(p, p * frac).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// E[min(q, D)] and E[min(q, D)²] by Simpson on the survival function.
fn sales_moments(d: &Distribution, q: f64) -> (f64, f64) {
    let mut pts: Vec<f64> = d.breakpoints().into_iter().filter(|x| *x > 0.0 && *x < q).collect();
    for u in [0.01, 0.1, 0.5, 0.9, 0.99] {
        let x = d.quantile(u).unwrap();
        if x > 0.0 && x < q {
            pts.push(x);
        }
    }
    pts.push(0.0);
    pts.push(q);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let m1 = piecewise_simpson(|t| d.sf(t), &pts, 2000);
    let m2 = piecewise_simpson(|t| 2.0 * t * d.sf(t), &pts, 2000);
    (m1, m2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn critical_fractile_holds(m in market(), d in any_continuous()) {
        let q = bench::optimal_quantity(&m, &d).unwrap();
        prop_assert!((d.cdf(q) - m.critical_fractile()).abs() < 1e-9);
    }

    #[test]
    fn optimum_beats_perturbed_orders(m in market(), d in any_distribution()) {
        let q = bench::optimal_quantity(&m, &d).unwrap();
        let best = bench::expected_profit(&m, &d, q).unwrap();
        for i in 0..41 {
            let delta = -0.2 + 0.01 * i as f64;
            let other = bench::expected_profit(&m, &d, q * (1.0 + delta)).unwrap();
            prop_assert!(other <= best + 1e-12 * best.abs().max(1.0), "δ={delta}: {other} > {best}");
        }
    }

    #[test]
    fn three_forms_and_two_variances_agree(m in market(), d in any_continuous()) {
        let f = bench::optimal_profit_forms(&m, &d).unwrap();
        prop_assert!(f.first_order_condition);
        prop_assert!(rel(f.by_integrated_cdf, f.by_partial_expectation) < 1e-7);
        prop_assert!(rel(f.by_integrated_cdf, f.by_survival) < 1e-7);
        let general = bench::profit_variance(&m, &d, f.quantity).unwrap();
        let closed = bench::optimal_profit_variance_closed(&m, &d).unwrap();
        prop_assert!(rel(general, closed) < 1e-7, "{general} vs {closed}");
    }

    #[test]
    fn profit_moments_match_oracle(m in market(), d in any_continuous(), frac in 0.05..0.95f64) {
        let q = d.quantile(frac).unwrap();
        let (m1, m2) = sales_moments(&d, q);
        let mean = m.p * m1 - m.w * q;
        let var = m.p * m.p * (m2 - m1 * m1);
        let scale = m.p * m.p * (1.0 + q * q);
        prop_assert!((bench::expected_profit(&m, &d, q).unwrap() - mean).abs() < 1e-9 * m.p * (1.0 + q));
        prop_assert!((bench::profit_variance(&m, &d, q).unwrap() - var).abs() < 1e-8 * scale);
    }
}

#[test]
fn benchmark_uniform_values() {
    let m = MarketParams::new(2.0, 1.0).unwrap();
    let d = Distribution::uniform(0.0, 1.0).unwrap();
    assert!((bench::optimal_quantity(&m, &d).unwrap() - 0.5).abs() < 1e-12);
    assert!((bench::optimal_profit(&m, &d).unwrap() - 0.25).abs() < 1e-12);
    // min(0.5, D) has mean 3/8 and second moment 1/6, so Var = 4 (1/6 − 9/64)
    let want = 4.0 * (1.0 / 6.0 - 9.0 / 64.0);
    assert!((bench::optimal_profit_variance(&m, &d).unwrap() - want).abs() < 1e-12);
}

#[test]
fn empirical_demand_with_atom_at_optimum() {
    let m = MarketParams::new(2.0, 1.0).unwrap();
    let d = Distribution::empirical(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!(bench::optimal_quantity(&m, &d).unwrap(), 2.0);
    // demand 1 with prob 1/4, otherwise all 2 units sell: 2 (1.75) − 2 = 1.5
    assert!((bench::optimal_profit(&m, &d).unwrap() - 1.5).abs() < 1e-12);
    let v = bench::optimal_profit_variance(&m, &d).unwrap();
    // profit is 0 w.p. 1/4 and 2 w.p. 3/4
    assert!((v - 0.75).abs() < 1e-12);
}
