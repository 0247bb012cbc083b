//! Benchmark newsvendor: the order quantity is a fixed decision and only
//! demand is random. Profit per period is `p·min(Q, D) − w·Q`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{DistError, Distribution};
use crate::quad;

/// Relative tolerance for agreement between equivalent closed forms.
pub const FORM_AGREEMENT_RTOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("market.{field}: {reason}")]
    InvalidMarket { field: &'static str, reason: String },
    #[error("market.{field}: nonzero values are not supported yet")]
    Unsupported { field: &'static str },
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("numerical integrity: {what} disagree ({a} vs {b})")]
    Integrity { what: &'static str, a: f64, b: f64 },
}

/// Prices faced by the retailer. Salvage value `s` and stockout cost `r`
/// must be zero; manufacturing cost `c` is carried but does not enter the
/// retailer's profit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams {
    /// selling price per unit
    pub p: f64,
    /// wholesale price per unit
    pub w: f64,
    #[serde(default)]
    pub s: f64,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub c: f64,
}

impl MarketParams {
    pub fn new(p: f64, w: f64) -> Result<Self, BenchError> {
        let m = Self {
            p,
            w,
            s: 0.0,
            r: 0.0,
            c: 0.0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let invalid = |field, reason: &str| {
            Err(BenchError::InvalidMarket {
                field,
                reason: reason.to_string(),
            })
        };
        for (field, v) in [("p", self.p), ("w", self.w), ("s", self.s), ("r", self.r), ("c", self.c)] {
            if !v.is_finite() {
                return invalid(field, "must be finite");
            }
        }
        if !(self.p > 0.0) {
            return invalid("p", "selling price must be positive");
        }
        if !(self.w > 0.0) {
            return invalid("w", "wholesale price must be positive");
        }
        if self.w >= self.p {
            return invalid("w", "wholesale price must be below the selling price p");
        }
        if self.c < 0.0 {
            return invalid("c", "manufacturing cost must be non-negative");
        }
        if self.s != 0.0 {
            return Err(BenchError::Unsupported { field: "s" });
        }
        if self.r != 0.0 {
            return Err(BenchError::Unsupported { field: "r" });
        }
        Ok(())
    }

    /// 1 − w/p
    pub fn critical_fractile(&self) -> f64 {
        1.0 - self.w / self.p
    }
}

fn check_quantity(q: f64) -> Result<(), BenchError> {
    if q >= 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(DistError::Domain {
            op: "order quantity",
            value: q,
        }
        .into())
    }
}

/// E[π] = (p − w)·q − p·∫₀^q F(t) dt
pub fn expected_profit(m: &MarketParams, demand: &Distribution, q: f64) -> Result<f64, BenchError> {
    check_quantity(q)?;
    Ok((m.p - m.w) * q - m.p * demand.integrated_cdf(q)?)
}

/// Var[π] = p²·[∫₀^q 2(q − t)F(t) dt − (∫₀^q F(t) dt)²]
pub fn profit_variance(m: &MarketParams, demand: &Distribution, q: f64) -> Result<f64, BenchError> {
    check_quantity(q)?;
    let icdf = demand.integrated_cdf(q)?;
    let wicdf = demand.weighted_integrated_cdf(q)?;
    let v = m.p * m.p * (2.0 * (q * icdf - wicdf) - icdf * icdf);
    Ok(v.max(0.0))
}

/// Q* = F⁻¹(1 − w/p)
pub fn optimal_quantity(m: &MarketParams, demand: &Distribution) -> Result<f64, BenchError> {
    Ok(demand.quantile(m.critical_fractile())?)
}

/// The three equivalent expressions for the optimal expected profit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalProfitForms {
    pub quantity: f64,
    /// Q*(p − w) − p ∫₀^{Q*} F(t) dt
    pub by_integrated_cdf: f64,
    /// p ∫₀^{Q*} t f(t) dt
    pub by_partial_expectation: f64,
    /// p ∫₀^{Q*} P(D > t) dt − Q* w, with the survival integral by quadrature
    pub by_survival: f64,
    /// Whether F(Q*) = 1 − w/p, which the partial-expectation form needs.
    pub first_order_condition: bool,
}

fn agree(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= FORM_AGREEMENT_RTOL * a.abs().max(b.abs()) + 1e-13 * scale
}

/// True when demand puts positive probability exactly on `q`.
fn has_atom(demand: &Distribution, q: f64) -> bool {
    demand.cdf(q) - demand.cdf_left(q) > 0.0
}

pub fn optimal_profit_forms(m: &MarketParams, demand: &Distribution) -> Result<OptimalProfitForms, BenchError> {
    let q = optimal_quantity(m, demand)?;
    let survival = quad::integral(|t| demand.sf(t), 0.0, q, &demand.breakpoints());
    Ok(OptimalProfitForms {
        quantity: q,
        by_integrated_cdf: q * (m.p - m.w) - m.p * demand.integrated_cdf(q)?,
        by_partial_expectation: m.p * demand.partial_expectation(q)?,
        by_survival: m.p * survival - q * m.w,
        first_order_condition: !has_atom(demand, q),
    })
}

/// Optimal expected profit. All three forms are evaluated and must agree to
/// [`FORM_AGREEMENT_RTOL`]; the partial-expectation form is returned.
///
/// When demand has an atom at Q* (empirical data), F(Q*) overshoots the
/// critical fractile and the partial-expectation form no longer equals the
/// expected profit. The integrated-cdf form is returned instead and checked
/// against the survival form only.
pub fn optimal_profit(m: &MarketParams, demand: &Distribution) -> Result<f64, BenchError> {
    let f = optimal_profit_forms(m, demand)?;
    let scale = m.p * (1.0 + f.quantity);
    if !agree(f.by_integrated_cdf, f.by_survival, scale) {
        return Err(BenchError::Integrity {
            what: "optimal profit (integrated-cdf and survival forms)",
            a: f.by_integrated_cdf,
            b: f.by_survival,
        });
    }
    if !f.first_order_condition {
        return Ok(f.by_integrated_cdf);
    }
    if !agree(f.by_partial_expectation, f.by_integrated_cdf, scale) {
        return Err(BenchError::Integrity {
            what: "optimal profit (partial-expectation and integrated-cdf forms)",
            a: f.by_partial_expectation,
            b: f.by_integrated_cdf,
        });
    }
    Ok(f.by_partial_expectation)
}

/// Variance at Q* written with the first-order condition substituted:
/// p²[Q*²(1 − (w/p)²) − PE² − 2Q*(w/p)PE − 2∫₀^{Q*} t F(t) dt].
pub fn optimal_profit_variance_closed(m: &MarketParams, demand: &Distribution) -> Result<f64, BenchError> {
    let q = optimal_quantity(m, demand)?;
    let ratio = m.w / m.p;
    let pe = demand.partial_expectation(q)?;
    let wicdf = demand.weighted_integrated_cdf(q)?;
    let v = m.p * m.p * (q * q * (1.0 - ratio * ratio) - pe * pe - 2.0 * q * ratio * pe - 2.0 * wicdf);
    Ok(v.max(0.0))
}

/// Variance of profit at Q*, checked against [`profit_variance`] at Q*.
/// Demand with an atom at Q* skips the check and uses the general formula.
pub fn optimal_profit_variance(m: &MarketParams, demand: &Distribution) -> Result<f64, BenchError> {
    let q = optimal_quantity(m, demand)?;
    let general = profit_variance(m, demand, q)?;
    if has_atom(demand, q) {
        return Ok(general);
    }
    let closed = optimal_profit_variance_closed(m, demand)?;
    let scale = m.p * m.p * (1.0 + q * q);
    if !agree(closed, general, scale) {
        return Err(BenchError::Integrity {
            what: "profit variance at the optimum (general and optimum-specific forms)",
            a: closed,
            b: general,
        });
    }
    Ok(closed)
}
