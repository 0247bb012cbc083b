//! Randomized order quantities.
//!
//! The retailer orders Q̂* = F̃⁻¹(1 − w/p) from the estimated demand F̃, but
//! profits accrue under the compound demand F̂. Drawing the order quantity
//! from a distribution G (independent of demand) can beat that naive order.
//! With independent Q and D,
//!
//! ```text
//! E[π_RS] = p·E[Q] + p·E[D] − p·E[max(Q, D)] − w·E[Q]
//! ```
//!
//! and the randomized policy improves on the naive order exactly when
//!
//! ```text
//! E[Q](1 − w/p) + E[D] − E[max(Q, D)] ≥ baseline / p
//! ```
//!
//! The baseline has two readings, selected by [`RhsMode`]. When E[Q] is
//! pinned to Q̂* the condition reduces to E[max(Q, D)] ≤ E[max(Q̂*, D)],
//! checked by [`check_prop2`].

mod search;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::{self, BenchError, MarketParams};
use crate::compound::ScenarioTriple;
use crate::dist::{self, DistError, Distribution, DistributionRecord};

pub use search::{
    search_policy, write_trace_csv, FamilyTemplate, OrderFamily, SearchConfig, SearchMethod,
    SearchResult, TraceRow,
};

/// Absolute slack on feasibility margins.
pub const FEASIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RandoptError {
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("order distribution mean is {actual} but the moment condition requires E[Q] = {required}")]
    MeanMismatch { required: f64, actual: f64 },
    #[error("search config: {0}")]
    Config(String),
}

/// How the naive baseline profit is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum RhsMode {
    /// p·∫₀^{Q̂*} t f̂(t) dt, the optimum formula applied at Q̂*.
    #[serde(rename = "theorem")]
    TheoremAsWritten,
    /// (p − w)·Q̂* − p·∫₀^{Q̂*} F̂(t) dt, the expected profit of ordering Q̂*
    /// when demand follows F̂.
    #[default]
    #[serde(rename = "exact")]
    ExactMismatch,
}

impl std::str::FromStr for RhsMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theorem" => Ok(RhsMode::TheoremAsWritten),
            "exact" => Ok(RhsMode::ExactMismatch),
            other => Err(format!("unknown rhs mode `{other}` (expected `theorem` or `exact`)")),
        }
    }
}

/// A deterministic order quantity or a distribution to draw it from.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderPolicy {
    Deterministic(f64),
    Stochastic(Distribution),
}

impl OrderPolicy {
    /// The order quantity as a distribution; deterministic orders become a
    /// point mass so both kinds go through the same formulas.
    pub fn to_distribution(&self) -> Result<Distribution, DistError> {
        match self {
            OrderPolicy::Deterministic(q) => Distribution::point_mass(*q),
            OrderPolicy::Stochastic(g) => Ok(g.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderPolicyRecord {
    Deterministic { q: f64 },
    Stochastic { order_dist: DistributionRecord },
}

impl From<&OrderPolicy> for OrderPolicyRecord {
    fn from(p: &OrderPolicy) -> Self {
        match p {
            OrderPolicy::Deterministic(q) => OrderPolicyRecord::Deterministic { q: *q },
            OrderPolicy::Stochastic(g) => OrderPolicyRecord::Stochastic {
                order_dist: g.into(),
            },
        }
    }
}

/// Signed slack of a feasibility condition. A positive margin always means
/// the randomized policy is at least as good as the naive order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub feasible: bool,
    pub q_hat_star: f64,
    pub rhs_mode: RhsMode,
    /// p·margin: expected-profit gain over the baseline.
    pub profit_gap: f64,
}

impl FeasibilityReport {
    fn new(m: &MarketParams, lhs: f64, rhs: f64, margin: f64, q_hat_star: f64, rhs_mode: RhsMode) -> Self {
        Self {
            lhs,
            rhs,
            margin,
            feasible: margin >= -FEASIBILITY_TOL,
            q_hat_star,
            rhs_mode,
            profit_gap: m.p * margin,
        }
    }
}

/// Q̂* = F̃⁻¹(1 − w/p)
pub fn naive_order_quantity(m: &MarketParams, estimated: &Distribution) -> Result<f64, RandoptError> {
    Ok(bench::optimal_quantity(m, estimated)?)
}

/// p·E[Q] + p·E[D] − p·E[max(Q, D)] − w·E[Q] for independent Q and D.
pub fn expected_profit_stochastic(
    m: &MarketParams,
    demand: &Distribution,
    policy: &OrderPolicy,
) -> Result<f64, RandoptError> {
    let g = policy.to_distribution()?;
    let eq = g.mean();
    Ok(m.p * eq + m.p * demand.mean() - m.p * dist::expected_max(&g, demand) - m.w * eq)
}

/// π̂*_R: profit credited to the naive order Q̂* under compound demand.
pub fn baseline_profit(m: &MarketParams, scenario: &ScenarioTriple, mode: RhsMode) -> Result<f64, RandoptError> {
    let q_hat = naive_order_quantity(m, &scenario.estimated)?;
    baseline_at(m, &scenario.compound, q_hat, mode)
}

fn baseline_at(m: &MarketParams, compound: &Distribution, q_hat: f64, mode: RhsMode) -> Result<f64, RandoptError> {
    Ok(match mode {
        RhsMode::TheoremAsWritten => m.p * compound.partial_expectation(q_hat)?,
        RhsMode::ExactMismatch => bench::expected_profit(m, compound, q_hat)?,
    })
}

/// E[G](1 − w/p) + E[F̂] − E[max(G, F̂)] ≥ baseline/p
pub fn check_theorem1(
    m: &MarketParams,
    scenario: &ScenarioTriple,
    order_dist: &Distribution,
    mode: RhsMode,
) -> Result<FeasibilityReport, RandoptError> {
    let q_hat = naive_order_quantity(m, &scenario.estimated)?;
    let compound = &scenario.compound;
    let lhs = order_dist.mean() * m.critical_fractile() + compound.mean()
        - dist::expected_max(order_dist, compound);
    let rhs = baseline_at(m, compound, q_hat, mode)? / m.p;
    Ok(FeasibilityReport::new(m, lhs, rhs, lhs - rhs, q_hat, mode))
}

/// With E[G] = Q̂*: ∫ x g(x) F̂(x) dx + ∫ y f̂(y) G(y) dy ≤ Q̂* F̂(Q̂*) + ∫_{Q̂*}^∞ t f̂(t) dt
pub fn check_prop2(
    m: &MarketParams,
    scenario: &ScenarioTriple,
    order_dist: &Distribution,
) -> Result<FeasibilityReport, RandoptError> {
    let q_hat = naive_order_quantity(m, &scenario.estimated)?;
    let mean = order_dist.mean();
    if (mean - q_hat).abs() > 1e-6 * q_hat.max(1.0) {
        return Err(RandoptError::MeanMismatch {
            required: q_hat,
            actual: mean,
        });
    }
    let compound = &scenario.compound;
    let (first, second) = dist::max_decomposition(order_dist, compound);
    let lhs = first + second;
    let rhs = q_hat * compound.cdf(q_hat) + compound.upper_partial_expectation(q_hat)?;
    Ok(FeasibilityReport::new(m, lhs, rhs, rhs - lhs, q_hat, RhsMode::ExactMismatch))
}
