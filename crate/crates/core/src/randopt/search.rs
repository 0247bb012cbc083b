//! Derivative-free scan over order-quantity distributions.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    baseline_profit, check_prop2, check_theorem1, expected_profit_stochastic,
    naive_order_quantity, OrderPolicy, OrderPolicyRecord, RandoptError, RhsMode,
};
use crate::bench::MarketParams;
use crate::compound::ScenarioTriple;
use crate::dist::Distribution;

/// Width of the uniform used to represent a point-mass order.
pub const POINT_MASS_WIDTH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderFamily {
    Uniform,
    #[serde(rename = "lognormal")]
    LogNormal,
    TruncatedNormal,
    PointMass,
}

impl OrderFamily {
    /// Names of the scanned parameters. With the mean pinned to Q̂* the
    /// location parameter is solved for and drops out.
    pub fn param_names(self, constrain_mean: bool) -> &'static [&'static str] {
        match (self, constrain_mean) {
            (OrderFamily::Uniform, false) => &["a", "b"],
            (OrderFamily::Uniform, true) => &["width"],
            (OrderFamily::LogNormal, false) => &["log_mean", "log_sd"],
            (OrderFamily::LogNormal, true) => &["log_sd"],
            (OrderFamily::TruncatedNormal, false) => &["mean", "sd"],
            (OrderFamily::TruncatedNormal, true) => &["sd"],
            (OrderFamily::PointMass, false) => &["q"],
            (OrderFamily::PointMass, true) => &[],
        }
    }

    /// Order distribution for one parameter vector, or `None` when the
    /// parameters do not describe a valid distribution.
    pub fn candidate(self, params: &[f64], constrain_mean: bool, q_hat: f64) -> Option<Distribution> {
        match (self, constrain_mean) {
            (OrderFamily::Uniform, false) => Distribution::uniform(params[0], params[1]).ok(),
            (OrderFamily::Uniform, true) => {
                let half = 0.5 * params[0];
                if !(half > 0.0) {
                    return None;
                }
                Distribution::uniform(q_hat - half, q_hat + half).ok()
            }
            (OrderFamily::LogNormal, false) => Distribution::lognormal(params[0], params[1]).ok(),
            (OrderFamily::LogNormal, true) => {
                let sd = params[0];
                if !(q_hat > 0.0) {
                    return None;
                }
                Distribution::lognormal(q_hat.ln() - 0.5 * sd * sd, sd).ok()
            }
            (OrderFamily::TruncatedNormal, false) => {
                Distribution::truncated_normal(params[0], params[1]).ok()
            }
            (OrderFamily::TruncatedNormal, true) => {
                let sd = params[0];
                let loc = truncated_normal_location_for_mean(q_hat, sd)?;
                Distribution::truncated_normal(loc, sd).ok()
            }
            (OrderFamily::PointMass, false) => point_mass_uniform(params[0]),
            (OrderFamily::PointMass, true) => point_mass_uniform(q_hat),
        }
    }
}

fn point_mass_uniform(q: f64) -> Option<Distribution> {
    let half = 0.5 * POINT_MASS_WIDTH;
    if q < half {
        return None;
    }
    Distribution::uniform(q - half, q + half).ok()
}

/// Location `m` such that Normal(m, sd) conditioned on [0, ∞) has the given
/// mean, found by bisection. The conditional mean increases with `m`.
fn truncated_normal_location_for_mean(target: f64, sd: f64) -> Option<f64> {
    if !(target > 0.0 && sd > 0.0) {
        return None;
    }
    let mean_of = |m: f64| Distribution::truncated_normal(m, sd).ok().map(|d| d.mean());
    // mean(m) > m, so the root lies below target
    let mut hi = target;
    let mut step = sd;
    let mut lo = target - step;
    loop {
        match mean_of(lo) {
            Some(v) if v < target => break,
            Some(_) => {
                hi = lo;
                step *= 2.0;
                lo = target - step;
            }
            None => return None,
        }
        if step > 1e6 * (sd + target) {
            return None;
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * (1.0 + mid.abs()) {
            return Some(mid);
        }
        match mean_of(mid) {
            Some(v) if v < target => lo = mid,
            Some(_) => hi = mid,
            None => lo = mid,
        }
    }
}

/// Order family with a closed interval of values for each scanned parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyTemplate {
    pub family: OrderFamily,
    pub bounds: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    /// Full tensor grid with `budget^(1/k)` points per parameter.
    Grid,
    /// `budget` points drawn uniformly inside the bounds.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub method: SearchMethod,
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub constrain_mean_to_qhat: bool,
}

/// One evaluated candidate. Invalid parameter combinations (such as a ≥ b)
/// are kept with empty profit and margin so the trace has one row per
/// enumerated candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub candidate_id: usize,
    pub params: Vec<f64>,
    pub expected_profit: Option<f64>,
    pub margin: Option<f64>,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub best_policy: OrderPolicyRecord,
    #[serde(skip)]
    pub best_order: OrderPolicy,
    pub best_params: Option<Vec<f64>>,
    pub best_expected_profit: f64,
    pub baseline_profit: f64,
    pub improvement: f64,
    pub q_hat_star: f64,
    pub rhs_mode: RhsMode,
    pub family: OrderFamily,
    pub param_names: Vec<String>,
    pub constrain_mean_to_qhat: bool,
    pub evaluations: usize,
    pub valid_count: usize,
    pub feasible_count: usize,
    pub search_trace: Vec<TraceRow>,
}

fn validate(template: &FamilyTemplate, cfg: &SearchConfig) -> Result<(), RandoptError> {
    let names = template.family.param_names(cfg.constrain_mean_to_qhat);
    if cfg.budget == 0 {
        return Err(RandoptError::Config("budget must be at least 1".into()));
    }
    if template.bounds.len() != names.len() {
        return Err(RandoptError::Config(format!(
            "{:?} family needs bounds for {:?}, got {} interval(s)",
            template.family,
            names,
            template.bounds.len()
        )));
    }
    for (name, [lo, hi]) in names.iter().zip(&template.bounds) {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(RandoptError::Config(format!(
                "bounds for `{name}` must be finite with lo <= hi, got [{lo}, {hi}]"
            )));
        }
    }
    Ok(())
}

fn grid_candidates(bounds: &[[f64; 2]], budget: usize) -> Result<Vec<Vec<f64>>, RandoptError> {
    let k = bounds.len();
    if k == 0 {
        return if budget == 1 {
            Ok(vec![vec![]])
        } else {
            Err(RandoptError::Config("a family with no free parameters has a single candidate; set budget to 1".into()))
        };
    }
    let per_dim = (budget as f64).powf(1.0 / k as f64).round() as usize;
    if per_dim.checked_pow(k as u32) != Some(budget) {
        return Err(RandoptError::Config(format!(
            "grid search over {k} parameter(s) needs budget = n^{k}, got {budget}"
        )));
    }
    let axis = |[lo, hi]: [f64; 2]| -> Vec<f64> {
        if per_dim == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..per_dim)
                .map(|i| lo + (hi - lo) * i as f64 / (per_dim - 1) as f64)
                .collect()
        }
    };
    let axes: Vec<Vec<f64>> = bounds.iter().copied().map(axis).collect();
    let mut out = Vec::with_capacity(budget);
    let mut index = vec![0usize; k];
    for _ in 0..budget {
        out.push(index.iter().zip(&axes).map(|(&i, a)| a[i]).collect());
        for j in (0..k).rev() {
            index[j] += 1;
            if index[j] < per_dim {
                break;
            }
            index[j] = 0;
        }
    }
    Ok(out)
}

fn random_candidates(bounds: &[[f64; 2]], budget: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..budget)
        .map(|_| {
            bounds
                .iter()
                .map(|[lo, hi]| lo + (hi - lo) * rng.gen::<f64>())
                .collect()
        })
        .collect()
}

/// Scan order distributions from `template` and return the feasible one
/// with the highest expected profit under compound demand.
///
/// Feasibility is the moment-constrained check when
/// `constrain_mean_to_qhat` is set and the general condition otherwise.
/// Candidates are evaluated in parallel; the trace keeps enumeration order.
/// Without a feasible candidate the naive deterministic order is kept.
pub fn search_policy(
    m: &MarketParams,
    scenario: &ScenarioTriple,
    template: &FamilyTemplate,
    cfg: &SearchConfig,
    mode: RhsMode,
) -> Result<SearchResult, RandoptError> {
    validate(template, cfg)?;
    let q_hat = naive_order_quantity(m, &scenario.estimated)?;
    let baseline = baseline_profit(m, scenario, mode)?;
    let constrained = cfg.constrain_mean_to_qhat;
    let candidates = match cfg.method {
        SearchMethod::Grid => grid_candidates(&template.bounds, cfg.budget)?,
        SearchMethod::Random => random_candidates(&template.bounds, cfg.budget, cfg.seed),
    };

    let evaluated: Vec<Result<(TraceRow, Option<Distribution>), RandoptError>> = candidates
        .into_par_iter()
        .enumerate()
        .map(|(id, params)| {
            let Some(g) = template.family.candidate(&params, constrained, q_hat) else {
                return Ok((
                    TraceRow {
                        candidate_id: id,
                        params,
                        expected_profit: None,
                        margin: None,
                        feasible: false,
                    },
                    None,
                ));
            };
            let profit =
                expected_profit_stochastic(m, &scenario.compound, &OrderPolicy::Stochastic(g.clone()))?;
            let report = if constrained {
                check_prop2(m, scenario, &g)?
            } else {
                check_theorem1(m, scenario, &g, mode)?
            };
            Ok((
                TraceRow {
                    candidate_id: id,
                    params,
                    expected_profit: Some(profit),
                    margin: Some(report.margin),
                    feasible: report.feasible,
                },
                Some(g),
            ))
        })
        .collect();

    let mut trace = Vec::with_capacity(evaluated.len());
    let mut best: Option<(f64, Vec<f64>, Distribution)> = None;
    let mut valid_count = 0;
    let mut feasible_count = 0;
    for item in evaluated {
        let (row, g) = item?;
        if let Some(g) = g {
            valid_count += 1;
            if row.feasible {
                feasible_count += 1;
                let profit = row.expected_profit.expect("valid rows carry a profit");
                if best.as_ref().is_none_or(|(b, _, _)| profit > *b) {
                    best = Some((profit, row.params.clone(), g));
                }
            }
        }
        trace.push(row);
    }

    let (best_order, best_params, best_expected_profit) = match best {
        Some((profit, params, g)) => (OrderPolicy::Stochastic(g), Some(params), profit),
        None => (OrderPolicy::Deterministic(q_hat), None, baseline),
    };
    Ok(SearchResult {
        best_policy: (&best_order).into(),
        best_order,
        best_params,
        best_expected_profit,
        baseline_profit: baseline,
        improvement: best_expected_profit - baseline,
        q_hat_star: q_hat,
        rhs_mode: mode,
        family: template.family,
        param_names: template
            .family
            .param_names(constrained)
            .iter()
            .map(|s| s.to_string())
            .collect(),
        constrain_mean_to_qhat: constrained,
        evaluations: trace.len(),
        valid_count,
        feasible_count,
        search_trace: trace,
    })
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write the trace as CSV:
/// `candidate_id,param_1,param_2,expected_profit,margin,feasible`.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["candidate_id", "param_1", "param_2", "expected_profit", "margin", "feasible"])?;
    for r in rows {
        w.write_record([
            r.candidate_id.to_string(),
            opt_cell(r.params.first().copied()),
            opt_cell(r.params.get(1).copied()),
            opt_cell(r.expected_profit),
            opt_cell(r.margin),
            r.feasible.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
