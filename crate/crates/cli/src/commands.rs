//! The three commands. Each returns a serializable report together with a
//! human-readable rendering of it.

use std::fmt::Write as _;

use newsvendor::bench::{self, MarketParams};
use newsvendor::dist::{expected_max, Distribution};
use newsvendor::mc::{simulate_expected_max, simulate_profit, SimConfig, SimReport};
use newsvendor::randopt::{
    baseline_profit, expected_profit_stochastic, naive_order_quantity, search_policy, OrderPolicy,
    RhsMode, SearchResult,
};
use serde::Serialize;

use crate::error::CliError;
use crate::scenario::Scenario;

/// Bound on |z| for a validation row to pass.
pub const Z_LIMIT: f64 = 4.0;

/// Format a number with up to ten significant decimals and no trailing
/// zeros.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DemandSummary {
    pub mean: f64,
    pub optimal_quantity: f64,
    pub optimal_profit: f64,
    pub optimal_profit_variance: f64,
    /// Expected profit of the naive order Q̂* under this demand.
    pub profit_at_q_hat_star: f64,
}

impl DemandSummary {
    fn of(m: &MarketParams, d: &Distribution, q_hat: f64) -> Result<Self, CliError> {
        Ok(Self {
            mean: d.mean(),
            optimal_quantity: bench::optimal_quantity(m, d)?,
            optimal_profit: bench::optimal_profit(m, d)?,
            optimal_profit_variance: bench::optimal_profit_variance(m, d)?,
            profit_at_q_hat_star: bench::expected_profit(m, d, q_hat)?,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum TrueDemandBlock {
    /// Rendered as the string "= estimated".
    SameAsEstimated(&'static str),
    Given(DemandSummary),
}

#[derive(Debug, Clone, Serialize)]
pub struct Baselines {
    pub theorem: f64,
    pub exact: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub market: MarketParams,
    pub critical_fractile: f64,
    pub q_hat_star: f64,
    pub rhs_mode: RhsMode,
    pub baseline_profit: Baselines,
    pub estimated: DemandSummary,
    pub compound: DemandSummary,
    pub compound_components: usize,
    pub rejected_fraction: f64,
    pub true_demand: TrueDemandBlock,
}

pub fn solve(s: &Scenario, mode: RhsMode) -> Result<SolveReport, CliError> {
    let m = &s.market;
    let q_hat = naive_order_quantity(m, &s.triple.estimated)?;
    let true_demand = if s.true_given {
        TrueDemandBlock::Given(DemandSummary::of(m, &s.triple.true_demand, q_hat)?)
    } else {
        TrueDemandBlock::SameAsEstimated("= estimated")
    };
    Ok(SolveReport {
        market: *m,
        critical_fractile: m.critical_fractile(),
        q_hat_star: q_hat,
        rhs_mode: mode,
        baseline_profit: Baselines {
            theorem: baseline_profit(m, &s.triple, RhsMode::TheoremAsWritten)?,
            exact: baseline_profit(m, &s.triple, RhsMode::ExactMismatch)?,
        },
        estimated: DemandSummary::of(m, &s.triple.estimated, q_hat)?,
        compound: DemandSummary::of(m, &s.triple.compound, q_hat)?,
        compound_components: s.triple.compound.components().map_or(1, <[_]>::len),
        rejected_fraction: s.compound.rejected_fraction,
        true_demand,
    })
}

fn summary_lines(out: &mut String, label: &str, d: &DemandSummary) {
    let _ = writeln!(
        out,
        "{label:<10} mean {}  Q* = {}  π* = {}  Var(π*) = {}  profit at Q̂* = {}",
        num(d.mean),
        num(d.optimal_quantity),
        num(d.optimal_profit),
        num(d.optimal_profit_variance),
        num(d.profit_at_q_hat_star)
    );
}

pub fn render_solve(r: &SolveReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "critical fractile 1 - w/p = {}", num(r.critical_fractile));
    let _ = writeln!(out, "Q̂* = {}", num(r.q_hat_star));
    let _ = writeln!(
        out,
        "baseline profit: exact = {}  theorem = {}  (active: {})",
        num(r.baseline_profit.exact),
        num(r.baseline_profit.theorem),
        mode_name(r.rhs_mode)
    );
    summary_lines(&mut out, "estimated", &r.estimated);
    summary_lines(&mut out, "compound", &r.compound);
    let _ = writeln!(
        out,
        "           {} component(s), {} of parameter draws rejected",
        r.compound_components,
        num(r.rejected_fraction)
    );
    match &r.true_demand {
        TrueDemandBlock::SameAsEstimated(s) => {
            let _ = writeln!(out, "true       {s}");
        }
        TrueDemandBlock::Given(d) => summary_lines(&mut out, "true", d),
    }
    out
}

fn mode_name(mode: RhsMode) -> &'static str {
    match mode {
        RhsMode::TheoremAsWritten => "theorem",
        RhsMode::ExactMismatch => "exact",
    }
}

pub fn search(s: &Scenario, mode: RhsMode) -> Result<SearchResult, CliError> {
    let template = s
        .file
        .order_family
        .as_ref()
        .ok_or_else(|| CliError::Config("order_family: required by `search`".into()))?;
    let cfg = s
        .file
        .search
        .as_ref()
        .ok_or_else(|| CliError::Config("search: required by `search`".into()))?;
    Ok(search_policy(&s.market, &s.triple, template, cfg, mode)?)
}

pub fn render_search(r: &SearchResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:?} family, {} candidates: {} valid, {} feasible (baseline mode: {})",
        r.family,
        r.evaluations,
        r.valid_count,
        r.feasible_count,
        mode_name(r.rhs_mode)
    );
    let _ = writeln!(out, "Q̂* = {}  baseline profit = {}", num(r.q_hat_star), num(r.baseline_profit));
    match &r.best_params {
        Some(params) => {
            let named: Vec<String> = r
                .param_names
                .iter()
                .zip(params)
                .map(|(n, v)| format!("{n} = {}", num(*v)))
                .collect();
            let _ = writeln!(out, "best policy: {}", named.join(", "));
            let _ = writeln!(
                out,
                "expected profit = {}  improvement = {}",
                num(r.best_expected_profit),
                num(r.improvement)
            );
        }
        None => {
            let _ = writeln!(
                out,
                "deterministic optimum retained: order Q̂* = {} (expected profit {})",
                num(r.q_hat_star),
                num(r.best_expected_profit)
            );
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub analytic: f64,
    pub simulated: f64,
    pub std_error: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateReport {
    pub sim: SimConfig,
    pub z_limit: f64,
    pub rows: Vec<CheckRow>,
    pub passed: bool,
}

fn row(check: &str, analytic: f64, simulated: f64, std_error: f64, z: f64) -> Result<CheckRow, CliError> {
    if !analytic.is_finite() {
        return Err(CliError::Integrity(format!("{check}: analytic value is {analytic}")));
    }
    Ok(CheckRow {
        check: check.into(),
        analytic,
        simulated,
        std_error,
        z,
        pass: z.abs() <= Z_LIMIT,
    })
}

fn mean_row(check: &str, analytic: f64, r: &SimReport) -> Result<CheckRow, CliError> {
    row(check, analytic, r.mean, r.std_error, r.z_score(analytic))
}

/// Order distribution at the centre of the configured search box. When the
/// centre is not a valid distribution (a = b for a uniform box over the
/// same interval) the parameters are taken at 25% and 75% of their ranges.
pub fn midpoint_candidate(s: &Scenario, q_hat: f64) -> Option<Distribution> {
    let t = s.file.order_family.as_ref()?;
    let constrained = s.file.search.as_ref().is_some_and(|c| c.constrain_mean_to_qhat);
    let at = |fracs: &dyn Fn(usize) -> f64| -> Vec<f64> {
        t.bounds
            .iter()
            .enumerate()
            .map(|(i, [lo, hi])| lo + fracs(i) * (hi - lo))
            .collect()
    };
    let names = t.family.param_names(constrained);
    if names.len() != t.bounds.len() {
        return None;
    }
    t.family
        .candidate(&at(&|_| 0.5), constrained, q_hat)
        .or_else(|| {
            t.family
                .candidate(&at(&|i| if i % 2 == 0 { 0.25 } else { 0.75 }), constrained, q_hat)
        })
}

/// Compare analytic values under the compound demand with simulation.
/// `bias` is added to every analytic value before comparison.
pub fn validate(s: &Scenario, bias: f64) -> Result<ValidateReport, CliError> {
    let m = &s.market;
    let demand = &s.triple.compound;
    let sim = s.file.sim;
    let cfg = |k: u64| SimConfig {
        seed: sim.seed.wrapping_add(k),
        ..sim
    };
    let q_hat = naive_order_quantity(m, &s.triple.estimated)?;
    let q_star = bench::optimal_quantity(m, demand)?;
    let mut rows = Vec::new();

    let at_naive = simulate_profit(m, demand, &OrderPolicy::Deterministic(q_hat), &cfg(0))?;
    rows.push(mean_row(
        "expected_profit_at_q_hat",
        bench::expected_profit(m, demand, q_hat)? + bias,
        &at_naive,
    )?);

    let at_opt = simulate_profit(m, demand, &OrderPolicy::Deterministic(q_star), &cfg(1))?;
    rows.push(mean_row("optimal_profit", bench::optimal_profit(m, demand)? + bias, &at_opt)?);
    let var = bench::optimal_profit_variance(m, demand)? + bias;
    rows.push(row(
        "profit_variance",
        var,
        at_opt.variance,
        at_opt.variance_std_error,
        at_opt.variance_z_score(var),
    )?);

    let other = match midpoint_candidate(s, q_hat) {
        Some(g) => {
            let policy = OrderPolicy::Stochastic(g.clone());
            let r = simulate_profit(m, demand, &policy, &cfg(2))?;
            rows.push(mean_row(
                "expected_profit_stochastic",
                expected_profit_stochastic(m, demand, &policy)? + bias,
                &r,
            )?);
            g
        }
        None => s.triple.estimated.clone(),
    };
    let r = simulate_expected_max(&other, demand, &cfg(3))?;
    rows.push(mean_row("expected_max", expected_max(&other, demand) + bias, &r)?);

    let passed = rows.iter().all(|r| r.pass);
    Ok(ValidateReport {
        sim,
        z_limit: Z_LIMIT,
        rows,
        passed,
    })
}

pub fn render_validate(r: &ValidateReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} draws per check, seed {}", r.sim.n_draws, r.sim.seed);
    let _ = writeln!(
        out,
        "{:<28} {:>16} {:>16} {:>12} {:>8}  result",
        "check", "analytic", "simulated", "std error", "z"
    );
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{:<28} {:>16} {:>16} {:>12} {:>8.3}  {}",
            row.check,
            num(row.analytic),
            num(row.simulated),
            format!("{:.3e}", row.std_error),
            row.z,
            if row.pass { "pass" } else { "FAIL" }
        );
    }
    let failed = r.rows.iter().filter(|x| !x.pass).count();
    let _ = writeln!(
        out,
        "{}",
        if failed == 0 {
            format!("all {} checks within |z| <= {}", r.rows.len(), r.z_limit)
        } else {
            format!("{failed} of {} checks failed", r.rows.len())
        }
    );
    out
}
