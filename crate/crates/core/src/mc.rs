//! Monte-Carlo re-derivation of the analytic quantities.
//!
//! Draws are split into batches. Batch `b` uses the ChaCha8 stream `b` of
//! the generator seeded with `seed`, batches run in parallel, and their
//! moment accumulators are merged in batch order, so a report depends only
//! on the configuration and never on thread scheduling.

use std::io::Write;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::MarketParams;
use crate::dist::Distribution;
use crate::randopt::OrderPolicy;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("sim.n_draws must be at least 1")]
    NoDraws,
    #[error("sim.batch_size must be at least 1")]
    EmptyBatch,
}

fn default_batch_size() -> u64 {
    1 << 16
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_draws: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_batch_size")]
    pub batch_size: u64,
    /// Pair every draw with its reflection 1 − u. Each pair counts as one
    /// observation (the pair average), so `n` in the report is the number
    /// of pairs.
    #[serde(default)]
    pub antithetic: bool,
}

impl SimConfig {
    pub fn new(n_draws: u64, seed: u64) -> Self {
        Self {
            n_draws,
            seed,
            batch_size: default_batch_size(),
            antithetic: false,
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        if self.n_draws == 0 {
            return Err(McError::NoDraws);
        }
        if self.batch_size == 0 {
            return Err(McError::EmptyBatch);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub mean: f64,
    /// Unbiased sample variance of the observations.
    pub variance: f64,
    pub std_error: f64,
    pub n: u64,
    pub ci95: (f64, f64),
    /// Standard error of `variance`, from the fourth central moment.
    pub variance_std_error: f64,
}

impl SimReport {
    fn from_moments(m: &Moments) -> Self {
        let n = m.n as f64;
        let variance = if m.n > 1 { m.m2 / (n - 1.0) } else { 0.0 };
        let std_error = (variance / n).sqrt();
        let pop_var = m.m2 / n;
        let variance_std_error = ((m.m4 / n - pop_var * pop_var).max(0.0) / n).sqrt();
        Self {
            mean: m.mean,
            variance,
            std_error,
            n: m.n,
            ci95: (m.mean - 1.96 * std_error, m.mean + 1.96 * std_error),
            variance_std_error,
        }
    }

    /// (analytic − mean) / std_error; zero when both agree exactly.
    pub fn z_score(&self, analytic: f64) -> f64 {
        z(analytic - self.mean, self.std_error)
    }

    pub fn variance_z_score(&self, analytic_variance: f64) -> f64 {
        z(analytic_variance - self.variance, self.variance_std_error)
    }
}

fn z(diff: f64, se: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if se > 0.0 {
        diff / se
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// One-pass accumulator for the first four central moments, mergeable across
/// batches.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += term1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += term1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += term1;
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let d = other.mean - self.mean;
        let d2 = d * d;
        Moments {
            n: self.n + other.n,
            mean: self.mean + d * nb / n,
            m2: self.m2 + other.m2 + d2 * na * nb / n,
            m3: self.m3
                + other.m3
                + d2 * d * na * nb * (na - nb) / (n * n)
                + 3.0 * d * (na * other.m2 - nb * self.m2) / n,
            m4: self.m4
                + other.m4
                + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
                + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
                + 4.0 * d * (na * other.m3 - nb * self.m3) / n,
        }
    }
}

/// Estimate E[f(U₁, U₂)] for independent uniforms on (0, 1).
pub fn simulate<F>(cfg: &SimConfig, f: F) -> Result<SimReport, McError>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    cfg.validate()?;
    let observations = if cfg.antithetic {
        cfg.n_draws.div_ceil(2)
    } else {
        cfg.n_draws
    };
    let batches = observations.div_ceil(cfg.batch_size);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b);
            let size = cfg.batch_size.min(observations - b * cfg.batch_size);
            let mut acc = Moments::default();
            for _ in 0..size {
                let u1: f64 = rng.sample(Open01);
                let u2: f64 = rng.sample(Open01);
                let x = if cfg.antithetic {
                    0.5 * (f(u1, u2) + f(1.0 - u1, 1.0 - u2))
                } else {
                    f(u1, u2)
                };
                acc.push(x);
            }
            acc
        })
        .collect();
    let total = parts.iter().fold(Moments::default(), |acc, m| acc.merge(m));
    Ok(SimReport::from_moments(&total))
}

/// Realized profit p·min(q, d) − w·q with demand and (if stochastic) the
/// order drawn independently.
pub fn simulate_profit(
    m: &MarketParams,
    demand: &Distribution,
    policy: &OrderPolicy,
    cfg: &SimConfig,
) -> Result<SimReport, McError> {
    let (p, w) = (m.p, m.w);
    match policy {
        OrderPolicy::Deterministic(q) => {
            let q = *q;
            simulate(cfg, |u, _| p * q.min(demand.draw(u)) - w * q)
        }
        OrderPolicy::Stochastic(g) => simulate(cfg, |u, v| {
            let d = demand.draw(u);
            let q = g.draw(v);
            p * q.min(d) - w * q
        }),
    }
}

/// E[max(X, Y)] for independent draws X ~ `a`, Y ~ `b`.
pub fn simulate_expected_max(a: &Distribution, b: &Distribution, cfg: &SimConfig) -> Result<SimReport, McError> {
    simulate(cfg, |u, v| a.draw(u).max(b.draw(v)))
}

/// Write labelled reports as CSV rows:
/// `label,mean,variance,std_error,n,ci95_lo,ci95_hi`.
pub fn write_sim_csv<W: Write>(rows: &[(&str, SimReport)], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "mean", "variance", "std_error", "n", "ci95_lo", "ci95_hi"])?;
    for (label, r) in rows {
        w.write_record([
            label.to_string(),
            r.mean.to_string(),
            r.variance.to_string(),
            r.std_error.to_string(),
            r.n.to_string(),
            r.ci95.0.to_string(),
            r.ci95.1.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
