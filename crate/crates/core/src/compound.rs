//! Compound demand: an estimated parametric family whose parameters carry
//! their own uncertainty, discretized into a finite mixture.
//!
//! Each uncertain parameter is replaced by `nodes` equal-probability
//! stratified values at the quantiles (i − 0.5)/nodes of its uncertainty
//! distribution. The tensor product of those values gives the mixture
//! components. Parameter values that produce an invalid member of the family
//! are dropped and the remaining weights renormalized.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{DistError, Distribution, DistributionRecord, Family};

pub const MAX_UNCERTAIN_PARAMS: usize = 3;
pub const MAX_COMPONENTS: usize = 10_000;

/// Fraction of dropped parameter draws at which construction fails.
pub const MAX_REJECTED_FRACTION: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompoundError {
    #[error("compound demand needs a parametric estimated family (not empirical or mixture)")]
    NotParametric,
    #[error("nodes must be at least 1")]
    ZeroNodes,
    #[error("`{name}` is not a parameter of the {family} family (expected one of {expected:?})")]
    UnknownParameter {
        name: String,
        family: &'static str,
        expected: &'static [&'static str],
    },
    #[error("parameter `{0}` has more than one uncertainty distribution")]
    DuplicateParameter(String),
    #[error("{params} uncertain parameters with {nodes} nodes is {components} components; limits are {MAX_UNCERTAIN_PARAMS} parameters and {MAX_COMPONENTS} components")]
    TooComplex {
        params: usize,
        nodes: usize,
        components: f64,
    },
    #[error("{rejected} of {total} parameter draws give an invalid distribution")]
    TooManyRejected { rejected: usize, total: usize },
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// Uncertainty about one named parameter of the estimated family. The
/// parameter value is `offset + X` with X drawn from `uncertainty`, so that
/// real-valued parameters (such as a log-scale location) can be shifted
/// below zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterUncertainty {
    pub parameter: String,
    pub uncertainty: Distribution,
    pub offset: f64,
}

impl ParameterUncertainty {
    pub fn new(parameter: impl Into<String>, uncertainty: Distribution) -> Self {
        Self {
            parameter: parameter.into(),
            uncertainty,
            offset: 0.0,
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    /// Stratified node values at quantiles (i − 0.5)/nodes.
    pub fn nodes(&self, nodes: usize) -> Vec<f64> {
        (1..=nodes)
            .map(|i| {
                let u = (i as f64 - 0.5) / nodes as f64;
                self.offset
                    + self
                        .uncertainty
                        .quantile(u)
                        .expect("stratified levels lie strictly inside (0, 1)")
            })
            .collect()
    }
}

/// Scenario-file form: `{"param": "hi", "dist": {...}, "offset": 0.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterUncertaintyRecord {
    pub param: String,
    pub dist: DistributionRecord,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub offset: f64,
}

impl ParameterUncertaintyRecord {
    pub fn build(&self, base_dir: &std::path::Path) -> Result<ParameterUncertainty, DistError> {
        Ok(ParameterUncertainty::new(self.param.clone(), self.dist.build(base_dir)?)
            .with_offset(self.offset))
    }
}

impl From<&ParameterUncertainty> for ParameterUncertaintyRecord {
    fn from(pu: &ParameterUncertainty) -> Self {
        Self {
            param: pu.parameter.clone(),
            dist: (&pu.uncertainty).into(),
            offset: pu.offset,
        }
    }
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// Output of [`compound_of`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundDemand {
    pub distribution: Distribution,
    /// Fraction of parameter draws rejected as invalid.
    pub rejected_fraction: f64,
    /// Number of parameter combinations evaluated (nodes^k).
    pub evaluated: usize,
}

/// Build the compound demand distribution from `estimated` and the
/// uncertainty of some of its parameters.
///
/// Components with identical parameters are merged; a single surviving
/// component is returned as a plain distribution rather than a mixture, so
/// empty or point-mass uncertainty returns `estimated` unchanged.
pub fn compound_of(
    estimated: &Distribution,
    uncertainties: &[ParameterUncertainty],
    nodes: usize,
) -> Result<CompoundDemand, CompoundError> {
    if nodes == 0 {
        return Err(CompoundError::ZeroNodes);
    }
    if uncertainties.is_empty() {
        return Ok(CompoundDemand {
            distribution: estimated.clone(),
            rejected_fraction: 0.0,
            evaluated: 1,
        });
    }
    let base = estimated.as_continuous().ok_or(CompoundError::NotParametric)?;
    let family = base.family();
    for (i, pu) in uncertainties.iter().enumerate() {
        if family.param(&pu.parameter).is_none() {
            return Err(CompoundError::UnknownParameter {
                name: pu.parameter.clone(),
                family: family.name(),
                expected: family.param_names(),
            });
        }
        if uncertainties[..i].iter().any(|o| o.parameter == pu.parameter) {
            return Err(CompoundError::DuplicateParameter(pu.parameter.clone()));
        }
    }
    let k = uncertainties.len();
    let count = (nodes as f64).powi(k as i32);
    if k > MAX_UNCERTAIN_PARAMS || count > MAX_COMPONENTS as f64 {
        return Err(CompoundError::TooComplex {
            params: k,
            nodes,
            components: count,
        });
    }
    let total = count as usize;
    let grids: Vec<Vec<f64>> = uncertainties.iter().map(|pu| pu.nodes(nodes)).collect();
    let weight = 1.0 / total as f64;

    let mut parts: Vec<(f64, Distribution)> = Vec::new();
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut rejected = 0usize;
    let mut index = vec![0usize; k];
    for _ in 0..total {
        let mut fam: Family = family;
        for (j, pu) in uncertainties.iter().enumerate() {
            fam = fam
                .with_param(&pu.parameter, grids[j][index[j]])
                .expect("parameter names checked above");
        }
        match build_member(fam, base.upper_bound()) {
            Some(d) => {
                let key: Vec<u64> = family
                    .param_names()
                    .iter()
                    .map(|n| fam.param(n).expect("known parameter").to_bits())
                    .collect();
                match seen.get(&key) {
                    Some(&i) => parts[i].0 += weight,
                    None => {
                        seen.insert(key, parts.len());
                        parts.push((weight, d));
                    }
                }
            }
            None => rejected += 1,
        }
        // odometer over the tensor grid, last parameter fastest
        for j in (0..k).rev() {
            index[j] += 1;
            if index[j] < nodes {
                break;
            }
            index[j] = 0;
        }
    }

    let rejected_fraction = rejected as f64 / total as f64;
    if parts.is_empty() || rejected_fraction >= MAX_REJECTED_FRACTION {
        return Err(CompoundError::TooManyRejected { rejected, total });
    }
    Ok(CompoundDemand {
        distribution: Distribution::normalized_mixture(parts)?,
        rejected_fraction,
        evaluated: total,
    })
}

fn build_member(family: Family, cap: Option<f64>) -> Option<Distribution> {
    let d = Distribution::from_family(family).ok()?;
    match cap {
        Some(u) => d.truncated_above(u).ok(),
        None => Some(d),
    }
}

/// True, estimated and compound demand for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTriple {
    /// F: the demand that actually holds, when known.
    pub true_demand: Distribution,
    /// F̃: the fitted distribution used to place the naive order.
    pub estimated: Distribution,
    /// F̂: demand under which profits accrue.
    pub compound: Distribution,
}

impl ScenarioTriple {
    pub fn new(true_demand: Distribution, estimated: Distribution, compound: Distribution) -> Self {
        Self {
            true_demand,
            estimated,
            compound,
        }
    }

    /// Scenario with no estimation error: all three distributions equal.
    pub fn exact(demand: Distribution) -> Self {
        Self::new(demand.clone(), demand.clone(), demand)
    }

    /// Scenario whose true demand is unknown and taken to be the estimate.
    pub fn mismatched(estimated: Distribution, compound: Distribution) -> Self {
        Self::new(estimated.clone(), estimated, compound)
    }
}
