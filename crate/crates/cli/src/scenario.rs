//! Scenario files: one JSON document describing the market, the demand
//! distributions and the search and simulation settings.

use std::path::{Path, PathBuf};

use newsvendor::bench::MarketParams;
use newsvendor::compound::{compound_of, CompoundDemand, ParameterUncertaintyRecord, ScenarioTriple};
use newsvendor::dist::{Distribution, DistributionRecord};
use newsvendor::mc::SimConfig;
use newsvendor::randopt::{FamilyTemplate, RhsMode, SearchConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn default_nodes() -> usize {
    64
}

fn default_sim() -> SimConfig {
    SimConfig::new(1_000_000, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub market: MarketParams,
    /// Defaults to `estimated_demand` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_demand: Option<DistributionRecord>,
    pub estimated_demand: DistributionRecord,
    #[serde(default)]
    pub parameter_uncertainties: Vec<ParameterUncertaintyRecord>,
    #[serde(default = "default_nodes")]
    pub compound_nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_family: Option<FamilyTemplate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchConfig>,
    #[serde(default = "default_sim")]
    pub sim: SimConfig,
    #[serde(default)]
    pub rhs_mode: RhsMode,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Schema {
                path: if path == "." { "<root>".into() } else { path },
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::MissingFile {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Copy with sample files read into inline values. Defaults are already
    /// materialized by parsing, so the result is self-contained.
    pub fn normalized(&self, base_dir: &Path) -> Result<Self, CliError> {
        let inline = |context: &str, r: &DistributionRecord| {
            r.with_inline_samples(base_dir).map_err(|e| CliError::from_dist(context, e))
        };
        let mut out = self.clone();
        out.estimated_demand = inline("estimated_demand", &self.estimated_demand)?;
        if let Some(t) = &self.true_demand {
            out.true_demand = Some(inline("true_demand", t)?);
        }
        for (i, pu) in out.parameter_uncertainties.iter_mut().enumerate() {
            pu.dist = inline(&format!("parameter_uncertainties[{i}].dist"), &pu.dist)?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario records serialize")
    }
}

/// A scenario with every distribution built and checked.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub market: MarketParams,
    pub triple: ScenarioTriple,
    pub compound: CompoundDemand,
    pub true_given: bool,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let file = ScenarioFile::read(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Self::from_file(&file, &base)
    }

    pub fn from_file(file: &ScenarioFile, base_dir: &Path) -> Result<Self, CliError> {
        let file = file.normalized(base_dir)?;
        file.market.validate()?;
        file.sim.validate()?;
        let build = |context: &str, r: &DistributionRecord| -> Result<Distribution, CliError> {
            r.build(base_dir).map_err(|e| CliError::from_dist(context, e))
        };
        let estimated = build("estimated_demand", &file.estimated_demand)?;
        let true_demand = match &file.true_demand {
            Some(r) => build("true_demand", r)?,
            None => estimated.clone(),
        };
        let uncertainties = file
            .parameter_uncertainties
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.build(base_dir)
                    .map_err(|e| CliError::from_dist(&format!("parameter_uncertainties[{i}]"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let compound = compound_of(&estimated, &uncertainties, file.compound_nodes)
            .map_err(|e| CliError::config("parameter_uncertainties", e))?;
        let triple = ScenarioTriple::new(true_demand, estimated, compound.distribution.clone());
        Ok(Self {
            true_given: file.true_demand.is_some(),
            market: file.market,
            triple,
            compound,
            file,
        })
    }
}
