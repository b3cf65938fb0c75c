use std::fs;
use std::path::Path;

use serde::Deserialize;

use aoi_core::experiments::{parse_grid, Side};
use aoi_core::{AoiError, Discipline, DistributionSpec, MonteCarloConfig, Result, SimConfig};

use crate::args::{Common, Format, ModelArgs};

/// Grid given either as a JSON array or as grid text.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Text(String),
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            Grid::Values(v) => Ok(v.clone()),
            Grid::Text(t) => parse_grid(t),
        }
    }
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub discipline: Option<String>,
    pub arrival: Option<DistributionSpec>,
    pub service: Option<DistributionSpec>,
    pub evaluators: Option<String>,
    pub axes: Option<Vec<String>>,
    pub side: Option<Side>,
    pub fixed: Option<DistributionSpec>,
    pub candidates: Option<Vec<DistributionSpec>>,
    pub means: Option<Grid>,
    pub k_values: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub cycles: Option<u64>,
    pub replications: Option<usize>,
    pub k_max: Option<usize>,
    pub tail_tol: Option<f64>,
    pub max_events: Option<u64>,
    pub format: Option<Format>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| AoiError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| AoiError::Config(format!("{}: {e}", path.display())))
    }

    pub fn mc(&self, common: &Common) -> MonteCarloConfig {
        let mut mc = MonteCarloConfig::default();
        if let Some(v) = common.samples.or(self.samples) {
            mc.samples = v;
        }
        if let Some(v) = common.seed.or(self.seed) {
            mc.seed = v;
        }
        if let Some(v) = common.k_max.or(self.k_max) {
            mc.k_max = v;
            mc.k_min = mc.k_min.min(v.max(1));
        }
        if let Some(v) = self.tail_tol {
            mc.tail_tol = v;
        }
        mc
    }

    pub fn sim(&self, common: &Common) -> SimConfig {
        let mut sim = SimConfig::default();
        if let Some(v) = common.cycles.or(self.cycles) {
            sim.cycles = v;
        }
        if let Some(v) = common.seed.or(self.seed) {
            sim.seed = v;
        }
        if let Some(v) = common.replications.or(self.replications) {
            sim.replications = v;
        }
        if let Some(v) = common.max_events.or(self.max_events) {
            sim.max_events = v;
        }
        sim
    }

    pub fn format(&self, common: &Common) -> Format {
        common.format.or(self.format).unwrap_or(Format::Csv)
    }

    pub fn discipline(&self, flag: Option<Discipline>) -> Result<Discipline> {
        match (flag, &self.discipline) {
            (Some(d), _) => Ok(d),
            (None, Some(text)) => text.parse(),
            (None, None) => Err(AoiError::Config("missing discipline".into())),
        }
    }

    pub fn arrival(&self, flag: Option<DistributionSpec>) -> Result<DistributionSpec> {
        flag.or(self.arrival)
            .ok_or_else(|| AoiError::Config("missing arrival distribution".into()))
    }

    pub fn service(&self, flag: Option<DistributionSpec>) -> Result<DistributionSpec> {
        flag.or(self.service)
            .ok_or_else(|| AoiError::Config("missing service distribution".into()))
    }

    pub fn model(&self, args: &ModelArgs) -> Result<aoi_core::QueueModel> {
        aoi_core::QueueModel::new(
            self.arrival(args.arrival)?,
            self.service(args.service)?,
            self.discipline(args.discipline)?,
        )
    }
}
