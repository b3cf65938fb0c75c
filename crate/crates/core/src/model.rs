use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{AoiError, Result};
use crate::estimate::{AgeEstimate, MonteCarloConfig};
use crate::{blocking, preemption};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Discipline {
    /// Arrivals during service are discarded.
    Blocking,
    /// An arrival terminates the update in service and takes its place.
    Preemption,
}

impl fmt::Display for Discipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Discipline::Blocking => "blocking",
            Discipline::Preemption => "preemption",
        })
    }
}

impl FromStr for Discipline {
    type Err = AoiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "blocking" | "b" => Ok(Discipline::Blocking),
            "preemption" | "preemptive" | "p" => Ok(Discipline::Preemption),
            other => Err(AoiError::Parse(format!("unknown discipline `{other}`"))),
        }
    }
}

/// A G/G/1/1 queue: interarrival and service distributions plus discipline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueModel {
    pub interarrival: DistributionSpec,
    pub service: DistributionSpec,
    pub discipline: Discipline,
}

impl QueueModel {
    pub fn new(
        interarrival: DistributionSpec,
        service: DistributionSpec,
        discipline: Discipline,
    ) -> Result<Self> {
        let m = Self {
            interarrival,
            service,
            discipline,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn blocking(interarrival: DistributionSpec, service: DistributionSpec) -> Result<Self> {
        Self::new(interarrival, service, Discipline::Blocking)
    }

    pub fn preemption(interarrival: DistributionSpec, service: DistributionSpec) -> Result<Self> {
        Self::new(interarrival, service, Discipline::Preemption)
    }

    pub fn validate(&self) -> Result<()> {
        self.interarrival.validate()?;
        self.service.validate()?;
        if !(self.interarrival.mean() > 0.0) {
            return Err(AoiError::invalid(format!(
                "interarrival distribution {} must have a positive mean",
                self.interarrival
            )));
        }
        Ok(())
    }

    /// Both distributions time-scaled by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.interarrival.scaled(c)?,
            self.service.scaled(c)?,
            self.discipline,
        )
    }

    /// The most direct exact evaluator for this model: a closed form when one
    /// side is exponential, otherwise the general Monte Carlo formula.
    pub fn exact_age(&self, mc: &MonteCarloConfig) -> Result<AgeEstimate> {
        self.validate()?;
        let (y, s) = (&self.interarrival, &self.service);
        match self.discipline {
            Discipline::Blocking => {
                if let Some(mu) = s.exponential_rate() {
                    blocking::age_gm_blocking(y, mu)
                } else if let Some(lambda) = y.exponential_rate() {
                    blocking::age_mg_blocking(lambda, s)
                } else {
                    blocking::age_gg_blocking(y, s, mc)
                }
            }
            Discipline::Preemption => {
                if let Some(mu) = s.exponential_rate() {
                    preemption::age_gm_preemption(y, mu)
                } else if let Some(lambda) = y.exponential_rate() {
                    preemption::age_mg_preemption(lambda, s)
                } else {
                    preemption::age_gg_preemption(y, s, mc)
                }
            }
        }
    }
}

impl fmt::Display for QueueModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} Y={} S={}",
            self.discipline, self.interarrival, self.service
        )
    }
}
