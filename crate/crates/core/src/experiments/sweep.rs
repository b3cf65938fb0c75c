use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Evaluator, ResultTable, Row};
use crate::distributions::DistributionSpec;
use crate::error::{AoiError, Result};
use crate::estimate::MonteCarloConfig;
use crate::model::{Discipline, QueueModel};
use crate::simulator::SimConfig;

/// Which distribution of the model a sweep axis varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[serde(alias = "y", alias = "interarrival")]
    Arrival,
    #[serde(alias = "s")]
    Service,
}

impl FromStr for Side {
    type Err = AoiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "arrival" | "interarrival" | "y" => Ok(Side::Arrival),
            "service" | "s" => Ok(Side::Service),
            other => Err(AoiError::config(format!("unknown sweep side `{other}`"))),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Arrival => "arrival",
            Side::Service => "service",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub side: Side,
    pub param: String,
    pub values: Vec<f64>,
}

/// Grid values: either a comma list `1,2,4` or an evenly spaced
/// `start:stop:count` range (endpoints included).
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| AoiError::config(format!("bad grid value `{}`", s.trim())))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(AoiError::config(format!(
                "range `{text}` must be start:stop:count"
            )));
        }
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| AoiError::config(format!("bad point count `{}`", parts[2].trim())))?;
        if n < 2 {
            return Err(AoiError::config("a range needs at least 2 points"));
        }
        let step = (b - a) / (n - 1) as f64;
        Ok((0..n)
            .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
            .collect())
    } else {
        text.split(',').map(num).collect()
    }
}

impl FromStr for SweepAxis {
    type Err = AoiError;

    /// `arrival.rate=1,2,4` or `service.shape=1:4:7`.
    fn from_str(s: &str) -> Result<Self> {
        let (lhs, grid) = s.split_once('=').ok_or_else(|| {
            AoiError::config(format!("sweep axis `{s}` must look like side.param=values"))
        })?;
        let (side, param) = lhs
            .split_once('.')
            .ok_or_else(|| AoiError::config(format!("sweep axis `{lhs}` must name side.param")))?;
        let axis = SweepAxis {
            side: side.parse()?,
            param: param.trim().to_ascii_lowercase(),
            values: parse_grid(grid)?,
        };
        axis.validate()?;
        Ok(axis)
    }
}

impl SweepAxis {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(AoiError::config(format!(
                "axis {}.{} has no values",
                self.side, self.param
            )));
        }
        if self.values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(AoiError::config(format!(
                "axis {}.{} values must be finite and positive",
                self.side, self.param
            )));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AoiError::config(format!(
                "axis {}.{} values must be strictly increasing",
                self.side, self.param
            )));
        }
        Ok(())
    }
}

/// A one- or two-axis parameter sweep over a base model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub discipline: Discipline,
    pub arrival: DistributionSpec,
    pub service: DistributionSpec,
    pub axes: Vec<SweepAxis>,
    pub evaluators: Vec<Evaluator>,
    #[serde(default)]
    pub mc: MonteCarloConfig,
    #[serde(default)]
    pub sim: SimConfig,
}

struct GridPoint {
    param1: f64,
    param2: Option<f64>,
    model: QueueModel,
}

impl SweepSpec {
    fn grid(&self) -> Result<Vec<GridPoint>> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(AoiError::config("a sweep takes one or two axes"));
        }
        if self.evaluators.is_empty() {
            return Err(AoiError::config("a sweep needs at least one evaluator"));
        }
        for axis in &self.axes {
            axis.validate()?;
        }
        let outer = &self.axes[0];
        let inner: Vec<Option<f64>> = match self.axes.get(1) {
            Some(axis) => axis.values.iter().copied().map(Some).collect(),
            None => vec![None],
        };
        let mut points = Vec::with_capacity(outer.values.len() * inner.len());
        for &p1 in &outer.values {
            for &p2 in &inner {
                let (mut y, mut s) = (self.arrival, self.service);
                let mut apply = |axis: &SweepAxis, v: f64| -> Result<()> {
                    let target = match axis.side {
                        Side::Arrival => &mut y,
                        Side::Service => &mut s,
                    };
                    *target = target.with_param(&axis.param, v).map_err(|e| {
                        AoiError::config(format!(
                            "sweep point {}.{}={v}: {e}",
                            axis.side, axis.param
                        ))
                    })?;
                    Ok(())
                };
                apply(outer, p1)?;
                if let (Some(axis), Some(v)) = (self.axes.get(1), p2) {
                    apply(axis, v)?;
                }
                let model = QueueModel::new(y, s, self.discipline)
                    .map_err(|e| AoiError::config(e.to_string()))?;
                for e in &self.evaluators {
                    e.check(&model)?;
                }
                points.push(GridPoint {
                    param1: p1,
                    param2: p2,
                    model,
                });
            }
        }
        Ok(points)
    }
}

/// Run a sweep. Every grid point is validated before any evaluation, and
/// rows come back in grid order (first axis outermost).
pub fn run_sweep(spec: &SweepSpec) -> Result<ResultTable> {
    spec.mc.validate()?;
    if spec.evaluators.contains(&Evaluator::Simulation) {
        spec.sim.validate()?;
    }
    let points = spec.grid()?;
    let results: Vec<Result<Vec<Row>>> = points
        .par_iter()
        .map(|p| {
            spec.evaluators
                .iter()
                .map(|&evaluator| {
                    Ok(Row {
                        param1: Some(p.param1),
                        param2: p.param2,
                        evaluator,
                        estimate: evaluator.evaluate(&p.model, &spec.mc, &spec.sim)?,
                    })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(ResultTable { rows })
}
