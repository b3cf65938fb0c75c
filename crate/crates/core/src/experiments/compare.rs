use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Evaluator;
use crate::distributions::{DistributionSpec, Family};
use crate::error::{AoiError, Result};
use crate::estimate::{AgeEstimate, MonteCarloConfig};
use crate::format::sig;
use crate::model::{Discipline, QueueModel};
use crate::simulator::SimConfig;

const MEAN_TOLERANCE: f64 = 1e-9;

/// Compare candidate distributions for one side of the model at equal means.
///
/// Each candidate is a template whose shape is kept while its scale is
/// adjusted to every requested mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSpec {
    pub discipline: Discipline,
    pub side: super::Side,
    /// The distribution held fixed on the other side.
    pub fixed: DistributionSpec,
    pub candidates: Vec<DistributionSpec>,
    pub means: Vec<f64>,
    #[serde(default = "default_evaluator")]
    pub evaluator: Evaluator,
    #[serde(default)]
    pub mc: MonteCarloConfig,
    #[serde(default)]
    pub sim: SimConfig,
}

fn default_evaluator() -> Evaluator {
    Evaluator::Exact
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonEntry {
    pub candidate: DistributionSpec,
    pub estimate: AgeEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonPoint {
    pub mean: f64,
    pub entries: Vec<ComparisonEntry>,
    /// Index of the candidate with the smallest age.
    pub argmin: usize,
    /// Index of the largest age among log-concave candidates.
    pub argmax_log_concave: Option<usize>,
}

impl ComparisonPoint {
    pub fn argmin_family(&self) -> String {
        label(&self.entries[self.argmin].candidate)
    }

    pub fn argmax_log_concave_family(&self) -> Option<String> {
        self.argmax_log_concave
            .map(|i| label(&self.entries[i].candidate))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub evaluator: Evaluator,
    pub points: Vec<ComparisonPoint>,
}

/// Scale-free label of a candidate: its family plus any shape parameter.
pub fn label(spec: &DistributionSpec) -> String {
    match *spec {
        DistributionSpec::Gamma { shape, .. } if shape != 1.0 => {
            format!("gamma[shape={}]", sig(shape))
        }
        DistributionSpec::Uniform { lower, upper } => {
            format!("uniform[lo/hi={}]", sig(lower / upper))
        }
        _ => match spec.family() {
            Family::Gamma => "exp".to_string(),
            f => f.name().to_string(),
        },
    }
}

fn rank(ages: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ages.len()).collect();
    order.sort_by(|&a, &b| ages[a].total_cmp(&ages[b]));
    let mut ranks = vec![0; ages.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

impl ComparisonTable {
    pub const CSV_HEADER: &'static str = "mean,candidate,evaluator,age,std_err,flags,rank,argmin";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let ages: Vec<f64> = p.entries.iter().map(|e| e.estimate.age).collect();
            let ranks = rank(&ages);
            let best = p.argmin_family();
            for (e, r) in p.entries.iter().zip(ranks) {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    sig(p.mean),
                    label(&e.candidate),
                    self.evaluator,
                    sig(e.estimate.age),
                    sig(e.estimate.std_error),
                    e.estimate.flags,
                    r,
                    best
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let points: Vec<_> = self
            .points
            .iter()
            .map(|p| {
                let entries: Vec<_> = p
                    .entries
                    .iter()
                    .map(|e| {
                        serde_json::json!({
                            "candidate": label(&e.candidate),
                            "distribution": e.candidate.to_string(),
                            "age": e.estimate.age,
                            "std_err": e.estimate.std_error,
                            "flags": e.estimate.flags.to_string(),
                        })
                    })
                    .collect();
                serde_json::json!({
                    "mean": p.mean,
                    "argmin": p.argmin_family(),
                    "argmax_log_concave": p.argmax_log_concave_family(),
                    "entries": entries,
                })
            })
            .collect();
        let doc = serde_json::json!({ "evaluator": self.evaluator.name(), "points": points });
        let mut s = serde_json::to_string_pretty(&doc).expect("comparison serializes");
        s.push('\n');
        s
    }
}

pub fn compare_at_fixed_mean(spec: &ComparisonSpec) -> Result<ComparisonTable> {
    if spec.candidates.is_empty() {
        return Err(AoiError::config(
            "a comparison needs at least one candidate",
        ));
    }
    if spec.means.is_empty() || spec.means.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(AoiError::config(
            "comparison means must be finite and positive",
        ));
    }
    spec.mc.validate()?;
    if spec.evaluator == Evaluator::Simulation {
        spec.sim.validate()?;
    }

    let mut models = Vec::with_capacity(spec.means.len() * spec.candidates.len());
    for &m in &spec.means {
        for c in &spec.candidates {
            let candidate = c
                .with_mean(m)
                .map_err(|e| AoiError::config(e.to_string()))?;
            let got = candidate.mean();
            if (got - m).abs() > MEAN_TOLERANCE * m {
                return Err(AoiError::config(format!(
                    "candidate {candidate} has mean {got}, expected {m}"
                )));
            }
            let (y, s) = match spec.side {
                super::Side::Arrival => (candidate, spec.fixed),
                super::Side::Service => (spec.fixed, candidate),
            };
            let model = QueueModel::new(y, s, spec.discipline)
                .map_err(|e| AoiError::config(e.to_string()))?;
            spec.evaluator.check(&model)?;
            models.push((candidate, model));
        }
    }

    let estimates: Vec<Result<AgeEstimate>> = models
        .par_iter()
        .map(|(_, model)| spec.evaluator.evaluate(model, &spec.mc, &spec.sim))
        .collect();
    let mut entries = Vec::with_capacity(models.len());
    for ((candidate, _), est) in models.iter().zip(estimates) {
        entries.push(ComparisonEntry {
            candidate: *candidate,
            estimate: est?,
        });
    }

    let n = spec.candidates.len();
    let points = spec
        .means
        .iter()
        .zip(entries.chunks(n))
        .map(|(&mean, chunk)| {
            let argmin = (0..n)
                .min_by(|&a, &b| chunk[a].estimate.age.total_cmp(&chunk[b].estimate.age))
                .expect("non-empty");
            let argmax_log_concave = (0..n)
                .filter(|&i| chunk[i].candidate.is_log_concave())
                .max_by(|&a, &b| chunk[a].estimate.age.total_cmp(&chunk[b].estimate.age));
            ComparisonPoint {
                mean,
                entries: chunk.to_vec(),
                argmin,
                argmax_log_concave,
            }
        })
        .collect();
    Ok(ComparisonTable {
        evaluator: spec.evaluator,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Side;

    #[test]
    fn labels_ignore_scale() {
        let g = DistributionSpec::gamma(2.0, 3.0).unwrap();
        assert_eq!(label(&g), label(&g.with_mean(7.0).unwrap()));
        assert_eq!(label(&DistributionSpec::gamma(1.0, 3.0).unwrap()), "exp");
        assert_eq!(label(&DistributionSpec::exponential(3.0).unwrap()), "exp");
        assert_eq!(label(&DistributionSpec::deterministic(3.0).unwrap()), "det");
        assert_eq!(rank(&[3.0, 1.0, 2.0]), vec![3, 1, 2]);
    }

    #[test]
    fn deterministic_arrivals_win_under_exponential_service() {
        let spec = ComparisonSpec {
            discipline: Discipline::Blocking,
            side: Side::Arrival,
            fixed: DistributionSpec::exponential(1.0).unwrap(),
            candidates: vec![
                DistributionSpec::deterministic(1.0).unwrap(),
                DistributionSpec::gamma(2.0, 1.0).unwrap(),
                DistributionSpec::exponential(1.0).unwrap(),
                DistributionSpec::gamma(0.5, 1.0).unwrap(),
            ],
            means: vec![0.2, 1.0, 5.0],
            evaluator: Evaluator::Exact,
            mc: MonteCarloConfig::default(),
            sim: SimConfig::default(),
        };
        let table = compare_at_fixed_mean(&spec).unwrap();
        for p in &table.points {
            assert_eq!(p.argmin, 0);
            assert_eq!(p.argmax_log_concave, Some(2));
            assert!(p.entries[3].estimate.age > p.entries[2].estimate.age);
        }
        let csv = table.to_csv();
        assert!(csv.starts_with(ComparisonTable::CSV_HEADER));
        assert_eq!(csv.lines().count(), 1 + 12);
    }
}
