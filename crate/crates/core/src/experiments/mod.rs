//! Experiment drivers: parameter sweeps, fixed-mean comparisons, truncation
//! reports and cross-validation against the simulator.
//!
//! All drivers evaluate grid points in parallel and emit rows in grid order,
//! so output is identical for any thread count.

mod compare;
mod sweep;
mod truncation;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::blocking;
use crate::error::{AoiError, Result};
use crate::estimate::{AgeEstimate, MonteCarloConfig};
use crate::format::sig;
use crate::model::{Discipline, QueueModel};
use crate::preemption;
use crate::simulator::{simulate_age, SimConfig};

pub use compare::{
    compare_at_fixed_mean, ComparisonEntry, ComparisonPoint, ComparisonSpec, ComparisonTable,
};
pub use sweep::{parse_grid, run_sweep, Side, SweepAxis, SweepSpec};
pub use truncation::{truncation_report, TruncationReport, TruncationRow};
pub use validate::{validate, ValidationReport, ValidationRow, CONSISTENCY_Z};

/// A named way of computing (or bounding) the average age of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluator {
    /// Best exact evaluator for the model (closed form when available).
    Exact,
    /// General formula for the discipline, by Monte Carlo.
    #[serde(rename = "gg")]
    General,
    /// Closed form for exponential service.
    #[serde(rename = "gm")]
    ExponentialService,
    /// Blocking, exponential service, conditional-mean form.
    #[serde(rename = "gm-equiv")]
    ExponentialServiceEquivalent,
    /// Closed form for exponential arrivals.
    #[serde(rename = "mg")]
    ExponentialArrivals,
    BoundLcg,
    BoundLcm,
    BoundDecoupled,
    BoundMlc,
    BoundPreemption,
    #[serde(rename = "sim")]
    Simulation,
}

impl Evaluator {
    pub const ALL: [Evaluator; 11] = [
        Evaluator::Exact,
        Evaluator::General,
        Evaluator::ExponentialService,
        Evaluator::ExponentialServiceEquivalent,
        Evaluator::ExponentialArrivals,
        Evaluator::BoundLcg,
        Evaluator::BoundLcm,
        Evaluator::BoundDecoupled,
        Evaluator::BoundMlc,
        Evaluator::BoundPreemption,
        Evaluator::Simulation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Evaluator::Exact => "exact",
            Evaluator::General => "gg",
            Evaluator::ExponentialService => "gm",
            Evaluator::ExponentialServiceEquivalent => "gm-equiv",
            Evaluator::ExponentialArrivals => "mg",
            Evaluator::BoundLcg => "bound-lcg",
            Evaluator::BoundLcm => "bound-lcm",
            Evaluator::BoundDecoupled => "bound-decoupled",
            Evaluator::BoundMlc => "bound-mlc",
            Evaluator::BoundPreemption => "bound-preemption",
            Evaluator::Simulation => "sim",
        }
    }

    /// Exact evaluators must agree with simulation; bounds need not.
    pub fn is_exact(self) -> bool {
        matches!(
            self,
            Evaluator::Exact
                | Evaluator::General
                | Evaluator::ExponentialService
                | Evaluator::ExponentialServiceEquivalent
                | Evaluator::ExponentialArrivals
        )
    }

    pub fn is_bound(self) -> bool {
        !self.is_exact() && self != Evaluator::Simulation
    }

    /// The upper bounds defined for a discipline.
    pub fn bounds_for(discipline: Discipline) -> &'static [Evaluator] {
        match discipline {
            Discipline::Blocking => &[
                Evaluator::BoundLcg,
                Evaluator::BoundDecoupled,
                Evaluator::BoundMlc,
            ],
            Discipline::Preemption => &[Evaluator::BoundPreemption],
        }
    }

    /// Comma-separated evaluator names; `bounds` expands to every bound of
    /// the discipline.
    pub fn parse_list(text: &str, discipline: Discipline) -> Result<Vec<Evaluator>> {
        let mut out = Vec::new();
        for name in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if name.eq_ignore_ascii_case("bounds") {
                out.extend_from_slice(Self::bounds_for(discipline));
            } else {
                out.push(name.parse()?);
            }
        }
        if out.is_empty() {
            return Err(AoiError::config("no evaluators given"));
        }
        Ok(out)
    }

    /// Rejects evaluator/model combinations the evaluator is not defined for.
    pub fn check(self, model: &QueueModel) -> Result<()> {
        let blocking = model.discipline == Discipline::Blocking;
        let exp_service = model.service.exponential_rate().is_some();
        let exp_arrivals = model.interarrival.exponential_rate().is_some();
        let why = match self {
            Evaluator::ExponentialService if !exp_service => "needs exponential service",
            Evaluator::ExponentialServiceEquivalent if !exp_service => "needs exponential service",
            Evaluator::ExponentialServiceEquivalent if !blocking => "is defined for blocking only",
            Evaluator::ExponentialArrivals if !exp_arrivals => "needs exponential interarrivals",
            Evaluator::BoundLcm if !exp_service => "needs exponential service",
            Evaluator::BoundLcg
            | Evaluator::BoundLcm
            | Evaluator::BoundDecoupled
            | Evaluator::BoundMlc
                if !blocking =>
            {
                "is defined for blocking only"
            }
            Evaluator::BoundPreemption if blocking => "is defined for preemption only",
            _ => return Ok(()),
        };
        Err(AoiError::config(format!(
            "evaluator `{}` {why} ({model})",
            self.name()
        )))
    }

    pub fn evaluate(
        self,
        model: &QueueModel,
        mc: &MonteCarloConfig,
        sim: &SimConfig,
    ) -> Result<AgeEstimate> {
        self.check(model)?;
        let (y, s) = (&model.interarrival, &model.service);
        let blocking = model.discipline == Discipline::Blocking;
        let mu = || s.exponential_rate().expect("checked exponential service");
        let lambda = || y.exponential_rate().expect("checked exponential arrivals");
        match self {
            Evaluator::Exact => model.exact_age(mc),
            Evaluator::General if blocking => blocking::age_gg_blocking(y, s, mc),
            Evaluator::General => preemption::age_gg_preemption(y, s, mc),
            Evaluator::ExponentialService if blocking => blocking::age_gm_blocking(y, mu()),
            Evaluator::ExponentialService => preemption::age_gm_preemption(y, mu()),
            Evaluator::ExponentialServiceEquivalent => blocking::age_gm_blocking_equiv(y, mu(), mc),
            Evaluator::ExponentialArrivals if blocking => blocking::age_mg_blocking(lambda(), s),
            Evaluator::ExponentialArrivals => preemption::age_mg_preemption(lambda(), s),
            Evaluator::BoundLcg => blocking::bound_lcg_blocking(y, s, mc),
            Evaluator::BoundLcm => blocking::bound_lcm_blocking(y, mu()),
            Evaluator::BoundDecoupled => blocking::bound_lcg_decoupled(y, s),
            Evaluator::BoundMlc => blocking::bound_mlc_blocking(y, s),
            Evaluator::BoundPreemption => preemption::bound_gg_preemption(y, s, mc),
            Evaluator::Simulation => simulate_age(model, sim),
        }
    }
}

impl fmt::Display for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Evaluator {
    type Err = AoiError;

    fn from_str(s: &str) -> Result<Self> {
        let lowered = s.trim().to_ascii_lowercase();
        Evaluator::ALL
            .into_iter()
            .find(|e| e.name() == lowered)
            .ok_or_else(|| AoiError::config(format!("unknown evaluator `{}`", s.trim())))
    }
}

/// One output row of the fixed CSV layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Row {
    pub param1: Option<f64>,
    pub param2: Option<f64>,
    pub evaluator: Evaluator,
    pub estimate: AgeEstimate,
}

pub const CSV_HEADER: &str = "param1,param2,evaluator,age,std_err,terms_used,flags";

fn opt(x: Option<f64>) -> String {
    x.map(sig).unwrap_or_default()
}

impl Row {
    pub fn csv_line(&self) -> String {
        let e = &self.estimate;
        format!(
            "{},{},{},{},{},{},{}",
            opt(self.param1),
            opt(self.param2),
            self.evaluator,
            sig(e.age),
            sig(e.std_error),
            e.terms_used,
            e.flags
        )
    }

    fn json(&self) -> serde_json::Value {
        let e = &self.estimate;
        serde_json::json!({
            "param1": self.param1,
            "param2": self.param2,
            "evaluator": self.evaluator.name(),
            "age": e.age,
            "std_err": e.std_error,
            "terms_used": e.terms_used,
            "flags": e.flags.to_string(),
            "method": e.method.to_string(),
            "p_success": e.p_success,
        })
    }
}

/// Rows in the fixed `param1,param2,evaluator,age,std_err,terms_used,flags` layout.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResultTable {
    pub rows: Vec<Row>,
}

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv_line());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<_> = self.rows.iter().map(Row::json).collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
        s.push('\n');
        s
    }

    /// Ages of the rows produced by one evaluator, in grid order.
    pub fn column(&self, evaluator: Evaluator) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.evaluator == evaluator)
            .map(|r| r.estimate.age)
            .collect()
    }
}

/// Evaluate a list of evaluators on one model, keeping order.
pub fn evaluate_all(
    model: &QueueModel,
    evaluators: &[Evaluator],
    mc: &MonteCarloConfig,
    sim: &SimConfig,
) -> Result<ResultTable> {
    for e in evaluators {
        e.check(model)?;
    }
    let rows = evaluators
        .iter()
        .map(|&evaluator| {
            Ok(Row {
                param1: None,
                param2: None,
                evaluator,
                estimate: evaluator.evaluate(model, mc, sim)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResultTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;

    #[test]
    fn evaluator_names_round_trip() {
        for e in Evaluator::ALL {
            assert_eq!(e.name().parse::<Evaluator>().unwrap(), e);
            let json = serde_json::to_string(&e).unwrap();
            assert_eq!(json, format!("\"{}\"", e.name()));
        }
        assert!("fastest".parse::<Evaluator>().is_err());
        assert_eq!(
            Evaluator::parse_list("exact, bounds", Discipline::Preemption).unwrap(),
            vec![Evaluator::Exact, Evaluator::BoundPreemption]
        );
    }

    #[test]
    fn mismatched_evaluators_are_config_errors() {
        let g = DistributionSpec::gamma(2.0, 2.0).unwrap();
        let e = DistributionSpec::exponential(2.0).unwrap();
        let blocking = QueueModel::blocking(g, g).unwrap();
        assert!(matches!(
            Evaluator::ExponentialService.check(&blocking),
            Err(AoiError::Config(_))
        ));
        assert!(matches!(
            Evaluator::ExponentialArrivals.check(&blocking),
            Err(AoiError::Config(_))
        ));
        assert!(matches!(
            Evaluator::BoundPreemption.check(&blocking),
            Err(AoiError::Config(_))
        ));
        let pre = QueueModel::preemption(g, e).unwrap();
        assert!(Evaluator::ExponentialService.check(&pre).is_ok());
        assert!(Evaluator::ExponentialServiceEquivalent.check(&pre).is_err());
        assert!(Evaluator::BoundLcg.check(&pre).is_err());
    }

    #[test]
    fn csv_row_layout() {
        let row = Row {
            param1: Some(2.0),
            param2: None,
            evaluator: Evaluator::BoundLcg,
            estimate: AgeEstimate::closed_form(2.0 / 3.0).not_guaranteed_if(true),
        };
        assert_eq!(
            row.csv_line(),
            "2,,bound-lcg,0.666666666667,0,0,bound-not-guaranteed"
        );
    }
}
