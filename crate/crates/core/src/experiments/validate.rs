use serde::Serialize;

use super::Evaluator;
use crate::error::Result;
use crate::estimate::{AgeEstimate, MonteCarloConfig};
use crate::format::sig;
use crate::model::QueueModel;
use crate::simulator::{simulate_age, SimConfig};

/// Exact evaluators further than this many combined standard errors from
/// the simulation fail the check.
pub const CONSISTENCY_Z: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationRow {
    pub evaluator: Evaluator,
    pub estimate: AgeEstimate,
    /// Signed distance to the simulation in combined standard errors.
    pub z: f64,
    pub gating: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub simulation: AgeEstimate,
    pub rows: Vec<ValidationRow>,
    pub passed: bool,
}

impl ValidationReport {
    pub const CSV_HEADER: &'static str = "evaluator,age,std_err,z,gating,status";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        out.push_str(&format!(
            "sim,{},{},0,false,reference\n",
            sig(self.simulation.age),
            sig(self.simulation.std_error)
        ));
        for r in &self.rows {
            let status = match (r.gating, r.passed) {
                (_, true) => "ok",
                (true, false) => "FAIL",
                (false, false) => "violated",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.evaluator,
                sig(r.estimate.age),
                sig(r.estimate.std_error),
                sig(r.z),
                r.gating,
                status
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<_> = self
            .rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "evaluator": r.evaluator.name(),
                    "age": r.estimate.age,
                    "std_err": r.estimate.std_error,
                    "z": r.z,
                    "gating": r.gating,
                    "passed": r.passed,
                })
            })
            .collect();
        let doc = serde_json::json!({
            "simulation": {"age": self.simulation.age, "std_err": self.simulation.std_error},
            "rows": rows,
            "passed": self.passed,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Run every applicable evaluator against a simulation of the same model.
///
/// Exact evaluators must fall within [`CONSISTENCY_Z`] combined standard
/// errors of the simulation. Bounds pass when they are not below the
/// simulated age by more than that margin; a bound that fails is reported
/// but only changes the verdict when it carries no `bound-not-guaranteed`
/// flag.
pub fn validate(
    model: &QueueModel,
    mc: &MonteCarloConfig,
    sim: &SimConfig,
) -> Result<ValidationReport> {
    let simulation = simulate_age(model, sim)?;
    let mut rows = Vec::new();
    for evaluator in Evaluator::ALL {
        if matches!(evaluator, Evaluator::Exact | Evaluator::Simulation)
            || evaluator.check(model).is_err()
        {
            continue;
        }
        let estimate = evaluator.evaluate(model, mc, sim)?;
        let se = estimate.combined_std_error(&simulation);
        let z = if se > 0.0 {
            (estimate.age - simulation.age) / se
        } else {
            0.0
        };
        let (gating, passed) = if evaluator.is_exact() {
            (true, estimate.z_score(&simulation) <= CONSISTENCY_Z)
        } else {
            let ok =
                estimate.age >= simulation.age - CONSISTENCY_Z * se - 1e-9 * simulation.age.abs();
            (!estimate.flags.bound_not_guaranteed, ok)
        };
        rows.push(ValidationRow {
            evaluator,
            estimate,
            z,
            gating,
            passed,
        });
    }
    let passed = rows.iter().all(|r| r.passed || !r.gating);
    Ok(ValidationReport {
        simulation,
        rows,
        passed,
    })
}
