use rayon::prelude::*;
use serde::Serialize;

use crate::blocking::{age_gg_blocking_truncated, Truncation};
use crate::distributions::DistributionSpec;
use crate::error::{AoiError, Result};
use crate::estimate::{AgeEstimate, MonteCarloConfig};
use crate::format::sig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationRow {
    pub k: usize,
    pub estimate: AgeEstimate,
    /// Signed relative error against the converged reference.
    pub rel_error: f64,
}

/// General blocking age with the sums forced to `k` terms, next to the
/// adaptive reference. All runs share the same sample paths, so the
/// differences are truncation error only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationReport {
    pub reference: AgeEstimate,
    pub rows: Vec<TruncationRow>,
}

impl TruncationReport {
    pub const CSV_HEADER: &'static str = "k,age,std_err,rel_error";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.k,
                sig(r.estimate.age),
                sig(r.estimate.std_error),
                sig(r.rel_error)
            ));
        }
        out.push_str(&format!(
            "converged,{},{},0\n",
            sig(self.reference.age),
            sig(self.reference.std_error)
        ));
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<_> = self
            .rows
            .iter()
            .map(|r| serde_json::json!({"k": r.k, "age": r.estimate.age, "std_err": r.estimate.std_error, "rel_error": r.rel_error}))
            .collect();
        let doc = serde_json::json!({
            "reference": {
                "age": self.reference.age,
                "std_err": self.reference.std_error,
                "terms_used": self.reference.terms_used,
                "flags": self.reference.flags.to_string(),
            },
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn row(&self, k: usize) -> Option<&TruncationRow> {
        self.rows.iter().find(|r| r.k == k)
    }
}

pub fn truncation_report(
    y: &DistributionSpec,
    s: &DistributionSpec,
    k_values: &[usize],
    mc: &MonteCarloConfig,
) -> Result<TruncationReport> {
    if k_values.is_empty() || k_values.contains(&0) {
        return Err(AoiError::config("truncation levels must be positive"));
    }
    let largest = *k_values.iter().max().expect("non-empty");
    let reference_cfg = MonteCarloConfig {
        k_max: mc.k_max.max(4 * largest),
        ..*mc
    };
    let reference = age_gg_blocking_truncated(y, s, &reference_cfg, Truncation::Adaptive)?;
    let forced: Vec<Result<AgeEstimate>> = k_values
        .par_iter()
        .map(|&k| age_gg_blocking_truncated(y, s, mc, Truncation::Fixed(k)))
        .collect();
    let rows = k_values
        .iter()
        .zip(forced)
        .map(|(&k, est)| {
            let estimate = est?;
            Ok(TruncationRow {
                k,
                estimate,
                rel_error: (estimate.age - reference.age) / reference.age,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TruncationReport { reference, rows })
}
