//! Result and configuration types shared by every evaluator.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{AoiError, Result};

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    /// Monte Carlo over truncated infinite sums.
    TruncatedMc,
    /// Plain Monte Carlo over finitely many expectations.
    MonteCarlo,
    Simulation,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed-form",
            Method::TruncatedMc => "truncated-mc",
            Method::MonteCarlo => "mc",
            Method::Simulation => "simulation",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    /// `k_max` was reached before the tail tolerance was met.
    pub truncated: bool,
    /// A bound was evaluated outside the log-concave regime it is proven for.
    pub bound_not_guaranteed: bool,
}

impl Flags {
    pub fn is_empty(&self) -> bool {
        !self.truncated && !self.bound_not_guaranteed
    }
}

impl fmt::Display for Flags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.truncated {
            parts.push("truncated");
        }
        if self.bound_not_guaranteed {
            parts.push("bound-not-guaranteed");
        }
        f.write_str(&parts.join("|"))
    }
}

/// An average age (or bound on it) with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeEstimate {
    pub age: f64,
    pub method: Method,
    pub std_error: f64,
    pub terms_used: usize,
    pub flags: Flags,
    /// Probability that an update completes service (preemption evaluators).
    pub p_success: Option<f64>,
}

impl AgeEstimate {
    pub fn closed_form(age: f64) -> Self {
        Self {
            age,
            method: Method::ClosedForm,
            std_error: 0.0,
            terms_used: 0,
            flags: Flags::default(),
            p_success: None,
        }
    }

    pub fn monte_carlo(age: f64, std_error: f64) -> Self {
        Self {
            method: Method::MonteCarlo,
            std_error,
            ..Self::closed_form(age)
        }
    }

    pub(crate) fn not_guaranteed_if(mut self, cond: bool) -> Self {
        self.flags.bound_not_guaranteed |= cond;
        self
    }

    pub(crate) fn with_p_success(mut self, p: f64) -> Self {
        self.p_success = Some(p);
        self
    }

    /// Standard error of `self - other` for independent estimates.
    pub fn combined_std_error(&self, other: &AgeEstimate) -> f64 {
        self.std_error.hypot(other.std_error)
    }

    /// `|self - other|` in units of the combined standard error.
    ///
    /// Two zero-variance estimates give 0 when they agree to 1e-9 and
    /// infinity otherwise.
    pub fn z_score(&self, other: &AgeEstimate) -> f64 {
        let diff = (self.age - other.age).abs();
        let sigma = self.combined_std_error(other);
        if sigma > 0.0 {
            diff / sigma
        } else if diff <= 1e-9 * self.age.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub samples: usize,
    pub seed: u64,
    /// Hard cap on the number of terms of an infinite sum.
    pub k_max: usize,
    /// Stop once the latest increment is below `tail_tol` times the running total.
    pub tail_tol: f64,
    /// Never stop before this many terms.
    pub k_min: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 0x5eed,
            k_max: 64,
            tail_tol: 1e-6,
            k_min: 5,
        }
    }
}

impl MonteCarloConfig {
    pub fn with_samples(self, samples: usize) -> Self {
        Self { samples, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 1_000 {
            return Err(AoiError::invalid(format!(
                "samples must be >= 1000, got {}",
                self.samples
            )));
        }
        if self.k_min < 1 || self.k_min > self.k_max {
            return Err(AoiError::invalid(format!(
                "need 1 <= k_min <= k_max, got k_min={} k_max={}",
                self.k_min, self.k_max
            )));
        }
        if !(self.tail_tol > 0.0) {
            return Err(AoiError::invalid(format!(
                "tail_tol must be > 0, got {}",
                self.tail_tol
            )));
        }
        Ok(())
    }
}

/// Split `total` items into [`BATCHES`] contiguous batches of near-equal size.
pub(crate) fn batch_sizes(total: usize) -> Vec<usize> {
    let base = total / BATCHES;
    let extra = total % BATCHES;
    (0..BATCHES)
        .map(|b| base + usize::from(b < extra))
        .collect()
}

/// Standard error of the mean of batch values: sample sd over sqrt(count).
/// Non-finite batch values are skipped.
pub(crate) fn batch_std_error(values: &[f64]) -> f64 {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let n = finite.len();
    if n < 2 {
        return 0.0;
    }
    let mean = finite.iter().sum::<f64>() / n as f64;
    let var = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batches_cover_total() {
        let sizes = batch_sizes(1_000_003);
        assert_eq!(sizes.len(), BATCHES);
        assert_eq!(sizes.iter().sum::<usize>(), 1_000_003);
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn std_error_of_constant_batches_is_zero() {
        assert_eq!(batch_std_error(&[2.0; 32]), 0.0);
        let se = batch_std_error(&[1.0, 3.0]);
        assert!((se - 1.0).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(MonteCarloConfig::default().validate().is_ok());
        assert!(MonteCarloConfig::default()
            .with_samples(10)
            .validate()
            .is_err());
        let bad = MonteCarloConfig {
            k_min: 10,
            k_max: 5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = MonteCarloConfig {
            tail_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn z_score_handles_exact_values() {
        let a = AgeEstimate::closed_form(1.0);
        assert_eq!(a.z_score(&AgeEstimate::closed_form(1.0)), 0.0);
        assert!(a.z_score(&AgeEstimate::closed_form(1.1)).is_infinite());
        let b = AgeEstimate::monte_carlo(1.2, 0.05);
        assert!((a.z_score(&b) - 4.0).abs() < 1e-12);
        assert_eq!(
            Flags {
                truncated: true,
                bound_not_guaranteed: true
            }
            .to_string(),
            "truncated|bound-not-guaranteed"
        );
    }
}
