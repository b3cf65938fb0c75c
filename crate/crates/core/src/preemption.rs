//! Average age under preemption in service: a new arrival replaces the
//! update in service.
//!
//! An update succeeds when its service ends no later than the next arrival,
//! so the number of arrivals per cycle is geometric and the general age
//!
//! ```text
//! age = E[Y²]/(2E[Y]) + E[Y F̄_S(Y)] / (1 - E[F̄_S(Y)]) + E[S | S < Y]
//! ```
//!
//! needs no infinite sums. Ties `S = Y` count as successes.

use rayon::prelude::*;

use crate::blocking::renewal_process_age;
use crate::distributions::DistributionSpec;
use crate::error::{AoiError, Result};
use crate::estimate::{batch_sizes, batch_std_error, AgeEstimate, Method, MonteCarloConfig};
use crate::rng::{domain_rng, Domain};

/// Per-batch Monte Carlo sums over independent `(Y, S)` pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct PairBatch {
    n: f64,
    /// `Σ Y F̄_S(Y)` with `F̄_S` exact.
    y_tail: f64,
    /// `Σ F̄_S(Y)`.
    tail: f64,
    /// `Σ S 1{S <= Y}`.
    served: f64,
    /// `Σ 1{S <= Y}`.
    successes: f64,
}

impl PairBatch {
    fn middle(&self) -> f64 {
        self.y_tail / (self.n - self.tail)
    }

    fn bound_middle(&self, mean_y: f64) -> f64 {
        mean_y * self.tail / (self.n - self.tail)
    }

    fn success_service(&self) -> f64 {
        self.served / self.successes
    }
}

/// Results of one pair-sampling pass, pooled and per batch.
#[derive(Debug, Clone)]
pub(crate) struct PairSums {
    pooled: PairBatch,
    batches: Vec<PairBatch>,
}

/// Draw `mc.samples` independent pairs, interarrivals and services on
/// separate streams per batch.
pub(crate) fn pair_sums(
    y: &DistributionSpec,
    s: &DistributionSpec,
    mc: &MonteCarloConfig,
) -> Result<PairSums> {
    mc.validate()?;
    let ys = y.sampler();
    let ss = s.sampler();
    let batches: Vec<PairBatch> = batch_sizes(mc.samples)
        .into_par_iter()
        .enumerate()
        .map(|(b, n)| {
            let mut y_rng = domain_rng(mc.seed, Domain::PairArrivals, b as u64);
            let mut s_rng = domain_rng(mc.seed, Domain::PairServices, b as u64);
            let mut acc = PairBatch {
                n: n as f64,
                ..Default::default()
            };
            for _ in 0..n {
                let yv = ys.sample(&mut y_rng);
                let sv = ss.sample(&mut s_rng);
                let f = s.tail(yv);
                acc.y_tail += yv * f;
                acc.tail += f;
                if sv <= yv {
                    acc.served += sv;
                    acc.successes += 1.0;
                }
            }
            acc
        })
        .collect();
    let pooled = batches.iter().fold(PairBatch::default(), |a, b| PairBatch {
        n: a.n + b.n,
        y_tail: a.y_tail + b.y_tail,
        tail: a.tail + b.tail,
        served: a.served + b.served,
        successes: a.successes + b.successes,
    });
    Ok(PairSums { pooled, batches })
}

impl PairSums {
    /// `E[S | S <= Y]` and its batch-means standard error.
    pub(crate) fn mean_success_service(&self) -> Result<(f64, f64)> {
        if self.pooled.successes == 0.0 {
            return Err(AoiError::domain(format!(
                "no update completed service in {} sampled pairs",
                self.pooled.n
            )));
        }
        let per_batch: Vec<f64> = self
            .batches
            .iter()
            .map(PairBatch::success_service)
            .collect();
        Ok((self.pooled.success_service(), batch_std_error(&per_batch)))
    }

    fn p_success(&self) -> f64 {
        1.0 - self.pooled.tail / self.pooled.n
    }
}

/// Success probability and the conditional means that enter the age.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessStats {
    /// `Pr(S <= Y)`.
    pub p_success: f64,
    /// `E[S | S < Y]`, the time a successful update spends in service.
    pub mean_success_service: f64,
    /// `E[Y | Y < S]`.
    pub mean_blocked_interarrival: f64,
}

fn both_exponential(y: &DistributionSpec, s: &DistributionSpec) -> Option<(f64, f64)> {
    Some((y.exponential_rate()?, s.exponential_rate()?))
}

fn check_pair(y: &DistributionSpec, s: &DistributionSpec) -> Result<()> {
    y.validate()?;
    s.validate()?;
    if y.mean() > 0.0 {
        Ok(())
    } else {
        Err(AoiError::invalid(format!(
            "interarrival distribution {y} must have a positive mean"
        )))
    }
}

fn no_success(y: &DistributionSpec, s: &DistributionSpec) -> AoiError {
    AoiError::domain(format!("no update ever completes service for Y={y}, S={s}"))
}

/// Closed forms for `p` when either side is exponential; for the
/// conditional means only when both are.
pub fn success_stats(
    y: &DistributionSpec,
    s: &DistributionSpec,
    mc: &MonteCarloConfig,
) -> Result<SuccessStats> {
    check_pair(y, s)?;
    if let Some((lambda, mu)) = both_exponential(y, s) {
        let p = mu / (lambda + mu);
        return Ok(SuccessStats {
            p_success: p,
            mean_success_service: 1.0 / (lambda + mu),
            mean_blocked_interarrival: 1.0 / (lambda + mu),
        });
    }
    let pairs = pair_sums(y, s, mc)?;
    let p = if let Some(mu) = s.exponential_rate() {
        1.0 - y.laplace(mu)?
    } else if let Some(lambda) = y.exponential_rate() {
        s.laplace(lambda)?
    } else {
        pairs.p_success()
    };
    if !(p > 0.0) {
        return Err(no_success(y, s));
    }
    let (served, _) = pairs.mean_success_service()?;
    let blocked = if let Some(mu) = s.exponential_rate() {
        y.weighted_laplace(mu)? / y.laplace(mu)?
    } else if pairs.pooled.tail > 0.0 {
        pairs.pooled.y_tail / pairs.pooled.tail
    } else {
        0.0
    };
    Ok(SuccessStats {
        p_success: p,
        mean_success_service: served,
        mean_blocked_interarrival: blocked,
    })
}

enum MiddleTerm {
    Exact,
    Bound,
}

fn gg_preemption(
    y: &DistributionSpec,
    s: &DistributionSpec,
    mc: &MonteCarloConfig,
    which: MiddleTerm,
) -> Result<AgeEstimate> {
    check_pair(y, s)?;
    let base = renewal_process_age(y)?;
    let mean_y = y.mean();

    if let Some((lambda, mu)) = both_exponential(y, s) {
        let one_minus_p = y.laplace(mu)?;
        let middle = match which {
            MiddleTerm::Exact => y.weighted_laplace(mu)? / (1.0 - one_minus_p),
            MiddleTerm::Bound => mean_y * one_minus_p / (1.0 - one_minus_p),
        };
        let est = AgeEstimate::closed_form(base + middle + 1.0 / (lambda + mu));
        return Ok(est.with_p_success(1.0 - one_minus_p));
    }

    let pairs = pair_sums(y, s, mc)?;
    // Exponential service: middle term closed; only E[S̃] is sampled.
    let closed_middle = match s.exponential_rate() {
        Some(mu) => {
            let one_minus_p = y.laplace(mu)?;
            if !(one_minus_p < 1.0) {
                return Err(no_success(y, s));
            }
            Some(match which {
                MiddleTerm::Exact => y.weighted_laplace(mu)? / (1.0 - one_minus_p),
                MiddleTerm::Bound => mean_y * one_minus_p / (1.0 - one_minus_p),
            })
        }
        None => None,
    };
    if closed_middle.is_none() && !(pairs.p_success() > 0.0) {
        return Err(no_success(y, s));
    }
    pairs.mean_success_service()?;

    let middle_of = |b: &PairBatch| {
        closed_middle.unwrap_or_else(|| match which {
            MiddleTerm::Exact => b.middle(),
            MiddleTerm::Bound => b.bound_middle(mean_y),
        })
    };
    let age = base + middle_of(&pairs.pooled) + pairs.pooled.success_service();
    let per_batch: Vec<f64> = pairs
        .batches
        .iter()
        .map(|b| middle_of(b) + b.success_service())
        .collect();

    let p = match (s.exponential_rate(), y.exponential_rate()) {
        (Some(mu), _) => 1.0 - y.laplace(mu)?,
        (None, Some(lambda)) => s.laplace(lambda)?,
        (None, None) => pairs.p_success(),
    };
    let mut est = AgeEstimate::monte_carlo(age, batch_std_error(&per_batch)).with_p_success(p);
    est.method = Method::MonteCarlo;
    Ok(est)
}

/// General G/G/1/1 preemption age.
pub fn age_gg_preemption(
    y: &DistributionSpec,
    s: &DistributionSpec,
    mc: &MonteCarloConfig,
) -> Result<AgeEstimate> {
    gg_preemption(y, s, mc, MiddleTerm::Exact)
}

/// Upper bound replacing `E[Y F̄_S(Y)]` by `E[Y] E[F̄_S(Y)]`; no
/// log-concavity requirement.
pub fn bound_gg_preemption(
    y: &DistributionSpec,
    s: &DistributionSpec,
    mc: &MonteCarloConfig,
) -> Result<AgeEstimate> {
    gg_preemption(y, s, mc, MiddleTerm::Bound)
}

/// G/M/1/1 preemption age: the arrival-process age plus `1/mu`.
pub fn age_gm_preemption(y: &DistributionSpec, mu: f64) -> Result<AgeEstimate> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(AoiError::invalid(format!(
            "service rate must be finite and > 0, got {mu}"
        )));
    }
    check_pair(y, &DistributionSpec::exponential(mu)?)?;
    let est = AgeEstimate::closed_form(renewal_process_age(y)? + 1.0 / mu);
    Ok(est.with_p_success(1.0 - y.laplace(mu)?))
}

/// M/G/1/1 preemption age `1 / (λ E[e^{-λS}])`.
pub fn age_mg_preemption(lambda: f64, s: &DistributionSpec) -> Result<AgeEstimate> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(AoiError::invalid(format!(
            "arrival rate must be finite and > 0, got {lambda}"
        )));
    }
    s.validate()?;
    let p = s.laplace(lambda)?;
    if !(p > 0.0) {
        return Err(AoiError::domain(format!(
            "E[exp(-{lambda} S)] underflows for S={s}: preemption never completes"
        )));
    }
    Ok(AgeEstimate::closed_form(1.0 / (lambda * p)).with_p_success(p))
}
