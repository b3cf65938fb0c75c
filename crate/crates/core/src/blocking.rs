//! Average age under the blocking discipline: arrivals that find the server
//! busy are discarded.
//!
//! The general evaluator estimates the two infinite sums over partial sums
//! `A_k = Y_1 + ... + Y_k` of interarrival times,
//!
//! ```text
//! age = E[Y²]/(2E[Y]) + Σ_k E[A_k F̄_S(A_k)] / (1 + Σ_k E[F̄_S(A_k)]) + E[S]
//! ```
//!
//! by Monte Carlo on shared interarrival paths with the tail `F̄_S` evaluated
//! exactly. Closed forms cover exponential service (G/M), exponential arrivals
//! (M/G) and the upper bounds.

use rayon::prelude::*;

use crate::distributions::{DistributionSpec, Sampler};
use crate::error::{AoiError, Result};
use crate::estimate::{batch_sizes, batch_std_error, AgeEstimate, Method, MonteCarloConfig};
use crate::rng::{domain_rng, Domain, StreamRng};

/// `E[G²] / (2 E[G])`, the average age of a renewal process with cycle `G`.
pub fn renewal_process_age(spec: &DistributionSpec) -> Result<f64> {
    let mean = spec.mean();
    if !(mean > 0.0) {
        return Err(AoiError::domain(format!(
            "renewal age needs a positive mean, {spec} has mean {mean}"
        )));
    }
    Ok(spec.second_moment() / (2.0 * mean))
}

fn check_interarrival(y: &DistributionSpec) -> Result<()> {
    y.validate()?;
    if y.mean() > 0.0 {
        Ok(())
    } else {
        Err(AoiError::invalid(format!(
            "interarrival distribution {y} must have a positive mean"
        )))
    }
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(AoiError::invalid(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

/// How many terms of the infinite sums to accumulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Stop at the first `k >= k_min` whose numerator increment falls below
    /// `tail_tol` times the running numerator; flag if `k_max` is reached.
    Adaptive,
    /// Exactly this many terms, no convergence check.
    Fixed(usize),
}

/// Estimated sums of the general blocking formula.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockingSums {
    /// `E[F̄_S(A_k)]` for k = 1, 2, ...
    pub tail_terms: Vec<f64>,
    /// `E[A_k F̄_S(A_k)]` for k = 1, 2, ...
    pub weighted_terms: Vec<f64>,
    /// `Σ E[A_k F̄_S(A_k)]`.
    pub numerator: f64,
    /// `1 + Σ E[F̄_S(A_k)]`, which is `E[K]`.
    pub denominator: f64,
    pub numerator_std_error: f64,
    pub denominator_std_error: f64,
    /// Batch-means standard error of `numerator / denominator`.
    pub ratio_std_error: f64,
    pub truncated: bool,
}

impl BlockingSums {
    pub fn ratio(&self) -> f64 {
        self.numerator / self.denominator
    }

    pub fn terms_used(&self) -> usize {
        self.tail_terms.len()
    }
}

struct PathBatch {
    rng: StreamRng,
    /// Current partial sum per path; `INFINITY` once the tail has hit zero.
    partial: Vec<f64>,
    numerator: f64,
    tail_sum: f64,
}

impl PathBatch {
    /// Advance every live path by one interarrival; returns the batch sums of
    /// `A_k F̄(A_k)` and `F̄(A_k)`.
    fn step(&mut self, arrivals: &Sampler, service: &DistributionSpec) -> (f64, f64) {
        let mut weighted = 0.0;
        let mut tail = 0.0;
        for a in self.partial.iter_mut() {
            if a.is_infinite() {
                continue;
            }
            *a += arrivals.sample(&mut self.rng);
            let f = service.tail(*a);
            if f == 0.0 {
                *a = f64::INFINITY;
            } else {
                weighted += *a * f;
                tail += f;
            }
        }
        let n = self.partial.len() as f64;
        self.numerator += weighted / n;
        self.tail_sum += tail / n;
        (weighted, tail)
    }
}

/// Monte Carlo estimate of the two sums in the general blocking formula.
///
/// Paths are split into fixed batches, each on its own stream, and advanced
/// one term at a time; batch results are reduced in batch order so the
/// output does not depend on the thread count.
pub fn blocking_sums(
    y: &DistributionSpec,
    s: &DistributionSpec,
    mc: &MonteCarloConfig,
    truncation: Truncation,
) -> Result<BlockingSums> {
    check_interarrival(y)?;
    s.validate()?;
    mc.validate()?;
    let k_limit = match truncation {
        Truncation::Adaptive => mc.k_max,
        Truncation::Fixed(k) if k >= 1 => k,
        Truncation::Fixed(_) => return Err(AoiError::invalid("forced truncation needs k >= 1")),
    };

    let arrivals = y.sampler();
    let mut batches: Vec<PathBatch> = batch_sizes(mc.samples)
        .into_iter()
        .enumerate()
        .map(|(b, n)| PathBatch {
            rng: domain_rng(mc.seed, Domain::BlockingArrivals, b as u64),
            partial: vec![0.0; n],
            numerator: 0.0,
            tail_sum: 0.0,
        })
        .collect();
    let total = mc.samples as f64;

    let mut tail_terms = Vec::new();
    let mut weighted_terms = Vec::new();
    let mut numerator = 0.0;
    let mut tail_total = 0.0;
    let mut converged = false;

    for k in 1..=k_limit {
        let per_batch: Vec<(f64, f64)> = batches
            .par_iter_mut()
            .map(|b| b.step(&arrivals, s))
            .collect();
        let (w, t) = per_batch
            .iter()
            .fold((0.0, 0.0), |(w, t), &(bw, bt)| (w + bw, t + bt));
        let weighted_term = w / total;
        let tail_term = t / total;
        weighted_terms.push(weighted_term);
        tail_terms.push(tail_term);
        numerator += weighted_term;
        tail_total += tail_term;

        if truncation == Truncation::Adaptive
            && k >= mc.k_min
            && weighted_term <= mc.tail_tol * numerator
        {
            converged = true;
            break;
        }
    }

    let numerators: Vec<f64> = batches.iter().map(|b| b.numerator).collect();
    let denominators: Vec<f64> = batches.iter().map(|b| 1.0 + b.tail_sum).collect();
    let ratios: Vec<f64> = numerators
        .iter()
        .zip(&denominators)
        .map(|(n, d)| n / d)
        .collect();

    Ok(BlockingSums {
        tail_terms,
        weighted_terms,
        numerator,
        denominator: 1.0 + tail_total,
        numerator_std_error: batch_std_error(&numerators),
        denominator_std_error: batch_std_error(&denominators),
        ratio_std_error: batch_std_error(&ratios),
        truncated: truncation == Truncation::Adaptive && !converged,
    })
}

/// General G/G/1/1 blocking age by truncated Monte Carlo sums.
pub fn age_gg_blocking(
    y: &DistributionSpec,
    s: &DistributionSpec,
    mc: &MonteCarloConfig,
) -> Result<AgeEstimate> {
    age_gg_blocking_truncated(y, s, mc, Truncation::Adaptive)
}

pub fn age_gg_blocking_truncated(
    y: &DistributionSpec,
    s: &DistributionSpec,
    mc: &MonteCarloConfig,
    truncation: Truncation,
) -> Result<AgeEstimate> {
    let sums = blocking_sums(y, s, mc, truncation)?;
    let age = renewal_process_age(y)? + sums.ratio() + s.mean();
    let mut est = AgeEstimate::monte_carlo(age, sums.ratio_std_error);
    est.method = Method::TruncatedMc;
    est.terms_used = sums.terms_used();
    est.flags.truncated = sums.truncated;
    Ok(est)
}

/// Mean number of arrivals per effective interarrival cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedK {
    pub value: f64,
    pub std_error: f64,
    pub method: Method,
    pub terms_used: usize,
    pub truncated: bool,
}

/// `E[K] = 1 + Σ_k E[F̄_S(A_k)]`.
///
/// Exponential service gives the geometric mean `1 / (1 - E[e^{-μY}])`;
/// exponential arrivals give `(E[Y] + E[S]) / E[Y]`. Otherwise the truncated
/// Monte Carlo sum is used.
pub fn expected_k_blocking(
    y: &DistributionSpec,
    s: &DistributionSpec,
    mc: &MonteCarloConfig,
) -> Result<ExpectedK> {
    check_interarrival(y)?;
    s.validate()?;
    let closed = |value| ExpectedK {
        value,
        std_error: 0.0,
        method: Method::ClosedForm,
        terms_used: 0,
        truncated: false,
    };
    if let Some(mu) = s.exponential_rate() {
        return Ok(closed(1.0 / (1.0 - y.laplace(mu)?)));
    }
    if y.exponential_rate().is_some() {
        return Ok(closed((y.mean() + s.mean()) / y.mean()));
    }
    let sums = blocking_sums(y, s, mc, Truncation::Adaptive)?;
    Ok(ExpectedK {
        value: sums.denominator,
        std_error: sums.denominator_std_error,
        method: Method::TruncatedMc,
        terms_used: sums.terms_used(),
        truncated: sums.truncated,
    })
}

/// G/M/1/1 blocking age with exponential service of rate `mu`.
pub fn age_gm_blocking(y: &DistributionSpec, mu: f64) -> Result<AgeEstimate> {
    check_interarrival(y)?;
    check_rate("service rate", mu)?;
    let middle = y.weighted_laplace(mu)? / (1.0 - y.laplace(mu)?);
    Ok(AgeEstimate::closed_form(
        renewal_process_age(y)? + middle + 1.0 / mu,
    ))
}

/// Equivalent G/M/1/1 form `E[Y²]/(2E[Y]) + 2E[S] - E[S | S < Y]` with the
/// conditional mean estimated from sampled `(S, Y)` pairs.
pub fn age_gm_blocking_equiv(
    y: &DistributionSpec,
    mu: f64,
    mc: &MonteCarloConfig,
) -> Result<AgeEstimate> {
    check_interarrival(y)?;
    check_rate("service rate", mu)?;
    let s = DistributionSpec::exponential(mu)?;
    let pairs = crate::preemption::pair_sums(y, &s, mc)?;
    let (served, se) = pairs.mean_success_service()?;
    let age = renewal_process_age(y)? + 2.0 / mu - served;
    Ok(AgeEstimate::monte_carlo(age, se))
}

/// M/G/1/1 blocking age with exponential arrivals of rate `lambda`.
pub fn age_mg_blocking(lambda: f64, s: &DistributionSpec) -> Result<AgeEstimate> {
    check_rate("arrival rate", lambda)?;
    s.validate()?;
    let es = s.mean();
    Ok(AgeEstimate::closed_form(
        1.0 / lambda + lambda * s.second_moment() / (2.0 * (1.0 + lambda * es)) + es,
    ))
}

/// Upper bound `E[Y²]/(2E[Y]) + E[S²]/(2 E[K] E[Y]) + E[S]` for log-concave arrivals.
pub fn bound_lcg_blocking(
    y: &DistributionSpec,
    s: &DistributionSpec,
    mc: &MonteCarloConfig,
) -> Result<AgeEstimate> {
    let k = expected_k_blocking(y, s, mc)?;
    let scale = s.second_moment() / (2.0 * y.mean());
    let age = renewal_process_age(y)? + scale / k.value + s.mean();
    let mut est = AgeEstimate::closed_form(age);
    est.method = k.method;
    est.std_error = scale * k.std_error / (k.value * k.value);
    est.terms_used = k.terms_used;
    est.flags.truncated = k.truncated;
    Ok(est.not_guaranteed_if(!y.is_log_concave()))
}

/// Upper bound for log-concave arrivals and exponential service.
pub fn bound_lcm_blocking(y: &DistributionSpec, mu: f64) -> Result<AgeEstimate> {
    check_interarrival(y)?;
    check_rate("service rate", mu)?;
    let age = renewal_process_age(y)? + (1.0 - y.laplace(mu)?) / (mu * mu * y.mean()) + 1.0 / mu;
    Ok(AgeEstimate::closed_form(age).not_guaranteed_if(!y.is_log_concave()))
}

/// Decoupled bound: age of the arrival process plus age of the service
/// process plus the mean service time.
pub fn bound_lcg_decoupled(y: &DistributionSpec, s: &DistributionSpec) -> Result<AgeEstimate> {
    check_interarrival(y)?;
    s.validate()?;
    if !(s.mean() > 0.0) {
        return Err(AoiError::domain("decoupled bound needs E[S] > 0"));
    }
    let age = renewal_process_age(y)? + renewal_process_age(s)? + s.mean();
    Ok(AgeEstimate::closed_form(age).not_guaranteed_if(!y.is_log_concave()))
}

/// M/G/1/1 age with exponential arrivals of the same mean; bounds the age
/// when both arrivals and service are log-concave.
pub fn bound_mlc_blocking(y: &DistributionSpec, s: &DistributionSpec) -> Result<AgeEstimate> {
    check_interarrival(y)?;
    let est = age_mg_blocking(1.0 / y.mean(), s)?;
    Ok(est.not_guaranteed_if(!(y.is_log_concave() && s.is_log_concave())))
}
