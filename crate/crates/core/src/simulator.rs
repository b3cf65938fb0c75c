//! Discrete-event simulation of the G/G/1/1 age process.
//!
//! Two event kinds drive a single server: arrivals and departures. Event
//! times are kept relative to the latest service start, so comparisons
//! between a departure and the next arrival involve the same partial sums
//! the analytic evaluators use. A departure scheduled at the same instant as
//! an arrival is processed first.
//!
//! A cycle runs from one successful update's arrival to the next. Its area
//! is the two-triangle piece `((G + S')² - S'²) / 2`, where `S'` is the
//! service time of the update that closes the cycle; the time-average age
//! is `Σ area / Σ G` over complete cycles.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AoiError, Result};
use crate::estimate::{batch_std_error, AgeEstimate, Method, BATCHES};
use crate::model::{Discipline, QueueModel};
use crate::rng::{domain_rng, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Complete cycles per replication.
    pub cycles: u64,
    pub seed: u64,
    pub replications: usize,
    /// Arrival plus departure events allowed per replication.
    pub max_events: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            cycles: 100_000,
            seed: 0x5eed,
            replications: 1,
            max_events: 1_000_000_000,
        }
    }
}

impl SimConfig {
    pub fn with_cycles(self, cycles: u64) -> Self {
        Self { cycles, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cycles < 100 {
            return Err(AoiError::invalid(format!(
                "cycles must be >= 100, got {}",
                self.cycles
            )));
        }
        if self.replications < 1 {
            return Err(AoiError::invalid("replications must be >= 1"));
        }
        Ok(())
    }
}

/// One effective interarrival cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    /// `G`, time between consecutive successful arrivals.
    pub effective_interarrival: f64,
    /// Service time of the successful update that closes the cycle.
    pub completed_service: f64,
    /// `K`, arrivals in the cycle including the closing one.
    pub num_arrivals: u64,
    /// `W`, idle time: `G - S` under blocking, `Y_1 - S̃` under preemption.
    pub idle: f64,
    pub area: f64,
}

impl CycleRecord {
    fn new(g: f64, closing_service: f64, k: u64, idle: f64) -> Self {
        Self {
            effective_interarrival: g,
            completed_service: closing_service,
            num_arrivals: k,
            idle,
            area: g * (0.5 * g + closing_service),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    Arrival,
    Departure,
}

/// Runs one replication, handing each complete cycle to `sink`.
fn run_replication(
    model: &QueueModel,
    cfg: &SimConfig,
    replication: u64,
    mut sink: impl FnMut(CycleRecord),
) -> Result<()> {
    let arrivals = model.interarrival.sampler();
    let services = model.service.sampler();
    let mut y_rng = domain_rng(cfg.seed, Domain::SimArrivals, replication);
    let mut s_rng = domain_rng(cfg.seed, Domain::SimServices, replication);

    // Times are relative to the latest service start.
    let mut next_arrival = arrivals.sample(&mut y_rng);
    let mut departure: Option<f64> = None;
    let mut in_service = 0.0;

    let mut have_success = false;
    let mut previous_service = 0.0;
    let mut arrivals_in_cycle: u64 = 0;
    let mut elapsed_in_cycle = 0.0; // preemption only
    let mut first_interarrival = 0.0; // preemption only

    let mut completed: u64 = 0;
    let mut events: u64 = 0;

    while completed < cfg.cycles {
        events += 1;
        if events > cfg.max_events {
            return Err(AoiError::PartialResult {
                completed,
                requested: cfg.cycles,
            });
        }
        let event = match departure {
            Some(d) if d <= next_arrival => Event::Departure,
            _ => Event::Arrival,
        };

        match (model.discipline, event) {
            (Discipline::Blocking, Event::Departure) => departure = None,
            (Discipline::Blocking, Event::Arrival) => {
                let now = next_arrival;
                arrivals_in_cycle += 1;
                if departure.is_some() {
                    // Blocked: the server keeps its update.
                    next_arrival = now + arrivals.sample(&mut y_rng);
                    continue;
                }
                let service = services.sample(&mut s_rng);
                if have_success {
                    sink(CycleRecord::new(
                        now,
                        service,
                        arrivals_in_cycle,
                        now - previous_service,
                    ));
                    completed += 1;
                }
                have_success = true;
                previous_service = service;
                arrivals_in_cycle = 0;
                departure = Some(service);
                next_arrival = arrivals.sample(&mut y_rng);
            }
            (Discipline::Preemption, Event::Arrival) => {
                let now = next_arrival;
                arrivals_in_cycle += 1;
                elapsed_in_cycle += now;
                if arrivals_in_cycle == 1 {
                    first_interarrival = now;
                }
                // Any update still in service is terminated.
                in_service = services.sample(&mut s_rng);
                departure = Some(in_service);
                next_arrival = arrivals.sample(&mut y_rng);
            }
            (Discipline::Preemption, Event::Departure) => {
                if have_success {
                    sink(CycleRecord::new(
                        elapsed_in_cycle,
                        in_service,
                        arrivals_in_cycle,
                        first_interarrival - previous_service,
                    ));
                    completed += 1;
                }
                have_success = true;
                previous_service = in_service;
                arrivals_in_cycle = 0;
                elapsed_in_cycle = 0.0;
                departure = None;
            }
        }
    }
    Ok(())
}

/// All cycle records of one replication.
pub fn simulate_records(
    model: &QueueModel,
    cfg: &SimConfig,
    replication: u64,
) -> Result<Vec<CycleRecord>> {
    model.validate()?;
    cfg.validate()?;
    let mut records = Vec::with_capacity(cfg.cycles as usize);
    run_replication(model, cfg, replication, |r| records.push(r))?;
    Ok(records)
}

#[derive(Debug, Clone, Copy, Default)]
struct CycleBatch {
    cycles: f64,
    area: f64,
    g: f64,
    g_sq: f64,
    k: f64,
    w: f64,
}

impl CycleBatch {
    fn add(&mut self, r: &CycleRecord) {
        self.cycles += 1.0;
        self.area += r.area;
        self.g += r.effective_interarrival;
        self.g_sq += r.effective_interarrival * r.effective_interarrival;
        self.k += r.num_arrivals as f64;
        self.w += r.idle;
    }

    fn merge(mut self, o: &CycleBatch) -> Self {
        self.cycles += o.cycles;
        self.area += o.area;
        self.g += o.g;
        self.g_sq += o.g_sq;
        self.k += o.k;
        self.w += o.w;
        self
    }
}

fn batched_replication(
    model: &QueueModel,
    cfg: &SimConfig,
    replication: u64,
) -> Result<Vec<CycleBatch>> {
    let mut batches = vec![CycleBatch::default(); BATCHES];
    let mut index: u64 = 0;
    run_replication(model, cfg, replication, |r| {
        let b = (index * BATCHES as u64 / cfg.cycles) as usize;
        batches[b].add(&r);
        index += 1;
    })?;
    Ok(batches)
}

fn all_replications(model: &QueueModel, cfg: &SimConfig) -> Result<Vec<Vec<CycleBatch>>> {
    model.validate()?;
    cfg.validate()?;
    (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| batched_replication(model, cfg, r))
        .collect()
}

/// Time-average age by renewal-reward over complete cycles.
///
/// Each replication contributes `Σ area / Σ G` with a 32-batch standard
/// error; replications are averaged in index order.
pub fn simulate_age(model: &QueueModel, cfg: &SimConfig) -> Result<AgeEstimate> {
    let reps = all_replications(model, cfg)?;
    let r = reps.len() as f64;
    let mut age = 0.0;
    let mut var = 0.0;
    let mut p_success = 0.0;
    for batches in &reps {
        let pooled = batches
            .iter()
            .fold(CycleBatch::default(), |a, b| a.merge(b));
        age += pooled.area / pooled.g;
        let ratios: Vec<f64> = batches.iter().map(|b| b.area / b.g).collect();
        var += batch_std_error(&ratios).powi(2);
        p_success += pooled.cycles / pooled.k;
    }
    let mut est = AgeEstimate::monte_carlo(age / r, var.sqrt() / r);
    est.method = Method::Simulation;
    if model.discipline == Discipline::Preemption {
        est.p_success = Some(p_success / r);
    }
    Ok(est)
}

/// Empirical cycle moments pooled over all replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleSummary {
    pub cycles: u64,
    pub mean_g: f64,
    pub mean_g_sq: f64,
    pub mean_k: f64,
    pub mean_w: f64,
    pub mean_k_std_error: f64,
    /// `mean_g - mean_k E[Y]`, zero in expectation by Wald's identity.
    pub wald_gap: f64,
    pub wald_gap_std_error: f64,
}

pub fn cycle_statistics(model: &QueueModel, cfg: &SimConfig) -> Result<CycleSummary> {
    let reps = all_replications(model, cfg)?;
    let mean_y = model.interarrival.mean();
    let batches: Vec<CycleBatch> = reps.into_iter().flatten().collect();
    let pooled = batches
        .iter()
        .fold(CycleBatch::default(), |a, b| a.merge(b));
    let n = pooled.cycles;
    let k_means: Vec<f64> = batches.iter().map(|b| b.k / b.cycles).collect();
    let gaps: Vec<f64> = batches
        .iter()
        .map(|b| (b.g - mean_y * b.k) / b.cycles)
        .collect();
    Ok(CycleSummary {
        cycles: n as u64,
        mean_g: pooled.g / n,
        mean_g_sq: pooled.g_sq / n,
        mean_k: pooled.k / n,
        mean_w: pooled.w / n,
        mean_k_std_error: batch_std_error(&k_means),
        wald_gap: (pooled.g - mean_y * pooled.k) / n,
        wald_gap_std_error: batch_std_error(&gaps),
    })
}

/// Writes records as CSV with header `cycle,G,K,W,area`.
pub fn write_cycle_csv<W: Write>(records: &[CycleRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "cycle,G,K,W,area")?;
    for (i, r) in records.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{}",
            i + 1,
            crate::format::sig(r.effective_interarrival),
            r.num_arrivals,
            crate::format::sig(r.idle),
            crate::format::sig(r.area)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;

    fn exp(rate: f64) -> DistributionSpec {
        DistributionSpec::exponential(rate).unwrap()
    }
    fn det(value: f64) -> DistributionSpec {
        DistributionSpec::deterministic(value).unwrap()
    }

    #[test]
    fn deterministic_blocking_cycle_is_exact() {
        let model = QueueModel::blocking(det(1.0), det(0.5)).unwrap();
        let cfg = SimConfig::default().with_cycles(100);
        let recs = simulate_records(&model, &cfg, 0).unwrap();
        let r = recs[0];
        assert_eq!(
            (r.effective_interarrival, r.num_arrivals, r.idle, r.area),
            (1.0, 1, 0.5, 1.0)
        );
        let est = simulate_age(&model, &cfg).unwrap();
        assert_eq!(est.age, 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn simultaneous_departure_precedes_arrival() {
        // Service equals the interarrival: every arrival finds the server free.
        let blocking = QueueModel::blocking(det(1.0), det(1.0)).unwrap();
        let recs = simulate_records(&blocking, &SimConfig::default().with_cycles(100), 0).unwrap();
        assert!(recs
            .iter()
            .all(|r| r.num_arrivals == 1 && r.effective_interarrival == 1.0));
        let preempt = QueueModel::preemption(det(1.0), det(1.0)).unwrap();
        let est = simulate_age(&preempt, &SimConfig::default().with_cycles(100)).unwrap();
        assert_eq!(est.age, 1.5);
        assert_eq!(est.p_success, Some(1.0));
    }

    #[test]
    fn blocking_skips_arrivals_during_service() {
        let model = QueueModel::blocking(det(1.0), det(2.5)).unwrap();
        let recs = simulate_records(&model, &SimConfig::default().with_cycles(100), 0).unwrap();
        for r in recs {
            assert_eq!(r.num_arrivals, 3);
            assert_eq!(r.effective_interarrival, 3.0);
            assert_eq!(r.idle, 0.5);
        }
    }

    #[test]
    fn overloaded_preemption_returns_partial_result() {
        let model = QueueModel::preemption(exp(1.0), det(30.0)).unwrap();
        let cfg = SimConfig {
            cycles: 1_000,
            max_events: 10_000,
            ..Default::default()
        };
        match simulate_age(&model, &cfg) {
            Err(AoiError::PartialResult {
                completed,
                requested,
            }) => {
                assert!(completed < requested);
                assert_eq!(requested, 1_000);
            }
            other => panic!("expected partial result, got {other:?}"),
        }
    }

    #[test]
    fn identical_inputs_are_bit_identical() {
        let model = QueueModel::preemption(exp(1.3), exp(0.7)).unwrap();
        let cfg = SimConfig {
            cycles: 5_000,
            replications: 3,
            ..Default::default()
        };
        assert_eq!(
            simulate_age(&model, &cfg).unwrap(),
            simulate_age(&model, &cfg).unwrap()
        );
        let other = simulate_age(&model, &cfg.with_seed(1)).unwrap();
        assert_ne!(other.age, simulate_age(&model, &cfg).unwrap().age);
    }

    #[test]
    fn renewal_reward_bookkeepings_agree() {
        for model in [
            QueueModel::blocking(exp(1.0), exp(0.8)).unwrap(),
            QueueModel::preemption(exp(1.0), exp(2.0)).unwrap(),
        ] {
            let recs =
                simulate_records(&model, &SimConfig::default().with_cycles(20_000), 0).unwrap();
            let n = recs.len() as f64;
            let sum_area: f64 = recs.iter().map(|r| r.area).sum();
            let sum_g: f64 = recs.iter().map(|r| r.effective_interarrival).sum();
            let mean_g = sum_g / n;
            let mean_gs_sq = recs
                .iter()
                .map(|r| (r.effective_interarrival + r.completed_service).powi(2))
                .sum::<f64>()
                / n;
            let mean_s_sq = recs
                .iter()
                .map(|r| r.completed_service.powi(2))
                .sum::<f64>()
                / n;
            let a = sum_area / sum_g;
            let b = (mean_gs_sq - mean_s_sq) / (2.0 * mean_g);
            assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn csv_dump_has_fixed_header() {
        let model = QueueModel::blocking(det(1.0), det(0.5)).unwrap();
        let recs = simulate_records(&model, &SimConfig::default().with_cycles(100), 0).unwrap();
        let mut buf = Vec::new();
        write_cycle_csv(&recs[..2], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "cycle,G,K,W,area\n1,1,1,0.5,1\n2,1,1,0.5,1\n"
        );
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().with_cycles(99).validate().is_err());
        assert!(SimConfig {
            replications: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
