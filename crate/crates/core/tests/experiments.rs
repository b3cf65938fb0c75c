use aoi_core::experiments::*;
use aoi_core::{AoiError, Discipline, DistributionSpec, MonteCarloConfig, QueueModel, SimConfig};

fn exp(rate: f64) -> DistributionSpec {
    DistributionSpec::exponential(rate).unwrap()
}
fn gamma(shape: f64, rate: f64) -> DistributionSpec {
    DistributionSpec::gamma(shape, rate).unwrap()
}
fn det(value: f64) -> DistributionSpec {
    DistributionSpec::deterministic(value).unwrap()
}

fn sweep(
    discipline: Discipline,
    y: DistributionSpec,
    s: DistributionSpec,
    axis: &str,
    evaluators: &[Evaluator],
) -> SweepSpec {
    SweepSpec {
        discipline,
        arrival: y,
        service: s,
        axes: vec![axis.parse().unwrap()],
        evaluators: evaluators.to_vec(),
        mc: MonteCarloConfig::default().with_samples(200_000),
        sim: SimConfig::default().with_cycles(20_000),
    }
}

#[test]
fn blocking_age_grows_with_arrival_shape() {
    let spec = sweep(
        Discipline::Blocking,
        gamma(1.0, 2.0),
        exp(2.0),
        "arrival.shape=1,2,4",
        &[Evaluator::Exact],
    );
    let ages = run_sweep(&spec).unwrap().column(Evaluator::Exact);
    assert!(ages.windows(2).all(|w| w[1] > w[0]), "{ages:?}");
}

#[test]
fn preemption_sweep_column_is_not_monotone() {
    let spec = sweep(
        Discipline::Preemption,
        exp(1.0),
        gamma(2.0, 2.0),
        "arrival.rate=0.5,1,2,4,8,16",
        &[Evaluator::Exact, Evaluator::BoundPreemption],
    );
    let table = run_sweep(&spec).unwrap();
    let ages = table.column(Evaluator::Exact);
    let decreasing = ages.windows(2).all(|w| w[1] < w[0]);
    let increasing = ages.windows(2).all(|w| w[1] > w[0]);
    assert!(!decreasing && !increasing, "{ages:?}");
    for (a, b) in ages.iter().zip(table.column(Evaluator::BoundPreemption)) {
        assert!(b >= a - 1e-9);
    }
}

#[test]
fn sweep_output_is_independent_of_thread_count() {
    let spec = sweep(
        Discipline::Blocking,
        gamma(2.0, 2.0),
        gamma(2.0, 2.0),
        "service.rate=1,2,4",
        &[Evaluator::Exact, Evaluator::BoundLcg, Evaluator::Simulation],
    );
    let wide = run_sweep(&spec).unwrap().to_csv();
    let narrow = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_sweep(&spec).unwrap().to_csv());
    assert_eq!(wide, narrow);
}

#[test]
fn bound_rows_on_non_log_concave_input_are_flagged() {
    let spec = sweep(
        Discipline::Blocking,
        gamma(0.5, 1.0),
        det(0.5),
        "arrival.rate=0.5,1",
        &[Evaluator::BoundLcg, Evaluator::BoundMlc],
    );
    let table = run_sweep(&spec).unwrap();
    assert!(table
        .rows
        .iter()
        .all(|r| r.estimate.flags.bound_not_guaranteed));
    assert!(table.to_csv().contains("bound-not-guaranteed"));
}

fn gm_comparison(means: Vec<f64>) -> ComparisonSpec {
    ComparisonSpec {
        discipline: Discipline::Blocking,
        side: Side::Arrival,
        fixed: exp(2.0),
        candidates: vec![det(1.0), gamma(2.0, 1.0), exp(1.0)],
        means,
        evaluator: Evaluator::Exact,
        mc: MonteCarloConfig::default(),
        sim: SimConfig::default(),
    }
}

#[test]
fn deterministic_arrivals_minimise_blocking_age() {
    let table = compare_at_fixed_mean(&gm_comparison(vec![0.2, 0.5, 1.0, 3.0])).unwrap();
    for p in &table.points {
        assert_eq!(p.argmin_family(), "det");
        assert_eq!(p.argmax_log_concave_family().as_deref(), Some("exp"));
    }
}

#[test]
fn comparison_ranking_survives_rescaling() {
    let base = compare_at_fixed_mean(&gm_comparison(vec![0.2, 3.0])).unwrap();
    let mut scaled = gm_comparison(vec![0.2 * 5.0, 3.0 * 5.0]);
    scaled.fixed = scaled.fixed.scaled(5.0).unwrap();
    let scaled = compare_at_fixed_mean(&scaled).unwrap();
    for (a, b) in base.points.iter().zip(&scaled.points) {
        assert_eq!(a.argmin, b.argmin);
        assert_eq!(a.argmax_log_concave, b.argmax_log_concave);
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert!((y.estimate.age - 5.0 * x.estimate.age).abs() < 1e-9 * y.estimate.age);
        }
    }
}

#[test]
fn preemption_optimum_switches_with_mean() {
    let spec = ComparisonSpec {
        discipline: Discipline::Preemption,
        side: Side::Arrival,
        fixed: gamma(2.0, 2.0),
        candidates: vec![det(1.0), exp(1.0)],
        means: vec![0.1, 0.3, 1.0, 3.0],
        evaluator: Evaluator::Exact,
        mc: MonteCarloConfig::default().with_samples(200_000),
        sim: SimConfig::default(),
    };
    let table = compare_at_fixed_mean(&spec).unwrap();
    let winners: Vec<String> = table.points.iter().map(|p| p.argmin_family()).collect();
    assert_eq!(winners.first().map(String::as_str), Some("exp"));
    assert_eq!(winners.last().map(String::as_str), Some("det"));
}

#[test]
fn mismatched_evaluator_in_comparison_is_rejected() {
    let mut spec = gm_comparison(vec![1.0]);
    spec.evaluator = Evaluator::ExponentialArrivals;
    assert!(matches!(
        compare_at_fixed_mean(&spec),
        Err(AoiError::Config(_))
    ));
}

#[test]
fn five_terms_suffice_with_equal_means() {
    let g = gamma(2.0, 2.0);
    let report = truncation_report(
        &g,
        &g,
        &[1, 2, 3, 5, 10],
        &MonteCarloConfig::default().with_samples(200_000),
    )
    .unwrap();
    assert!(report.row(5).unwrap().rel_error.abs() < 0.005);
}

#[test]
fn shorter_service_converges_faster() {
    let mc = MonteCarloConfig::default().with_samples(100_000);
    let ks: Vec<usize> = (1..=10).collect();
    let first_within = |s: DistributionSpec| {
        let report = truncation_report(&gamma(2.0, 2.0), &s, &ks, &mc).unwrap();
        report
            .rows
            .iter()
            .find(|r| r.rel_error.abs() < 0.005)
            .map(|r| r.k)
            .unwrap()
    };
    let equal = first_within(gamma(2.0, 2.0));
    let half = first_within(gamma(2.0, 4.0));
    assert!(half < equal, "half {half}, equal {equal}");
}

#[test]
fn single_term_misses_the_memoryless_value() {
    let e = exp(1.0);
    let report = truncation_report(&e, &e, &[1], &MonteCarloConfig::default()).unwrap();
    let one = report.row(1).unwrap();
    // With one term the sums are E[A_1 e^{-A_1}] / (1 + E[e^{-A_1}]) = 1/6.
    assert!((one.estimate.age - 13.0 / 6.0).abs() < 5.0 * one.estimate.std_error + 1e-3);
    assert!((report.reference.age - 2.5).abs() < 0.01);
    assert!(one.rel_error < -0.1);
}

#[test]
fn validation_examples() {
    let mc = MonteCarloConfig::default().with_samples(200_000);
    let sim = SimConfig::default().with_cycles(200_000);
    let cases = [
        (QueueModel::blocking(exp(1.0), exp(1.0)).unwrap(), 2.5),
        (QueueModel::blocking(det(1.0), exp(1.0)).unwrap(), 2.08198),
        (
            QueueModel::preemption(exp(1.0), det(std::f64::consts::LN_2)).unwrap(),
            2.0,
        ),
    ];
    for (model, value) in cases {
        let report = validate(&model, &mc, &sim).unwrap();
        assert!(report.passed, "{model}\n{}", report.to_csv());
        for row in report.rows.iter().filter(|r| r.evaluator.is_exact()) {
            let tol = 4.0 * row.estimate.std_error + 2e-5 * value;
            assert!(
                (row.estimate.age - value).abs() < tol,
                "{model}: {:?} {}",
                row.evaluator,
                row.estimate.age
            );
        }
    }
}
