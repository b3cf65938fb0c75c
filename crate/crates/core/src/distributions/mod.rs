//! Parametric nonnegative distributions.
//!
//! Each family exposes its first two moments, tail function, Laplace
//! transform `E[e^{-sX}]` and the weighted transform `E[X e^{-sX}]` in closed
//! form, plus a sampler for Monte Carlo paths.

mod parse;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma as GammaDist};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::gamma::gamma_ur;

use crate::error::{AoiError, Result};
use crate::rng::{stream_rng, StreamRng};

/// Largest integer gamma shape whose tail is evaluated by the finite Erlang sum.
const ERLANG_SUM_MAX_SHAPE: f64 = 64.0;

/// Below this value of `s (hi - lo)` the uniform transform uses its Taylor series.
const UNIFORM_SERIES_CUTOFF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    Exponential {
        rate: f64,
    },
    Gamma {
        shape: f64,
        rate: f64,
    },
    /// Point mass. `value = 0` is accepted as a zero-length service.
    Deterministic {
        value: f64,
    },
    Uniform {
        lower: f64,
        upper: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Exponential,
    Gamma,
    Deterministic,
    Uniform,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Exponential => "exp",
            Family::Gamma => "gamma",
            Family::Deterministic => "det",
            Family::Uniform => "uniform",
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(AoiError::invalid(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(AoiError::invalid(format!(
            "{name} must be finite and >= 0, got {v}"
        )))
    }
}

impl DistributionSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Self::Gamma { shape, rate }.validated()
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        Self::Deterministic { value }.validated()
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        Self::Uniform { lower, upper }.validated()
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Exponential { rate } => positive("exponential rate", rate),
            Self::Gamma { shape, rate } => {
                positive("gamma shape", shape)?;
                positive("gamma rate", rate)
            }
            Self::Deterministic { value } => nonnegative("deterministic value", value),
            Self::Uniform { lower, upper } => {
                nonnegative("uniform lo", lower)?;
                if upper.is_finite() && upper > lower {
                    Ok(())
                } else {
                    Err(AoiError::invalid(format!(
                        "uniform requires lo < hi, got lo={lower} hi={upper}"
                    )))
                }
            }
        }
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn family(&self) -> Family {
        match self {
            Self::Exponential { .. } => Family::Exponential,
            Self::Gamma { .. } => Family::Gamma,
            Self::Deterministic { .. } => Family::Deterministic,
            Self::Uniform { .. } => Family::Uniform,
        }
    }

    /// Rate of the distribution if it is exponential (including gamma with shape 1).
    pub fn exponential_rate(&self) -> Option<f64> {
        match *self {
            Self::Exponential { rate } => Some(rate),
            Self::Gamma { shape: 1.0, rate } => Some(rate),
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Gamma { shape, rate } => shape / rate,
            Self::Deterministic { value } => value,
            Self::Uniform { lower, upper } => 0.5 * (lower + upper),
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 2.0 / (rate * rate),
            Self::Gamma { shape, rate } => shape * (shape + 1.0) / (rate * rate),
            Self::Deterministic { value } => value * value,
            Self::Uniform { lower, upper } => (lower * lower + lower * upper + upper * upper) / 3.0,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / (rate * rate),
            Self::Gamma { shape, rate } => shape / (rate * rate),
            Self::Deterministic { .. } => 0.0,
            Self::Uniform { lower, upper } => (upper - lower).powi(2) / 12.0,
        }
    }

    /// Raw moment `E[X^order]` for `order` in {1, 2}.
    pub fn moment(&self, order: u32) -> Result<f64> {
        match order {
            1 => Ok(self.mean()),
            2 => Ok(self.second_moment()),
            _ => Err(AoiError::invalid(format!(
                "moment order must be 1 or 2, got {order}"
            ))),
        }
    }

    /// `Pr(X > x)` with a right-continuous cdf.
    pub fn ccdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(AoiError::invalid(format!(
                "ccdf argument must be >= 0, got {x}"
            )));
        }
        Ok(self.tail(x))
    }

    /// Unchecked tail function for hot loops; `x` must be nonnegative.
    pub(crate) fn tail(&self, x: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => (-rate * x).exp(),
            Self::Gamma { shape, rate } => gamma_tail(shape, rate * x),
            Self::Deterministic { value } => {
                if x < value {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Uniform { lower, upper } => {
                if x < lower {
                    1.0
                } else if x >= upper {
                    0.0
                } else {
                    (upper - x) / (upper - lower)
                }
            }
        }
    }

    /// `E[e^{-sX}]`.
    pub fn laplace(&self, s: f64) -> Result<f64> {
        check_transform_arg(s)?;
        Ok(match *self {
            Self::Exponential { rate } => rate / (rate + s),
            Self::Gamma { shape, rate } => (rate / (rate + s)).powf(shape),
            Self::Deterministic { value } => (-s * value).exp(),
            Self::Uniform { lower, upper } => {
                let z = s * (upper - lower);
                (-s * lower).exp() * phi1(z)
            }
        })
    }

    /// `E[X e^{-sX}] = -d/ds E[e^{-sX}]`.
    pub fn weighted_laplace(&self, s: f64) -> Result<f64> {
        check_transform_arg(s)?;
        Ok(match *self {
            Self::Exponential { rate } => rate / ((rate + s) * (rate + s)),
            Self::Gamma { shape, rate } => shape / (rate + s) * (rate / (rate + s)).powf(shape),
            Self::Deterministic { value } => value * (-s * value).exp(),
            Self::Uniform { lower, upper } => {
                let width = upper - lower;
                let z = s * width;
                (-s * lower).exp() * (lower * phi1(z) + width * phi2(z))
            }
        })
    }

    /// Gamma counts as log-concave for shape >= 1; the other families always are.
    pub fn is_log_concave(&self) -> bool {
        match *self {
            Self::Gamma { shape, .. } => shape >= 1.0,
            _ => true,
        }
    }

    /// Distribution of `c X`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        positive("scale factor", c)?;
        match *self {
            Self::Exponential { rate } => Self::exponential(rate / c),
            Self::Gamma { shape, rate } => Self::gamma(shape, rate / c),
            Self::Deterministic { value } => Self::deterministic(value * c),
            Self::Uniform { lower, upper } => Self::uniform(lower * c, upper * c),
        }
    }

    /// Same family re-parameterized to the given mean.
    ///
    /// Gamma keeps its shape; uniform keeps its `lo/hi` ratio.
    pub fn with_mean(&self, mean: f64) -> Result<Self> {
        positive("target mean", mean)?;
        match *self {
            Self::Exponential { .. } => Self::exponential(1.0 / mean),
            Self::Gamma { shape, .. } => Self::gamma(shape, shape / mean),
            Self::Deterministic { .. } => Self::deterministic(mean),
            Self::Uniform { lower, upper } => {
                let c = mean / self.mean();
                Self::uniform(lower * c, upper * c)
            }
        }
    }

    /// Replace one named parameter (`rate`, `shape`, `value`, `lo`, `hi`, or `mean`).
    pub fn with_param(&self, name: &str, v: f64) -> Result<Self> {
        let name = name.to_ascii_lowercase();
        if name == "mean" {
            return self.with_mean(v);
        }
        let updated = match (*self, name.as_str()) {
            (Self::Exponential { .. }, "rate") => Self::Exponential { rate: v },
            (Self::Gamma { rate, .. }, "shape") => Self::Gamma { shape: v, rate },
            (Self::Gamma { shape, .. }, "rate") => Self::Gamma { shape, rate: v },
            (Self::Deterministic { .. }, "value") => Self::Deterministic { value: v },
            (Self::Uniform { upper, .. }, "lo") => Self::Uniform { lower: v, upper },
            (Self::Uniform { lower, .. }, "hi") => Self::Uniform { lower, upper: v },
            (spec, _) => {
                return Err(AoiError::invalid(format!(
                    "family {} has no parameter `{name}`",
                    spec.family().name()
                )))
            }
        };
        updated.validated()
    }

    pub fn sampler(&self) -> Sampler {
        match *self {
            Self::Exponential { rate } => {
                Sampler::Exponential(Exp::new(rate).expect("validated rate"))
            }
            Self::Gamma { shape, rate } => {
                Sampler::Gamma(GammaDist::new(shape, 1.0 / rate).expect("validated gamma"))
            }
            Self::Deterministic { value } => Sampler::Constant(value),
            Self::Uniform { lower, upper } => Sampler::Uniform {
                lower,
                width: upper - lower,
            },
        }
    }
}

fn check_transform_arg(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(AoiError::invalid(format!(
            "transform argument must be finite and >= 0, got {s}"
        )))
    }
}

/// `(1 - e^{-z}) / z`.
fn phi1(z: f64) -> f64 {
    if z < UNIFORM_SERIES_CUTOFF {
        1.0 - z / 2.0 + z * z / 6.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// `∫_0^1 v e^{-zv} dv = (1 - e^{-z}(1 + z)) / z^2`.
///
/// The closed form loses digits quadratically as `z -> 0`, so the
/// alternating series is used on `[0, 1)`.
fn phi2(z: f64) -> f64 {
    if z < 1.0 {
        let mut sum = 0.0;
        let mut power = 1.0; // (-z)^n / n!
        for n in 0..30 {
            sum += power / (n as f64 + 2.0);
            power *= -z / (n as f64 + 1.0);
        }
        sum
    } else {
        (1.0 - (-z).exp() * (1.0 + z)) / (z * z)
    }
}

/// Regularized upper incomplete gamma `Q(shape, x)`.
fn gamma_tail(shape: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if shape.fract() == 0.0 && shape <= ERLANG_SUM_MAX_SHAPE {
        let mut term = (-x).exp();
        let mut sum = term;
        for j in 1..shape as usize {
            term *= x / j as f64;
            sum += term;
        }
        sum.min(1.0)
    } else {
        gamma_ur(shape, x)
    }
}

/// Draws variates for one [`DistributionSpec`].
#[derive(Debug, Clone, Copy)]
pub enum Sampler {
    Exponential(Exp<f64>),
    Gamma(GammaDist<f64>),
    Constant(f64),
    Uniform { lower: f64, width: f64 },
}

impl Sampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Exponential(d) => d.sample(rng),
            Sampler::Gamma(d) => d.sample(rng),
            Sampler::Constant(v) => *v,
            Sampler::Uniform { lower, width } => lower + width * rng.random::<f64>(),
        }
    }
}

/// A reproducible i.i.d. sample sequence: `(spec, seed, index)` fixes every value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStream {
    pub spec: DistributionSpec,
    pub seed: u64,
    pub index: u64,
}

impl SampleStream {
    pub fn new(spec: DistributionSpec, seed: u64, index: u64) -> Self {
        Self { spec, seed, index }
    }

    pub fn rng(&self) -> StreamRng {
        stream_rng(self.seed, self.index)
    }

    pub fn sample(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(AoiError::invalid("sample count must be >= 1"));
        }
        let sampler = self.spec.sampler();
        let mut rng = self.rng();
        Ok((0..n).map(|_| sampler.sample(&mut rng)).collect())
    }
}

impl Serialize for DistributionSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DistributionSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn exp(rate: f64) -> DistributionSpec {
        DistributionSpec::exponential(rate).unwrap()
    }

    fn gamma(shape: f64, rate: f64) -> DistributionSpec {
        DistributionSpec::gamma(shape, rate).unwrap()
    }

    fn det(value: f64) -> DistributionSpec {
        DistributionSpec::deterministic(value).unwrap()
    }

    fn unif(lo: f64, hi: f64) -> DistributionSpec {
        DistributionSpec::uniform(lo, hi).unwrap()
    }

    fn all_specs() -> Vec<DistributionSpec> {
        vec![
            exp(1.0),
            exp(3.5),
            gamma(2.0, 2.0),
            gamma(0.5, 1.0),
            gamma(3.7, 0.8),
            det(1.0),
            det(0.25),
            unif(0.0, 2.0),
            unif(0.5, 1.5),
        ]
    }

    #[test]
    fn moment_examples() {
        assert_eq!(exp(1.0).moment(2).unwrap(), 2.0);
        assert_eq!(det(3.0).moment(2).unwrap(), 9.0);
        assert_eq!(gamma(2.0, 2.0).moment(1).unwrap(), 1.0);
        assert!(matches!(
            exp(1.0).moment(3),
            Err(AoiError::InvalidArgument(_))
        ));
        assert!(matches!(
            exp(1.0).moment(0),
            Err(AoiError::InvalidArgument(_))
        ));
    }

    #[test]
    fn ccdf_examples() {
        assert_eq!(exp(1.0).ccdf(0.0).unwrap(), 1.0);
        assert_eq!(det(2.0).ccdf(2.0).unwrap(), 0.0);
        assert_eq!(det(2.0).ccdf(1.999).unwrap(), 1.0);
        assert_relative_eq!(
            exp(1.0).ccdf(1.0).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-15
        );
        assert!(exp(1.0).ccdf(-0.1).is_err());
        assert_eq!(unif(1.0, 3.0).ccdf(2.5).unwrap(), 0.25);
        assert_eq!(unif(1.0, 3.0).ccdf(3.0).unwrap(), 0.0);
    }

    #[test]
    fn gamma_tail_matches_incomplete_gamma() {
        // Erlang finite sum against the general special-function route.
        for &(shape, x) in &[(2.0, 0.3), (2.0, 4.0), (5.0, 2.5), (12.0, 9.0), (1.0, 0.7)] {
            let erlang = gamma_tail(shape, x);
            let general = gamma_ur(shape, x);
            assert_relative_eq!(erlang, general, max_relative = 1e-12);
        }
        assert_relative_eq!(
            gamma(2.0, 2.0).ccdf(0.5).unwrap(),
            2.0 * (-1.0f64).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn laplace_examples() {
        for spec in all_specs() {
            assert_eq!(spec.laplace(0.0).unwrap(), 1.0, "{spec}");
        }
        assert_eq!(exp(1.0).laplace(1.0).unwrap(), 0.5);
        assert_relative_eq!(
            gamma(2.0, 2.0).laplace(2.0).unwrap(),
            0.25,
            max_relative = 1e-15
        );
        assert!(exp(1.0).laplace(-1.0).is_err());
    }

    #[test]
    fn weighted_laplace_examples() {
        assert_eq!(exp(1.0).weighted_laplace(1.0).unwrap(), 0.25);
        assert_relative_eq!(
            det(1.0).weighted_laplace(1.0).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-15
        );
        for spec in all_specs() {
            assert_relative_eq!(
                spec.weighted_laplace(0.0).unwrap(),
                spec.mean(),
                max_relative = 1e-15
            );
        }
        assert!(det(1.0).weighted_laplace(-1e-3).is_err());
    }

    #[test]
    fn uniform_transforms_against_quadrature() {
        // Composite Simpson on the density as an independent route.
        fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            let n = 20_000;
            let h = (b - a) / n as f64;
            let mut acc = f(a) + f(b);
            for i in 1..n {
                let x = a + i as f64 * h;
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
            }
            acc * h / 3.0
        }
        let (a, b) = (0.5, 2.0);
        let spec = unif(a, b);
        for &s in &[1e-9, 1e-7, 1e-4, 0.3, 1.0, 2.5, 10.0] {
            let lap = simpson(|x| (-s * x).exp() / (b - a), a, b);
            let wl = simpson(|x| x * (-s * x).exp() / (b - a), a, b);
            assert_relative_eq!(spec.laplace(s).unwrap(), lap, max_relative = 1e-11);
            assert_relative_eq!(spec.weighted_laplace(s).unwrap(), wl, max_relative = 1e-11);
        }
    }

    #[test]
    fn log_concavity_flags() {
        assert!(!gamma(0.5, 1.0).is_log_concave());
        assert!(gamma(2.0, 2.0).is_log_concave());
        assert!(gamma(1.0, 2.0).is_log_concave());
        assert!(exp(3.0).is_log_concave());
        assert!(det(1.0).is_log_concave());
        assert!(unif(0.0, 1.0).is_log_concave());
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(DistributionSpec::exponential(0.0).is_err());
        assert!(DistributionSpec::exponential(f64::NAN).is_err());
        assert!(DistributionSpec::gamma(-1.0, 1.0).is_err());
        assert!(DistributionSpec::deterministic(-1.0).is_err());
        assert!(DistributionSpec::deterministic(0.0).is_ok());
        assert!(DistributionSpec::uniform(1.0, 1.0).is_err());
        assert!(DistributionSpec::uniform(-0.5, 1.0).is_err());
    }

    #[test]
    fn sample_stream_contract() {
        let s = SampleStream::new(det(2.0), 99, 0);
        assert_eq!(s.sample(3).unwrap(), vec![2.0, 2.0, 2.0]);
        assert!(s.sample(0).is_err());

        let e = SampleStream::new(exp(1.0), 42, 0);
        assert_eq!(e.sample(100).unwrap(), e.sample(100).unwrap());
        assert_ne!(
            e.sample(100).unwrap(),
            SampleStream::new(exp(1.0), 42, 1).sample(100).unwrap()
        );
    }

    #[test]
    fn exponential_sample_mean_converges() {
        let xs = SampleStream::new(exp(1.0), 42, 0)
            .sample(1_000_000)
            .unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn reparameterization_helpers() {
        let g = gamma(2.0, 3.0).with_mean(4.0).unwrap();
        assert_eq!(g, gamma(2.0, 0.5));
        assert_relative_eq!(unif(1.0, 3.0).with_mean(1.0).unwrap().mean(), 1.0);
        assert_eq!(exp(2.0).scaled(2.0).unwrap(), exp(1.0));
        assert_eq!(
            gamma(2.0, 1.0).with_param("shape", 3.0).unwrap(),
            gamma(3.0, 1.0)
        );
        assert!(det(1.0).with_param("rate", 1.0).is_err());
        assert!(exp(1.0).with_param("rate", -1.0).is_err());
    }
}
