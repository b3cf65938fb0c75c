//! Text encoding: `exp:rate=R`, `gamma:shape=A,rate=R`, `det:value=V`,
//! `uniform:lo=A,hi=B`.
//!
//! ```text
//! spec   := family ':' param (',' param)*
//! family := "exp" | "exponential" | "gamma" | "det" | "deterministic" | "uniform"
//! param  := key '=' number
//! ```
//!
//! Matching is case-insensitive and whitespace around tokens is ignored.
//! Every key of the family must appear exactly once and no other key may
//! appear. [`Display`](std::fmt::Display) writes the canonical short form
//! with round-trip exact numbers.

use std::fmt;
use std::str::FromStr;

use super::DistributionSpec;
use crate::error::AoiError;

fn parse_error(text: &str, why: impl fmt::Display) -> AoiError {
    AoiError::Parse(format!("`{text}`: {why}"))
}

impl FromStr for DistributionSpec {
    type Err = AoiError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let lowered = text.trim().to_ascii_lowercase();
        let (family, rest) = lowered
            .split_once(':')
            .ok_or_else(|| parse_error(text, "expected `family:key=value,...`"))?;

        let keys: &[&str] = match family.trim() {
            "exp" | "exponential" => &["rate"],
            "gamma" => &["shape", "rate"],
            "det" | "deterministic" => &["value"],
            "uniform" => &["lo", "hi"],
            other => return Err(parse_error(text, format!("unknown family `{other}`"))),
        };

        let mut values = vec![None; keys.len()];
        for item in rest.split(',') {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                parse_error(text, format!("expected key=value, got `{}`", item.trim()))
            })?;
            let key = key.trim();
            let slot = keys
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| parse_error(text, format!("unknown parameter `{key}`")))?;
            if values[slot].is_some() {
                return Err(parse_error(text, format!("duplicate parameter `{key}`")));
            }
            let number: f64 = value
                .trim()
                .parse()
                .map_err(|_| parse_error(text, format!("`{}` is not a number", value.trim())))?;
            values[slot] = Some(number);
        }

        let mut get = |i: usize| {
            values[i]
                .take()
                .ok_or_else(|| parse_error(text, format!("missing parameter `{}`", keys[i])))
        };
        let spec = match keys[0] {
            "rate" => DistributionSpec::Exponential { rate: get(0)? },
            "shape" => DistributionSpec::Gamma {
                shape: get(0)?,
                rate: get(1)?,
            },
            "value" => DistributionSpec::Deterministic { value: get(0)? },
            _ => DistributionSpec::Uniform {
                lower: get(0)?,
                upper: get(1)?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Exponential { rate } => write!(f, "exp:rate={rate}"),
            Self::Gamma { shape, rate } => write!(f, "gamma:shape={shape},rate={rate}"),
            Self::Deterministic { value } => write!(f, "det:value={value}"),
            Self::Uniform { lower, upper } => write!(f, "uniform:lo={lower},hi={upper}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_each_family() {
        assert_eq!(
            "exp:rate=2".parse::<DistributionSpec>().unwrap(),
            DistributionSpec::Exponential { rate: 2.0 }
        );
        assert_eq!(
            " Gamma : Rate=1.5 , SHAPE=2 "
                .parse::<DistributionSpec>()
                .unwrap(),
            DistributionSpec::Gamma {
                shape: 2.0,
                rate: 1.5
            }
        );
        assert_eq!(
            "DET:value=0.5".parse::<DistributionSpec>().unwrap(),
            DistributionSpec::Deterministic { value: 0.5 }
        );
        assert_eq!(
            "uniform:lo=0,hi=2".parse::<DistributionSpec>().unwrap(),
            DistributionSpec::Uniform {
                lower: 0.0,
                upper: 2.0
            }
        );
    }

    #[test]
    fn rejects_malformed_text() {
        for bad in [
            "exp",
            "exp:",
            "exp:rate",
            "exp:rate=abc",
            "exp:rate=1,rate=2",
            "exp:lambda=1",
            "gamma:shape=2",
            "pareto:alpha=1",
            "exp:rate=-1",
            "uniform:lo=2,hi=1",
        ] {
            assert!(
                bad.parse::<DistributionSpec>().is_err(),
                "{bad} should fail"
            );
        }
    }

    fn any_spec() -> impl Strategy<Value = DistributionSpec> {
        prop_oneof![
            (1e-3f64..1e3).prop_map(|rate| DistributionSpec::Exponential { rate }),
            (1e-2f64..50.0, 1e-3f64..1e3)
                .prop_map(|(shape, rate)| DistributionSpec::Gamma { shape, rate }),
            (0.0f64..1e3).prop_map(|value| DistributionSpec::Deterministic { value }),
            (0.0f64..10.0, 1e-3f64..10.0).prop_map(|(lower, w)| DistributionSpec::Uniform {
                lower,
                upper: lower + w
            }),
        ]
    }

    proptest! {
        #[test]
        fn display_round_trips(spec in any_spec()) {
            let text = spec.to_string();
            prop_assert_eq!(text.parse::<DistributionSpec>().unwrap(), spec);
        }
    }
}
