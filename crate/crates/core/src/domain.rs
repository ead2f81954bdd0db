//! Named parameter domains shared by the learner zoo, the preprocessors,
//! the option tree and the differential-evolution decision bounds.

use rand::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Cat(String),
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Real(v) => Some(*v),
            ParamValue::Int(v) => Some(*v as f64),
            ParamValue::Cat(_) => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            ParamValue::Int(v) => Some(*v),
            ParamValue::Real(v) => Some(v.round() as i64),
            ParamValue::Cat(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Cat(s) => Some(s),
            _ => None,
        }
    }
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Cat(s) => f.write_str(s),
        }
    }
}

/// The admissible values of one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Real { lo: f64, hi: f64 },
    Int { lo: i64, hi: i64 },
    /// a fixed menu of integers, e.g. n_synthetics in {50,100,200,400}
    IntChoice(Vec<i64>),
    Cat(Vec<String>),
}

impl Domain {
    pub fn cat<S: Into<String>>(choices: impl IntoIterator<Item = S>) -> Self {
        Domain::Cat(choices.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, value: &ParamValue) -> bool {
        match (self, value) {
            (Domain::Real { lo, hi }, v) => {
                v.as_f64().map(|x| x >= *lo && x <= *hi).unwrap_or(false)
            }
            (Domain::Int { lo, hi }, ParamValue::Int(x)) => x >= lo && x <= hi,
            (Domain::Int { lo, hi }, ParamValue::Real(x)) => {
                x.fract() == 0.0 && *x >= *lo as f64 && *x <= *hi as f64
            }
            (Domain::IntChoice(choices), v) => {
                v.as_i64().map(|x| choices.contains(&x)).unwrap_or(false)
            }
            (Domain::Cat(choices), ParamValue::Cat(s)) => choices.iter().any(|c| c == s),
            _ => false,
        }
    }

    /// Draw a uniform value from the domain.
    pub fn sample(&self, rng: &mut impl Rng) -> ParamValue {
        match self {
            Domain::Real { lo, hi } => {
                if lo == hi {
                    ParamValue::Real(*lo)
                } else {
                    ParamValue::Real(rng.gen_range(*lo..*hi))
                }
            }
            Domain::Int { lo, hi } => ParamValue::Int(rng.gen_range(*lo..=*hi)),
            Domain::IntChoice(choices) => {
                ParamValue::Int(choices[rng.gen_range(0..choices.len())])
            }
            Domain::Cat(choices) => {
                ParamValue::Cat(choices[rng.gen_range(0..choices.len())].clone())
            }
        }
    }
}

/// A named domain, e.g. `n_neighbors` in 2..=25.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDomain {
    pub name: String,
    pub domain: Domain,
}

impl ParamDomain {
    pub fn new(name: impl Into<String>, domain: Domain) -> Self {
        ParamDomain { name: name.into(), domain }
    }
}

/// Check a (name, value) list against its domain table: unknown names and
/// out-of-range values are rejected.
pub fn validate_params<'a>(
    owner: &str,
    params: impl Iterator<Item = (&'a String, &'a ParamValue)>,
    domains: &[ParamDomain],
) -> Result<()> {
    for (name, value) in params {
        let dom = domains.iter().find(|d| &d.name == name).ok_or_else(|| {
            Error::InvalidParam(format!("{owner}: unknown parameter '{name}'"))
        })?;
        if !dom.domain.contains(value) {
            return Err(Error::InvalidParam(format!(
                "{owner}: parameter '{name}' = {value} is outside {:?}",
                dom.domain
            )));
        }
    }
    Ok(())
}
