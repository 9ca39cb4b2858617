//! Named analytic initial profiles.
//!
//! Grammar: `sin`, `cos`, `gauss` (`exp(−x²)`), `zero`, `const:<c>`, and
//! `poly:<c0>,<c1>,…` for `c0 + c1·x + …`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Profile {
    Sin,
    Cos,
    Gauss,
    Zero,
    Const(f64),
    /// Coefficients in ascending order.
    Poly(Vec<f64>),
}

fn parse_number(s: &str) -> Result<f64, LabError> {
    let v: f64 = s.trim().parse().map_err(|_| LabError::Config(format!("bad number {s:?} in profile")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(LabError::Config(format!("non-finite number {s:?} in profile")))
    }
}

impl FromStr for Profile {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "sin" => return Ok(Profile::Sin),
            "cos" => return Ok(Profile::Cos),
            "gauss" => return Ok(Profile::Gauss),
            "zero" => return Ok(Profile::Zero),
            _ => {}
        }
        if let Some(c) = s.strip_prefix("const:") {
            return Ok(Profile::Const(parse_number(c)?));
        }
        if let Some(cs) = s.strip_prefix("poly:") {
            let coeffs = cs.split(',').map(parse_number).collect::<Result<Vec<_>, _>>()?;
            if coeffs.len() > 64 {
                return Err(LabError::Config("polynomial profiles are limited to degree 63".into()));
            }
            return Ok(Profile::Poly(coeffs));
        }
        Err(LabError::Config(format!("unknown profile {s:?}")))
    }
}

impl TryFrom<String> for Profile {
    type Error = LabError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Sin => f.write_str("sin"),
            Profile::Cos => f.write_str("cos"),
            Profile::Gauss => f.write_str("gauss"),
            Profile::Zero => f.write_str("zero"),
            Profile::Const(c) => write!(f, "const:{c}"),
            Profile::Poly(cs) => {
                let parts: Vec<String> = cs.iter().map(f64::to_string).collect();
                write!(f, "poly:{}", parts.join(","))
            }
        }
    }
}

impl From<Profile> for String {
    fn from(p: Profile) -> String {
        p.to_string()
    }
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Sin => x.sin(),
            Profile::Cos => x.cos(),
            Profile::Gauss => (-x * x).exp(),
            Profile::Zero => 0.0,
            Profile::Const(c) => *c,
            Profile::Poly(cs) => cs.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Profile::Sin => x.cos(),
            Profile::Cos => -x.sin(),
            Profile::Gauss => -2.0 * x * (-x * x).exp(),
            Profile::Zero | Profile::Const(_) => 0.0,
            Profile::Poly(cs) => cs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (i, c)| acc * x + i as f64 * c),
        }
    }

    /// Polynomial degree, `None` for transcendental profiles. Zero counts as degree 0.
    pub fn degree(&self) -> Option<usize> {
        match self {
            Profile::Zero | Profile::Const(_) => Some(0),
            Profile::Poly(cs) => Some(cs.iter().rposition(|c| *c != 0.0).unwrap_or(0)),
            _ => None,
        }
    }
}
