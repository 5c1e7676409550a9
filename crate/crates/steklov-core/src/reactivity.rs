//! Reactivity values with an explicit Dirichlet (infinite) sentinel.

use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

/// A patch reactivity `κ`: either a finite real number or the perfectly
/// reactive limit `κ = ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reactivity {
    Finite(f64),
    Infinite,
}

impl Reactivity {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Reactivity::Infinite)
    }

    /// The finite value, or `f64::INFINITY` for the sentinel.
    pub fn as_f64(&self) -> f64 {
        match self {
            Reactivity::Finite(k) => *k,
            Reactivity::Infinite => f64::INFINITY,
        }
    }

    /// Multiplies a finite reactivity by a positive length scale.
    pub fn scaled(&self, s: f64) -> Reactivity {
        match self {
            Reactivity::Finite(k) => Reactivity::Finite(k * s),
            Reactivity::Infinite => Reactivity::Infinite,
        }
    }
}

impl From<f64> for Reactivity {
    fn from(k: f64) -> Self {
        if k == f64::INFINITY {
            Reactivity::Infinite
        } else {
            Reactivity::Finite(k)
        }
    }
}

impl fmt::Display for Reactivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reactivity::Finite(k) => write!(f, "{k}"),
            Reactivity::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Reactivity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Reactivity::Infinite);
        }
        let v: f64 = t.parse().map_err(|_| Error::Parse(format!("cannot read reactivity from '{s}'")))?;
        if !v.is_finite() {
            return Err(Error::Parse(format!("reactivity '{s}' must be finite or 'inf'")));
        }
        Ok(Reactivity::Finite(v))
    }
}

impl Serialize for Reactivity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Reactivity::Finite(k) => s.serialize_f64(*k),
            Reactivity::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Reactivity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Reactivity::Finite(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
