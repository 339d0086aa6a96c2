//! Score values on the extended real line.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// A real number or ±∞. NaN is unrepresentable.
///
/// Serialises as a JSON number when finite and as the strings `"+inf"` / `"-inf"`
/// otherwise, since JSON has no infinite literals.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);
    pub const NEG_INFINITY: ExtReal = ExtReal(f64::NEG_INFINITY);

    pub fn new(v: f64) -> Result<Self> {
        if v.is_nan() {
            Err(Error::NaN("score value"))
        } else {
            Ok(ExtReal(v))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::INFINITY {
            f.write_str("+inf")
        } else if self.0 == f64::NEG_INFINITY {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"+inf\"/\"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                ExtReal::new(v).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                match v {
                    "+inf" | "inf" => Ok(ExtReal::INFINITY),
                    "-inf" => Ok(ExtReal::NEG_INFINITY),
                    _ => Err(E::custom(format!("invalid extended real {v:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// How a score value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    FastExact,
    NaiveExact,
    NumericQuadrature,
    MonteCarlo,
}

/// Metadata attached to a score to record an estimator variant or a caveat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreFlag {
    /// Unbiased ensemble estimator, 1/(n(n-1)) pairwise term.
    Fair,
    /// Exact score of the empirical measure, 1/n² pairwise term.
    Empirical,
    /// Energy score computed with an α < 1 quasi-norm.
    QuasiNorm,
    /// Local score whose regularity conditions are asserted by the caller.
    UserAssertsRegularity,
}

/// A realised score together with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreValue {
    pub value: ExtReal,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<ScoreFlag>,
}

impl ScoreValue {
    /// Deterministic score. Fails on NaN.
    pub fn exact(value: f64, method: Method) -> Result<Self> {
        debug_assert!(method != Method::MonteCarlo);
        Ok(ScoreValue {
            value: ExtReal::new(value)?,
            method,
            se: None,
            flags: Vec::new(),
        })
    }

    pub fn monte_carlo(value: f64, se: f64) -> Result<Self> {
        if se.is_nan() || se < 0.0 {
            return Err(Error::Numeric(format!("invalid standard error {se}")));
        }
        Ok(ScoreValue {
            value: ExtReal::new(value)?,
            method: Method::MonteCarlo,
            se: Some(se),
            flags: Vec::new(),
        })
    }

    pub fn with_flag(mut self, flag: ScoreFlag) -> Self {
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
        self
    }

    /// Plain `f64` view of the value.
    pub fn get(&self) -> f64 {
        self.value.get()
    }
}
