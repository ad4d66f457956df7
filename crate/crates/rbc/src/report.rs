//! Stable report formats shared by the library and the `rbc` binary.
//!
//! Reports serialize deterministically: struct fields in declaration order,
//! parameter maps sorted by key, exact rationals as `"num/den"` strings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::spacetime::Rat;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Structured output of a bound calculation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SecurityReport {
    pub protocol: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    /// Winning-probability excess bound; `None` together with `insecure`
    /// marks a parameter region with no guarantee.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_chernoff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub insecure: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<FeasibilityFlags>,
    /// The evaluated formula, spelled out so the report is self-documenting.
    pub formula: String,
    pub units: String,
    pub toolkit_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SecurityReport {
    pub fn new(protocol: &str, formula: &str) -> Self {
        SecurityReport {
            protocol: protocol.to_string(),
            parameters: BTreeMap::new(),
            epsilon: None,
            epsilon_exact: None,
            epsilon_chernoff: None,
            insecure: None,
            feasibility: None,
            formula: formula.to_string(),
            units: "probability (dimensionless)".to_string(),
            toolkit_version: TOOLKIT_VERSION.to_string(),
            seed: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }
}

/// Correctness/security flags of a device configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub struct FeasibilityFlags {
    pub correct: bool,
    pub secure: bool,
    pub combined: bool,
}

/// Serde adapter for exact rationals: `"num/den"`, or `"num"` when den = 1.
pub mod rat_serde {
    use super::Rat;
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rat, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&super::rat_to_string(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rat, D::Error> {
        // Accept both the string form and plain JSON integers.
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i128),
            Text(String),
            Float(f64),
        }
        match Raw::deserialize(de)? {
            Raw::Int(i) => Ok(Rat::from_integer(i)),
            Raw::Text(text) => super::rat_from_string(&text).map_err(D::Error::custom),
            Raw::Float(f) => {
                if f.fract() == 0.0 && f.abs() < 1e18 {
                    Ok(Rat::from_integer(f as i128))
                } else {
                    Err(D::Error::custom(
                        "non-integer coordinates must be rational strings like \"3/2\"",
                    ))
                }
            }
        }
    }
}

pub fn rat_to_string(value: &Rat) -> String {
    if *value.denom() == 1 {
        format!("{}", value.numer())
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn rat_from_string(text: &str) -> Result<Rat, String> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n: i128 = num.trim().parse().map_err(|e| format!("bad numerator: {e}"))?;
        let d: i128 = den.trim().parse().map_err(|e| format!("bad denominator: {e}"))?;
        if d == 0 {
            return Err("zero denominator".to_string());
        }
        Ok(Rat::new(n, d))
    } else {
        let n: i128 = text.parse().map_err(|e| format!("bad rational: {e}"))?;
        Ok(Rat::from_integer(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip() {
        for text in ["3/2", "-7/3", "5", "0"] {
            let r = rat_from_string(text).unwrap();
            let back = rat_from_string(&rat_to_string(&r)).unwrap();
            assert_eq!(r, back);
        }
        assert!(rat_from_string("1/0").is_err());
    }

    #[test]
    fn report_round_trips_and_is_deterministic() {
        let report = SecurityReport::new("multiround", "c_m")
            .param("n", 512)
            .param("m", 5);
        let a = serde_json::to_string(&report).unwrap();
        let b = serde_json::to_string(&report).unwrap();
        assert_eq!(a, b);
        let parsed: SecurityReport = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed, report);
    }
}
