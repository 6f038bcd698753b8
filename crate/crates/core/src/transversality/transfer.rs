//! Exact constant transfers between the three notions.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rates below this are flagged as degenerate.
const DEGENERATE_RATE: f64 = 1e-6;

/// An exact rational constant with its float image.
#[derive(Clone, PartialEq, Eq)]
pub struct ExactValue(pub BigRational);

impl ExactValue {
    /// Exact conversion of a finite float.
    pub fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .map(ExactValue)
            .ok_or_else(|| Error::InvalidArgument(format!("non-finite constant {x}")))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        ExactValue(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn value(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn rational(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Serialize, Deserialize)]
struct ExactRecord {
    value: f64,
    exact: String,
}

impl Serialize for ExactValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExactRecord { value: self.value(), exact: self.to_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ExactRecord::deserialize(d)?;
        let q = match r.exact.split_once('/') {
            Some((n, m)) => {
                let n: BigInt = n.trim().parse().map_err(serde::de::Error::custom)?;
                let m: BigInt = m.trim().parse().map_err(serde::de::Error::custom)?;
                if m.is_zero() {
                    return Err(serde::de::Error::custom("zero denominator"));
                }
                BigRational::new(n, m)
            }
            None => BigRational::from_integer(r.exact.trim().parse().map_err(serde::de::Error::custom)?),
        };
        Ok(ExactValue(q))
    }
}

fn positive(name: &str, x: f64) -> Result<BigRational> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {x}")));
    }
    Ok(BigRational::from_float(x).expect("finite"))
}

/// Tangential constants `(M, η, δ)` obtained from a transversality pair `(α, δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentialConstants {
    #[serde(rename = "M")]
    pub m: ExactValue,
    pub eta: ExactValue,
    pub delta: ExactValue,
    pub formula: String,
    /// Set when the rate `η/M` is so small that the constants carry no practical information.
    pub degenerate: bool,
}

/// Subtransversality constants `(K, ζ)` obtained from tangential constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtransversalConstants {
    #[serde(rename = "K")]
    pub k: ExactValue,
    pub zeta: ExactValue,
    pub formula: String,
}

/// `(α, δ) ↦ (M, η, δ) = (α + 1, α, δ)`.
pub fn transfer_constants_transversal_to_tangential(alpha: f64, delta: f64) -> Result<TangentialConstants> {
    let a = positive("alpha", alpha)?;
    let d = positive("delta", delta)?;
    let m = &a + BigRational::one();
    let degenerate = (&a / &m).to_f64().unwrap_or(0.0) < DEGENERATE_RATE;
    Ok(TangentialConstants {
        m: ExactValue(m),
        eta: ExactValue(a),
        delta: ExactValue(d),
        formula: "M = alpha + 1; eta = alpha; delta unchanged".into(),
        degenerate,
    })
}

/// `(M, η, δ) ↦ (K, ζ) = (1 + M/η, δ / (2 (1 + 2M/η)))`.
pub fn transfer_constants_tangential_to_sub(m: f64, eta: f64, delta: f64) -> Result<SubtransversalConstants> {
    let m = positive("M", m)?;
    let e = positive("eta", eta)?;
    let d = positive("delta", delta)?;
    let ratio = &m / &e;
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let k = &one + &ratio;
    let zeta = &d / (&two * (&one + &two * &ratio));
    Ok(SubtransversalConstants {
        k: ExactValue(k),
        zeta: ExactValue(zeta),
        formula: "K = 1 + M/eta; zeta = delta / (2 (1 + 2 M/eta))".into(),
    })
}

/// `δ / (1 + 2M/η)`, the radius inside which every pair satisfies the starting condition.
pub fn admissible_radius_exact(m: f64, eta: f64, delta: f64) -> Result<ExactValue> {
    let m = positive("M", m)?;
    let e = positive("eta", eta)?;
    let d = positive("delta", delta)?;
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let r = &d / (&one + &two * (&m / &e));
    debug_assert!(r.is_positive());
    Ok(ExactValue(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_serde() {
        let v = ExactValue::from_ratio(6, 10);
        assert_eq!(v.to_string(), "3/5");
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"value":0.6,"exact":"3/5"}"#);
        let back: ExactValue = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(transfer_constants_transversal_to_tangential(0.0, 1.0).is_err());
        assert!(transfer_constants_tangential_to_sub(1.0, -1.0, 1.0).is_err());
        assert!(admissible_radius_exact(1.0, 1.0, f64::NAN).is_err());
    }
}
