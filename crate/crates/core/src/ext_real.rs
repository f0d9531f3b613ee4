//! Extended reals `R ∪ {±∞}` backed by IEEE doubles.
//!
//! Arithmetic follows the conventions `+∞ + (−∞) = +∞` and `0·(+∞) = +∞`,
//! so sums of functions with disjoint domains stay `+∞` instead of turning
//! into NaN.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);
    pub const NEG_INFINITY: ExtReal = ExtReal(f64::NEG_INFINITY);
    pub const ZERO: ExtReal = ExtReal(0.0);

    /// Wraps a double. NaN is rejected.
    pub fn new(v: f64) -> ExtReal {
        assert!(!v.is_nan(), "ExtReal cannot hold NaN");
        ExtReal(v)
    }

    pub fn finite(v: f64) -> ExtReal {
        assert!(v.is_finite(), "expected a finite value, got {v}");
        ExtReal(v)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_pos_inf(self) -> bool {
        self.0 == f64::INFINITY
    }

    pub fn is_neg_inf(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// Finite value, if any.
    pub fn as_finite(self) -> Option<f64> {
        self.is_finite().then_some(self.0)
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }

    /// Total order (NaN cannot occur).
    pub fn total_cmp(&self, other: &ExtReal) -> Ordering {
        self.0.total_cmp(&other.0)
    }

    /// Difference `self − other` that is 0 when both sides are the same
    /// infinity and `+∞` when only `self` is `+∞`.
    pub fn gap(self, other: ExtReal) -> f64 {
        match (self.is_finite(), other.is_finite()) {
            (true, true) => self.0 - other.0,
            _ if self.0 == other.0 => 0.0,
            _ => {
                if self.0 > other.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::new(v)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        if self.is_pos_inf() || rhs.is_pos_inf() {
            ExtReal::INFINITY
        } else {
            ExtReal(self.0 + rhs.0)
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::new(rhs)
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> ExtReal {
        ExtReal(-self.0)
    }
}

impl Sub for ExtReal {
    type Output = ExtReal;

    fn sub(self, rhs: ExtReal) -> ExtReal {
        self + (-rhs)
    }
}

impl Mul<f64> for ExtReal {
    type Output = ExtReal;

    fn mul(self, rhs: f64) -> ExtReal {
        if self.is_pos_inf() && rhs == 0.0 {
            return ExtReal::INFINITY;
        }
        if self.is_neg_inf() && rhs == 0.0 {
            return ExtReal::ZERO;
        }
        ExtReal(self.0 * rhs)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pos_inf() {
            write!(f, "inf")
        } else if self.is_neg_inf() {
            write!(f, "-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_pos_inf() {
            s.serialize_str("inf")
        } else if self.is_neg_inf() {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

/// `serialize_with` helper for plain `f64` fields that may be infinite:
/// writes the same `"inf"`/`"-inf"` literals as [`ExtReal`].
pub fn serialize_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_nan() {
        s.serialize_str("nan")
    } else {
        ExtReal(*v).serialize(s)
    }
}

pub fn serialize_opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => serialize_f64(v, s),
        None => s.serialize_none(),
    }
}

struct ExtRealVisitor;

impl Visitor<'_> for ExtRealVisitor {
    type Value = ExtReal;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or one of the literals \"inf\", \"-inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
        if v.is_nan() {
            return Err(E::custom("NaN is not an extended real"));
        }
        Ok(ExtReal(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
        Ok(ExtReal(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
        Ok(ExtReal(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
        match v {
            "inf" | "+inf" => Ok(ExtReal::INFINITY),
            "-inf" => Ok(ExtReal::NEG_INFINITY),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(ExtReal)
                .ok_or_else(|| E::invalid_value(de::Unexpected::Str(other), &self)),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<ExtReal, D::Error> {
        d.deserialize_any(ExtRealVisitor)
    }
}
