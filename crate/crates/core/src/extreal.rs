//! Extended reals `ℝ ∪ {−∞, +∞}`.
//!
//! Kernels take values in `ℝ ∪ {−∞}` (sup form) or `ℝ ∪ {+∞}` (inf form), and
//! functionals built from them can hit either end. NaN is never admitted: the
//! constructors map `±inf` floats onto the infinite variants and reject NaN.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    /// Maps `±inf` onto the infinite variants. Panics on NaN; use
    /// [`ExtReal::try_from_f64`] for untrusted input.
    pub fn from_f64(v: f64) -> Self {
        Self::try_from_f64(v).expect("NaN is not an extended real")
    }

    pub fn try_from_f64(v: f64) -> Result<Self> {
        if v.is_nan() {
            Err(Error::NanValue("extended real".into()))
        } else if v == f64::INFINITY {
            Ok(ExtReal::PosInf)
        } else if v == f64::NEG_INFINITY {
            Ok(ExtReal::NegInf)
        } else {
            Ok(ExtReal::Finite(v))
        }
    }

    /// `±inf` as IEEE infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// `self − rhs`, with subtracting `+∞` always giving `−∞` (the
    /// `x − h(p)` convention). `(+∞) − (+∞)` resolves to `−∞` as well.
    pub fn sub(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (_, ExtReal::PosInf) | (ExtReal::NegInf, _) => ExtReal::NegInf,
            (ExtReal::PosInf, _) | (ExtReal::Finite(_), ExtReal::NegInf) => ExtReal::PosInf,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::from_f64(a - b),
        }
    }

    /// `self + rhs`, with `+∞` absorbing (the inf-form convention).
    pub fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::PosInf, _) | (_, ExtReal::PosInf) => ExtReal::PosInf,
            (ExtReal::NegInf, _) | (_, ExtReal::NegInf) => ExtReal::NegInf,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::from_f64(a + b),
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Absolute difference used for stability gaps. Equal infinities give 0;
    /// any other pairing with an infinity gives `+∞`.
    pub fn gap(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite((a - b).abs()),
            (ExtReal::NegInf, ExtReal::NegInf) | (ExtReal::PosInf, ExtReal::PosInf) => {
                ExtReal::Finite(0.0)
            }
            _ => ExtReal::PosInf,
        }
    }

    /// Exact match for infinities, `|a − b| ≤ tol` for finite values.
    pub fn approx_eq(self, other: ExtReal, tol: f64) -> bool {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= tol,
            (ExtReal::NegInf, ExtReal::NegInf) | (ExtReal::PosInf, ExtReal::PosInf) => true,
            _ => false,
        }
    }

    /// Applies `f` to finite values and passes infinities through.
    pub fn map_finite(self, f: impl FnOnce(f64) -> f64) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::from_f64(f(v)),
            other => other,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v)
    }
}

impl PartialEq for ExtReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.partial_cmp(b).expect("finite extended reals are never NaN"),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::PosInf => f.write_str("inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::NegInf => s.serialize_str("-inf"),
            ExtReal::PosInf => s.serialize_str("inf"),
            ExtReal::Finite(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ExtVisitor;

        impl Visitor<'_> for ExtVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                ExtReal::try_from_f64(v).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                match v {
                    "inf" | "+inf" | "Infinity" => Ok(ExtReal::PosInf),
                    "-inf" | "-Infinity" => Ok(ExtReal::NegInf),
                    other => Err(E::custom(format!("unknown extended-real sentinel {other:?}"))),
                }
            }
        }

        d.deserialize_any(ExtVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_order() {
        let mut v = vec![
            ExtReal::PosInf,
            ExtReal::Finite(1.0),
            ExtReal::NegInf,
            ExtReal::Finite(-3.0),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                ExtReal::NegInf,
                ExtReal::Finite(-3.0),
                ExtReal::Finite(1.0),
                ExtReal::PosInf
            ]
        );
        assert_eq!(ExtReal::Finite(0.0), ExtReal::Finite(-0.0));
    }

    #[test]
    fn arithmetic_with_infinities() {
        assert_eq!(ExtReal::Finite(2.0).sub(ExtReal::PosInf), ExtReal::NegInf);
        assert_eq!(ExtReal::Finite(2.0).sub(ExtReal::Finite(0.5)), ExtReal::Finite(1.5));
        assert_eq!(ExtReal::Finite(2.0).add(ExtReal::PosInf), ExtReal::PosInf);
        assert_eq!(ExtReal::NegInf.gap(ExtReal::NegInf), ExtReal::Finite(0.0));
        assert_eq!(ExtReal::NegInf.gap(ExtReal::Finite(0.0)), ExtReal::PosInf);
    }

    #[test]
    fn json_sentinels() {
        let v: Vec<ExtReal> = serde_json::from_str(r#"[1.5, "inf", "-inf", 3]"#).unwrap();
        assert_eq!(
            v,
            vec![
                ExtReal::Finite(1.5),
                ExtReal::PosInf,
                ExtReal::NegInf,
                ExtReal::Finite(3.0)
            ]
        );
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[1.5,"inf","-inf",3.0]"#);
        assert!(ExtReal::try_from_f64(f64::NAN).is_err());
    }
}
