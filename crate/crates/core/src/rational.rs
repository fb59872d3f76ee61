//! Exact rationals and their string encoding.
//!
//! Every rational that crosses a serialization boundary is written as
//! `"p/q"` (always with a denominator, `"2/1"` for integers) so that no JSON
//! consumer ever sees a float.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational scalar used throughout the crate.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn from_big(n: &BigUint) -> Q {
    Q::from_integer(BigInt::from(n.clone()))
}

/// `1 / m` for a positive big integer.
pub fn recip(m: &BigUint) -> Q {
    Q::new(BigInt::one(), BigInt::from(m.clone()))
}

pub fn to_string(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// `ceil(log2(1/eps))` for `0 < eps < 1`.
pub fn ceil_log2_recip(eps: &Q) -> u64 {
    let r = eps.recip();
    let c = r.ceil().to_integer();
    let c = c.magnitude();
    // c >= 2 here; ceil(log2 c) = bits(c - 1)
    (c - BigUint::one()).bits()
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

/// Serde adapter writing a [`Q`] as `"p/q"`.
pub mod serde_q {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&to_string(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(D::Error::custom)
    }
}

pub mod serde_q_opt {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_some(&to_string(x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Q>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse(&s).map_err(D::Error::custom)).transpose()
    }
}

pub mod serde_q_vec {
    use super::*;

    pub fn serialize<S: Serializer>(x: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = x.iter().map(to_string).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse(s).map_err(D::Error::custom)).collect()
    }
}

/// Serializable newtype for places where a wrapper is easier than an adapter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rat(pub Q);

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_string(&self.0))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_q::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        serde_q::deserialize(d).map(Rat)
    }
}

pub fn is_nonneg(x: &Q) -> bool {
    !x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encodes_integers_with_denominator() {
        assert_eq!(to_string(&qi(2)), "2/1");
        assert_eq!(to_string(&q(-3, 6)), "-1/2");
        assert_eq!(parse("4/8").unwrap(), q(1, 2));
        assert_eq!(parse("7").unwrap(), qi(7));
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn log2_of_reciprocal() {
        assert_eq!(ceil_log2_recip(&q(1, 2)), 1);
        assert_eq!(ceil_log2_recip(&q(1, 1024)), 10);
        assert_eq!(ceil_log2_recip(&q(1, 3)), 2);
        assert_eq!(ceil_log2_recip(&q(2, 3)), 1);
    }
}
