//! Exact rational scalars, dense rational matrices and terminating
//! hypergeometric sums.
//!
//! Everything downstream is built on [`Rational`], an arbitrary-precision
//! fraction kept in lowest terms. Nothing in this module rounds.

mod linsolve;
mod matrix;
mod poly;
mod series;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

pub use linsolve::{solve_affine, AffineSolution, nullspace_rect as nullspace_of_rows};
pub use matrix::RMatrix;
pub use poly::{poly_from_roots, poly_mul_linear};
pub use series::{hypergeometric_3f2_terminating, hypergeometric_terminating, pochhammer};

/// Arbitrary-precision exact rational, always normalized with a positive
/// denominator.
pub type Rational = BigRational;

/// `n / d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `(-1)^n` as a rational.
pub fn parity_sign(n: usize) -> Rational {
    if n % 2 == 0 {
        one()
    } else {
        -one()
    }
}

/// Sign of a rational as -1, 0 or 1.
pub fn sign(x: &Rational) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Returns `Some(k)` when `x` is a non-positive integer `-k`.
pub fn as_non_positive_integer(x: &Rational) -> Option<usize> {
    if !x.is_integer() || x.is_positive() {
        return None;
    }
    let k: BigInt = -x.to_integer();
    usize::try_from(k).ok()
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn to_exact_string(x: &Rational) -> String {
    x.to_string()
}

/// Parses `"p/q"`, `"p"`, or a signed variant of either.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not an exact rational: {s:?}"));
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Lossy conversion for display only.
pub fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter writing a [`Rational`] as its exact string form.
pub mod serde_rational {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod serde_rational_vec {
    use super::{parse_rational, Rational};
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
