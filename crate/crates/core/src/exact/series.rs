use num_traits::{One, Zero};

use super::{as_non_positive_integer, Rational};
use crate::error::Error;

/// Rising factorial `(a)_n = a (a+1) ... (a+n-1)`, with `(a)_0 = 1`.
pub fn pochhammer(a: &Rational, n: usize) -> Rational {
    let mut acc = Rational::one();
    let mut term = a.clone();
    for _ in 0..n {
        acc *= &term;
        term += Rational::one();
    }
    acc
}

/// Terminating generalized hypergeometric sum
/// `sum_k prod (a_i)_k / prod (b_j)_k * z^k / k!`.
///
/// The series stops at `T = min |a_i|` over the upper parameters that are
/// non-positive integers. A lower parameter equal to `-L` with `L < T` makes
/// some retained term divide by zero and is reported as a pole.
pub fn hypergeometric_terminating(
    upper: &[Rational],
    lower: &[Rational],
    z: &Rational,
) -> Result<Rational, Error> {
    let last = upper
        .iter()
        .filter_map(as_non_positive_integer)
        .min()
        .ok_or(Error::NonTerminating)?;
    for (index, b) in lower.iter().enumerate() {
        if let Some(l) = as_non_positive_integer(b) {
            if l < last {
                return Err(Error::PoleInLowerParameter {
                    index,
                    value: b.to_string(),
                    at: l + 1,
                });
            }
        }
    }

    let mut sum = Rational::zero();
    let mut term = Rational::one();
    for k in 0..=last {
        sum += &term;
        if k == last {
            break;
        }
        let kq = Rational::from_integer(k.into());
        for a in upper {
            term *= a + &kq;
        }
        for b in lower {
            term /= b + &kq;
        }
        term *= z;
        term /= &kq + Rational::one();
        if term.is_zero() {
            break;
        }
    }
    Ok(sum)
}

/// `3F2(a1, a2, a3; b1, b2; z)` for a terminating series.
pub fn hypergeometric_3f2_terminating(
    a1: &Rational,
    a2: &Rational,
    a3: &Rational,
    b1: &Rational,
    b2: &Rational,
    z: &Rational,
) -> Result<Rational, Error> {
    hypergeometric_terminating(
        &[a1.clone(), a2.clone(), a3.clone()],
        &[b1.clone(), b2.clone()],
        z,
    )
}
