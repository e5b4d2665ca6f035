use num_traits::{One, Zero};

use super::Rational;

/// Multiplies a coefficient vector (lowest degree first) by `(t - root)`.
pub fn poly_mul_linear(p: &[Rational], root: &Rational) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); p.len() + 1];
    for (k, c) in p.iter().enumerate() {
        out[k + 1] += c;
        out[k] -= c * root;
    }
    out
}

/// Monic polynomial `prod (t - r)` over the given roots.
pub fn poly_from_roots(roots: &[Rational]) -> Vec<Rational> {
    roots
        .iter()
        .fold(vec![Rational::one()], |p, r| poly_mul_linear(&p, r))
}
