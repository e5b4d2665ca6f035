//! Dual -1 Hahn polynomials `Q_n(x; alpha, beta, N)`.
//!
//! Monic, orthogonal on the `N + 1` point grid `x_s`, defined by a
//! three-term recurrence whose coefficients are written with mu-numbers.
//! Both parities of `N` are supported; the parity decides the formulas for
//! the recurrence, grid, weights, norms and the hypergeometric form.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{
    hypergeometric_3f2_terminating, int, parity_sign, pochhammer, rat, serde_rational,
    serde_rational_vec, Rational, RMatrix,
};

/// The mu-number `[n]_mu = n + mu (1 - (-1)^n)`.
pub fn mu_number(n: usize, mu: &Rational) -> Rational {
    let n_q = int(n as i64);
    if n % 2 == 0 {
        n_q
    } else {
        n_q + mu * int(2)
    }
}

/// `[1]_mu [2]_mu ... [n]_mu`, with the empty product equal to one.
pub fn mu_factorial(n: usize, mu: &Rational) -> Rational {
    (1..=n).map(|k| mu_number(k, mu)).product()
}

fn factorial(n: usize) -> Rational {
    (1..=n).map(|k| int(k as i64)).product()
}

/// Parameters `(alpha, beta, N)`.
///
/// Construction enforces `alpha, beta > N` for even `N` and
/// `alpha, beta > -1` for odd `N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HahnParams {
    #[serde(with = "serde_rational")]
    alpha: Rational,
    #[serde(with = "serde_rational")]
    beta: Rational,
    #[serde(rename = "N")]
    n: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecurrencePair {
    #[serde(with = "serde_rational")]
    pub b: Rational,
    #[serde(with = "serde_rational")]
    pub u: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridPoint {
    pub s: usize,
    #[serde(with = "serde_rational")]
    pub x: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightTable {
    /// `omega_s`, indexed by grid position.
    #[serde(with = "serde_rational_vec")]
    pub omega: Vec<Rational>,
    /// `v_n`, indexed by degree.
    #[serde(with = "serde_rational_vec")]
    pub v: Vec<Rational>,
}

/// Gram matrix `G[n][m] = sum_s omega_s Q_n(x_s) Q_m(x_s)` next to the norms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramReport {
    pub gram: RMatrix,
    #[serde(with = "serde_rational_vec")]
    pub norms: Vec<Rational>,
}

impl GramReport {
    /// Returns the first entry where the Gram matrix differs from `diag(v)`.
    pub fn check(&self) -> Result<()> {
        let dim = self.gram.dim();
        for n in 0..dim {
            for m in 0..dim {
                let expected = if n == m { self.norms[n].clone() } else { Rational::zero() };
                let residual = &self.gram[(n, m)] - &expected;
                if !residual.is_zero() {
                    return Err(Error::OrthogonalityViolation {
                        n,
                        m,
                        residual: residual.to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

impl HahnParams {
    pub fn new(alpha: Rational, beta: Rational, n: usize) -> Result<Self> {
        let bound = if n % 2 == 0 { int(n as i64) } else { int(-1) };
        if alpha <= bound || beta <= bound {
            let rule = if n % 2 == 0 {
                format!("N = {n} is even, so alpha > {n} and beta > {n} are required")
            } else {
                format!("N = {n} is odd, so alpha > -1 and beta > -1 are required")
            };
            return Err(Error::Regime(format!(
                "positivity regime violated (alpha = {alpha}, beta = {beta}): {rule}"
            )));
        }
        Ok(HahnParams { alpha, beta, n })
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    /// Degree bound `N`; the family has `N + 1` members.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn is_even(&self) -> bool {
        self.n % 2 == 0
    }

    pub fn xi(&self) -> Rational {
        if self.is_even() {
            (&self.beta - int(self.n as i64 + 1)) / int(2)
        } else {
            &self.alpha / int(2)
        }
    }

    pub fn zeta(&self) -> Rational {
        if self.is_even() {
            (&self.alpha - int(self.n as i64 + 1)) / int(2)
        } else {
            &self.beta / int(2)
        }
    }

    /// `b_n` and `u_n` for `0 <= n <= N + 1`.
    pub fn recurrence_coefficients(&self, n: usize) -> RecurrencePair {
        assert!(n <= self.n + 1, "recurrence index {n} exceeds N + 1");
        let (xi, zeta) = (self.xi(), self.zeta());
        let inner = if self.is_even() { &xi + &zeta } else { &xi - &zeta };
        let b = parity_sign(n + 1) * inner * int(2) - Rational::one();
        let u = int(4) * mu_number(n, &xi) * mu_number(self.n + 1 - n, &zeta);
        RecurrencePair { b, u }
    }

    /// `Q_0(x), ..., Q_{N+1}(x)` from the recurrence. The last entry is the
    /// characteristic polynomial of the Jacobi matrix and vanishes on the grid.
    pub fn eval_all(&self, x: &Rational) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.n + 2);
        let mut prev = Rational::zero();
        let mut cur = Rational::one();
        out.push(cur.clone());
        for k in 0..=self.n {
            let RecurrencePair { b, u } = self.recurrence_coefficients(k);
            let next = (x - &b) * &cur - &u * &prev;
            prev = std::mem::replace(&mut cur, next);
            out.push(cur.clone());
        }
        out
    }

    /// Monic `Q_n(x)` via `Q_{n+1} = (x - b_n) Q_n - u_n Q_{n-1}`.
    pub fn eval_recurrence(&self, n: usize, x: &Rational) -> Rational {
        assert!(n <= self.n, "degree {n} exceeds N = {}", self.n);
        let mut prev = Rational::zero();
        let mut cur = Rational::one();
        for k in 0..n {
            let RecurrencePair { b, u } = self.recurrence_coefficients(k);
            let next = (x - &b) * &cur - &u * &prev;
            prev = std::mem::replace(&mut cur, next);
        }
        cur
    }

    /// `Q_n(x)` through its terminating 3F2 representation.
    pub fn eval_hypergeometric(&self, n: usize, x: &Rational) -> Result<Rational> {
        assert!(n <= self.n, "degree {n} exceeds N = {}", self.n);
        let (a, b) = (&self.alpha, &self.beta);
        let m = n / 2;
        let minus_m = int(-(m as i64));
        let sixteen_m = int(16).pow(m as i32);
        let shift = (x + int(1)) / int(4);
        let big_n = int(self.n as i64);
        let one = Rational::one();
        let half = rat(1, 2);

        if self.is_even() {
            let delta = &half - (a + b) / int(4);
            let upper2 = &delta + &shift;
            let upper3 = &delta - &shift;
            let lower2 = &one - a / int(2);
            if n % 2 == 0 {
                let lower1 = -&big_n / int(2);
                let gamma = &sixteen_m * pochhammer(&lower1, m) * pochhammer(&lower2, m);
                let f = hypergeometric_3f2_terminating(&minus_m, &upper2, &upper3, &lower1, &lower2, &one)?;
                Ok(gamma * f)
            } else {
                let lower1 = &one - &big_n / int(2);
                let tau = int(2) * &big_n + int(2) - a - b;
                let gamma = &sixteen_m * pochhammer(&lower1, m) * pochhammer(&lower2, m);
                let f = hypergeometric_3f2_terminating(&minus_m, &upper2, &upper3, &lower1, &lower2, &one)?;
                Ok(gamma * (x + &one - tau) * f)
            }
        } else {
            let eta = (a + b + int(2)) / int(4);
            let upper2 = &eta + &shift;
            let upper3 = &eta - &shift;
            let lower1 = (&one - &big_n) / int(2);
            if n % 2 == 0 {
                let lower2 = (a + &one) / int(2);
                let phi = &sixteen_m * pochhammer(&lower1, m) * pochhammer(&lower2, m);
                let f = hypergeometric_3f2_terminating(&minus_m, &upper2, &upper3, &lower1, &lower2, &one)?;
                Ok(phi * f)
            } else {
                let lower2 = (a + int(3)) / int(2);
                let phi = &sixteen_m * pochhammer(&lower1, m) * pochhammer(&lower2, m);
                let f = hypergeometric_3f2_terminating(&minus_m, &upper2, &upper3, &lower1, &lower2, &one)?;
                Ok(phi * (x + &one + a - b) * f)
            }
        }
    }

    /// Grid point `x_s`.
    pub fn grid(&self, s: usize) -> GridPoint {
        assert!(s <= self.n, "grid index {s} exceeds N = {}", self.n);
        let base = int(2 * s as i64 + 1);
        let x = if self.is_even() {
            parity_sign(s) * (base - &self.alpha - &self.beta)
        } else {
            parity_sign(s) * (base + &self.alpha + &self.beta)
        };
        GridPoint { s, x }
    }

    pub fn grid_values(&self) -> Vec<Rational> {
        (0..=self.n).map(|s| self.grid(s).x).collect()
    }

    /// Weight `omega_s` via the split `s = 2j + q`.
    pub fn omega(&self, s: usize) -> Rational {
        let (j, q) = (s / 2, s % 2);
        let (a, b) = (&self.alpha, &self.beta);
        let half_n = int(self.n as i64) / int(2);
        let one = Rational::one();
        let sign = parity_sign(j);
        if self.is_even() {
            sign * pochhammer(&-&half_n, j + q) / factorial(j)
                * pochhammer(&(&one - a / int(2)), j)
                * pochhammer(&(&one - a / int(2) - b / int(2)), j)
                / (pochhammer(&(&one - b / int(2)), j)
                    * pochhammer(&(&half_n + &one - a / int(2) - b / int(2)), j + q))
        } else {
            let half = rat(1, 2);
            sign * pochhammer(&-((&int(self.n as i64) - &one) / int(2)), j) / factorial(j)
                * pochhammer(&(&half + a / int(2)), j + q)
                * pochhammer(&(&one + a / int(2) + b / int(2)), j)
                / (pochhammer(&(&half + b / int(2)), j + q)
                    * pochhammer(&(&half_n + rat(3, 2) + a / int(2) + b / int(2)), j))
        }
    }

    /// Squared norm `v_n` via the split `n = 2j + q`.
    pub fn norm(&self, n: usize) -> Rational {
        let (j, q) = (n / 2, n % 2);
        let (a, b) = (&self.alpha, &self.beta);
        let one = Rational::one();
        let big_n = int(self.n as i64);
        let lead = parity_sign(q) * int(16).pow((2 * j + q) as i32) * factorial(j);
        if self.is_even() {
            let h = self.n / 2;
            lead * pochhammer(&(&one - a / int(2)), j)
                * pochhammer(&(-&big_n / int(2)), j + q)
                * pochhammer(&(b / int(2) - &big_n / int(2)), j + q)
                * (pochhammer(&(&one - (a + b) / int(2)), h) / pochhammer(&(&one - b / int(2)), h))
        } else {
            // ceil(N/2) = floor(N/2) + 1 for odd N
            let c = self.n / 2 + 1;
            let half = rat(1, 2);
            lead * pochhammer(&(&half + a / int(2)), j + q)
                * pochhammer(&(&half - &big_n / int(2)), j)
                * pochhammer(&(-(b / int(2)) - &big_n / int(2)), j + q)
                * (pochhammer(&(&one + (a + b) / int(2)), c) / pochhammer(&((b + &one) / int(2)), c))
        }
    }

    pub fn weights(&self) -> WeightTable {
        WeightTable {
            omega: (0..=self.n).map(|s| self.omega(s)).collect(),
            v: (0..=self.n).map(|n| self.norm(n)).collect(),
        }
    }

    /// `Q_n(x_s)` for all `n, s`, rows indexed by degree.
    pub fn value_table(&self) -> Vec<Vec<Rational>> {
        let grid = self.grid_values();
        let cols: Vec<Vec<Rational>> = grid.iter().map(|x| self.eval_all(x)).collect();
        (0..=self.n)
            .map(|n| cols.iter().map(|c| c[n].clone()).collect())
            .collect()
    }

    /// Checks `sum_s omega_s Q_n(x_s) Q_m(x_s) = v_n delta_{nm}` exactly.
    pub fn verify_orthogonality(&self) -> Result<GramReport> {
        let report = self.gram();
        report.check()?;
        Ok(report)
    }

    pub fn gram(&self) -> GramReport {
        let weights = self.weights();
        let values = self.value_table();
        let gram = RMatrix::from_fn(self.dim(), |n, m| {
            (0..=self.n)
                .map(|s| &weights.omega[s] * &values[n][s] * &values[m][s])
                .sum()
        });
        GramReport {
            gram,
            norms: weights.v,
        }
    }

    /// True when every `u_n` (1..=N), `omega_s` and `v_n` is positive.
    pub fn positivity_holds(&self) -> bool {
        let w = self.weights();
        (1..=self.n).all(|n| self.recurrence_coefficients(n).u.is_positive())
            && w.omega.iter().all(Signed::is_positive)
            && w.v.iter().all(Signed::is_positive)
    }
}
