use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{parse_rational, Rational};

/// Dense square matrix over [`Rational`], stored row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RMatrix {
    dim: usize,
    data: Vec<Rational>,
}

impl RMatrix {
    pub fn zeros(dim: usize) -> Self {
        RMatrix {
            dim,
            data: vec![Rational::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, Rational::one())
    }

    pub fn scalar(dim: usize, value: Rational) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = value.clone();
        }
        m
    }

    pub fn from_diag<I: IntoIterator<Item = Rational>>(diag: I) -> Self {
        let diag: Vec<Rational> = diag.into_iter().collect();
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.into_iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from rows. Panics unless the rows form a square.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        RMatrix {
            dim,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Builds a matrix from a column list. Panics unless square.
    pub fn from_columns(cols: &[Vec<Rational>]) -> Self {
        let dim = cols.len();
        let mut m = Self::zeros(dim);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), dim, "matrix must be square");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        RMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&Rational> {
        (i < self.dim && j < self.dim).then(|| &self.data[i * self.dim + j])
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.dim).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<Rational> {
        (0..self.dim).map(|i| self[(i, i)].clone()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        RMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn trace(&self) -> Rational {
        (0..self.dim).map(|i| &self[(i, i)]).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        self.bandwidth() == 0
    }

    /// `Some(c)` iff the matrix equals `c * I`.
    pub fn as_scalar(&self) -> Option<Rational> {
        if self.dim == 0 {
            return Some(Rational::zero());
        }
        let c = self[(0, 0)].clone();
        (self.is_diagonal() && self.diagonal().iter().all(|d| *d == c)).then_some(c)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `[A, B] = AB - BA`
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// `{A, B} = AB + BA`
    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.dim);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Smallest `b` such that every entry with `|i - j| > b` vanishes.
    pub fn bandwidth(&self) -> usize {
        let mut b = 0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if !self[(i, j)].is_zero() {
                    b = b.max(i.abs_diff(j));
                }
            }
        }
        b
    }

    /// Exact inverse by Gauss-Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] /= &p;
                inv[(col, j)] /= &p;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in 0..n {
                    let t = &f * &a[(col, j)];
                    a[(r, j)] -= t;
                    let t = &f * &inv[(col, j)];
                    inv[(r, j)] -= t;
                }
            }
        }
        Some(inv)
    }

    pub fn determinant(&self) -> Rational {
        let n = self.dim;
        let mut a = self.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return Rational::zero();
            };
            if pivot != col {
                a.swap_rows(col, pivot);
                det = -det;
            }
            let p = a[(col, col)].clone();
            det *= &p;
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = &a[(r, col)] / &p;
                for j in col..n {
                    let t = &f * &a[(col, j)];
                    a[(r, j)] -= t;
                }
            }
        }
        det
    }

    pub fn rank(&self) -> usize {
        self.dim - self.nullspace().len()
    }

    /// Exact basis of `{v : M v = 0}`, empty iff the matrix is nonsingular.
    ///
    /// Each basis vector has a 1 in its free column and zeros in the other
    /// free columns (reduced row echelon convention).
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let rows = self.rows();
        super::linsolve::nullspace_rect(&rows, self.dim)
    }

    /// Coefficients `c_0, ..., c_n` of `det(t I - M) = sum c_k t^k`
    /// (Faddeev-LeVerrier; `c_n = 1`).
    pub fn char_poly(&self) -> Vec<Rational> {
        let n = self.dim;
        let mut coeffs = vec![Rational::zero(); n + 1];
        coeffs[n] = Rational::one();
        let mut m = Self::zeros(n);
        for k in 1..=n {
            let mut next = self * &m;
            for i in 0..n {
                next[(i, i)] += &coeffs[n - k + 1];
            }
            let am = self * &next;
            coeffs[n - k] = -am.trace() / Rational::from_integer(k.into());
            m = next;
        }
        coeffs
    }

    /// True when the eigenvalue multiset equals `values` (compared through
    /// the characteristic polynomial).
    pub fn has_spectrum(&self, values: &[Rational]) -> bool {
        values.len() == self.dim && self.char_poly() == super::poly_from_roots(values)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.dim {
            self.data.swap(a * self.dim + j, b * self.dim + j);
        }
    }

    /// Conjugation `T^{-1} M T` by an invertible matrix.
    pub fn conjugate_by(&self, t: &Self, t_inv: &Self) -> Self {
        &(t_inv * self) * t
    }
}

impl Index<(usize, usize)> for RMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        assert!(i < self.dim && j < self.dim, "index ({i},{j}) out of bounds");
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for RMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        assert!(i < self.dim && j < self.dim, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.dim + j]
    }
}

impl<'a> Add<&'a RMatrix> for &'a RMatrix {
    type Output = RMatrix;
    fn add(self, rhs: &RMatrix) -> RMatrix {
        assert_eq!(self.dim, rhs.dim);
        RMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a RMatrix> for &'a RMatrix {
    type Output = RMatrix;
    fn sub(self, rhs: &RMatrix) -> RMatrix {
        assert_eq!(self.dim, rhs.dim);
        RMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a RMatrix> for &'a RMatrix {
    type Output = RMatrix;
    fn mul(self, rhs: &RMatrix) -> RMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = RMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &rhs.data[k * n + j];
                    if !b.is_zero() {
                        out.data[i * n + j] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl Neg for &RMatrix {
    type Output = RMatrix;
    fn neg(self) -> RMatrix {
        RMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }
}

impl Neg for RMatrix {
    type Output = RMatrix;
    fn neg(self) -> RMatrix {
        -&self
    }
}

impl fmt::Display for RMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            let cells: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for RMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.dim)
            .map(|i| self.row(i).iter().map(|x| x.to_string()).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(D::Error::custom("matrix rows must form a square"));
        }
        let rows = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| parse_rational(s).map_err(D::Error::custom))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RMatrix::from_rows(rows))
    }
}
