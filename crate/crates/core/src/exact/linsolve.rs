use num_traits::{One, Zero};

use super::Rational;

/// Solution set `particular + span(basis)` of a consistent linear system.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSolution {
    pub particular: Vec<Rational>,
    pub basis: Vec<Vec<Rational>>,
}

impl AffineSolution {
    pub fn is_unique(&self) -> bool {
        self.basis.is_empty()
    }

    /// `particular + sum_i t_i basis_i`
    pub fn point(&self, params: &[Rational]) -> Vec<Rational> {
        assert_eq!(params.len(), self.basis.len());
        let mut x = self.particular.clone();
        for (t, b) in params.iter().zip(&self.basis) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += t * bi;
            }
        }
        x
    }
}

/// Reduced row echelon form of an augmented system, in place.
/// Returns the pivot column of each nonzero row.
fn rref(rows: &mut [Vec<Rational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::one() / &rows[r][c];
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solves `A x = b` exactly for an `m x n` system given row by row.
/// Returns `None` when the system is inconsistent.
pub fn solve_affine(a: &[Vec<Rational>], b: &[Rational], ncols: usize) -> Option<AffineSolution> {
    assert_eq!(a.len(), b.len());
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .filter(|(row, rhs)| !(row.iter().all(Zero::is_zero) && rhs.is_zero()))
        .map(|(row, rhs)| {
            assert_eq!(row.len(), ncols);
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, ncols);
    // an all-zero coefficient row with nonzero right-hand side
    if aug[pivots.len()..].iter().any(|row| !row[ncols].is_zero()) {
        return None;
    }
    let mut particular = vec![Rational::zero(); ncols];
    for (row, &c) in aug.iter().zip(&pivots) {
        particular[c] = row[ncols].clone();
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &c) in aug.iter().zip(&pivots) {
                v[c] = -row[f].clone();
            }
            v
        })
        .collect();
    Some(AffineSolution { particular, basis })
}

pub fn nullspace_rect(a: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let zeros = vec![Rational::zero(); a.len()];
    solve_affine(a, &zeros, ncols)
        .expect("homogeneous systems are consistent")
        .basis
}
