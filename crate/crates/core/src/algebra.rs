//! The algebra `H` with generators `K1, K2, K3 = [K1, K2]` and the involution
//! `P`, realized on the span of `psi_0 .. psi_N`:
//!
//! * `K1 = diag(0, 1, .., N)`, `P = diag(1, -1, .., (-1)^N)`;
//! * `2 K2` is the Jacobi matrix of the monic dual -1 Hahn recurrence, with
//!   `b_n` on the diagonal, `u_n` at `(n, n-1)` and `1` at `(n, n+1)`.
//!
//! Row `n` of `2 K2` reads `x Q_n = Q_{n+1} + b_n Q_n + u_n Q_{n-1}`, so the
//! columns `(Q_0(x_s), .., Q_N(x_s))` of the transition matrix are
//! eigenvectors with eigenvalue `x_s / 2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{int, parity_sign, rat, serde_rational, Rational, RMatrix};
use crate::hahn::HahnParams;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructureConstants {
    #[serde(with = "serde_rational")]
    pub nu: Rational,
    #[serde(with = "serde_rational")]
    pub sigma: Rational,
    #[serde(with = "serde_rational")]
    pub rho: Rational,
}

impl StructureConstants {
    /// Value taken by the Casimir element: `nu^2 + 2 nu - sigma - rho - 1/4`.
    pub fn casimir_value(&self) -> Rational {
        &self.nu * &self.nu + int(2) * &self.nu - &self.sigma - &self.rho - rat(1, 4)
    }

    /// `chi = (sigma - nu rho) / 4`, the constant of the shifted presentation.
    pub fn chi(&self) -> Rational {
        (&self.sigma - &self.nu * &self.rho) / int(4)
    }
}

pub fn structure_constants(p: &HahnParams) -> StructureConstants {
    let (a, b) = (p.alpha(), p.beta());
    let n = int(p.n() as i64);
    if p.is_even() {
        StructureConstants {
            nu: (a + b - int(2) * &n - int(2)) / int(2),
            sigma: a - b + int(2) * &n * (&n + int(1) - b),
            rho: b - a - int(2) * &n,
        }
    } else {
        StructureConstants {
            nu: (a - b) / int(2),
            sigma: -(a + b + int(2) * a * b + int(2) * &n * a),
            rho: a - b - int(2) * &n,
        }
    }
}

/// Matrices for `K1, K2, K3, P` together with the constants they should obey.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorSet {
    pub k1: RMatrix,
    pub k2: RMatrix,
    pub k3: RMatrix,
    pub p: RMatrix,
    pub constants: StructureConstants,
}

impl GeneratorSet {
    /// Assembles a set with `K3 := [K1, K2]`.
    pub fn new(k1: RMatrix, k2: RMatrix, p: RMatrix, constants: StructureConstants) -> Self {
        let k3 = k1.commutator(&k2);
        GeneratorSet { k1, k2, k3, p, constants }
    }

    pub fn dim(&self) -> usize {
        self.k1.dim()
    }

    /// `T^{-1} X T` applied to every generator.
    pub fn conjugate(&self, t: &RMatrix, t_inv: &RMatrix) -> Self {
        GeneratorSet {
            k1: self.k1.conjugate_by(t, t_inv),
            k2: self.k2.conjugate_by(t, t_inv),
            k3: self.k3.conjugate_by(t, t_inv),
            p: self.p.conjugate_by(t, t_inv),
            constants: self.constants.clone(),
        }
    }

    /// Residual `lhs - rhs` of each defining relation, in checking order.
    pub fn relation_residuals(&self) -> Vec<(&'static str, RMatrix)> {
        let n = self.dim();
        let id = RMatrix::identity(n);
        let StructureConstants { nu, sigma, rho } = &self.constants;
        let (k1, k2, k3, p) = (&self.k1, &self.k2, &self.k3, &self.p);
        let k1p = k1 * p;
        let k3p = k3 * p;

        let r_pp = &(p * p) - &id;
        let r_k1p = k1.commutator(p);
        let r_k2p = &(&k2.anticommutator(p) + p) + &id.scale(&(int(2) * nu));
        let r_k3p = k3.anticommutator(p);
        let r_k1k2 = &k1.commutator(k2) - k3;
        let r_k1k3 = {
            let rhs = &(k2 + &p.scale(nu)) + &id.scale(&rat(1, 2));
            &k1.commutator(k3) - &rhs
        };
        let r_k3k2 = {
            let mut rhs = k1.scale(&int(4));
            rhs = &rhs + &k1p.scale(&(int(4) * nu));
            rhs = &rhs - &k3p.scale(&(int(2) * nu));
            rhs = &rhs + &p.scale(sigma);
            rhs = &rhs + &id.scale(rho);
            &k3.commutator(k2) - &rhs
        };
        vec![
            ("P^2 = 1", r_pp),
            ("[K1,P] = 0", r_k1p),
            ("{K2,P} = -P - 2nu", r_k2p),
            ("{K3,P} = 0", r_k3p),
            ("[K1,K2] = K3", r_k1k2),
            ("[K1,K3] = K2 + nu P + 1/2", r_k1k3),
            ("[K3,K2] = 4K1 + 4nu K1P - 2nu K3P + sigma P + rho", r_k3k2),
        ]
    }
}

/// Names of the relations that passed, in checking order.
#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub passed: Vec<&'static str>,
}

/// Checks the seven defining relations exactly; the first failure is
/// returned with its residual matrix.
pub fn verify_relations(g: &GeneratorSet) -> Result<RelationReport> {
    let mut passed = Vec::new();
    for (name, residual) in g.relation_residuals() {
        if !residual.is_zero() {
            return Err(Error::relation(name, residual));
        }
        passed.push(name);
    }
    Ok(RelationReport { passed })
}

/// The realization built from the recurrence coefficients.
pub fn build_realization(p: &HahnParams) -> GeneratorSet {
    let dim = p.dim();
    let k1 = RMatrix::from_diag((0..dim).map(|n| int(n as i64)));
    let parity = RMatrix::from_diag((0..dim).map(parity_sign));
    let half = rat(1, 2);
    let mut k2 = RMatrix::zeros(dim);
    for n in 0..dim {
        let rc = p.recurrence_coefficients(n);
        k2[(n, n)] = &rc.b * &half;
        if n > 0 {
            k2[(n, n - 1)] = &rc.u * &half;
        }
        if n + 1 < dim {
            k2[(n, n + 1)] = half.clone();
        }
    }
    GeneratorSet::new(k1, k2, parity, structure_constants(p))
}

/// `Q_H = 4 K1^2 + K2^2 - K3^2 + K2 + 2 rho K1 + 2 nu P`.
pub fn casimir_h(g: &GeneratorSet) -> RMatrix {
    let StructureConstants { nu, rho, .. } = &g.constants;
    let mut q = (&g.k1 * &g.k1).scale(&int(4));
    q = &q + &(&g.k2 * &g.k2);
    q = &q - &(&g.k3 * &g.k3);
    q = &q + &g.k2;
    q = &q + &g.k1.scale(&(int(2) * rho));
    &q + &g.p.scale(&(int(2) * nu))
}

/// Checks that `Q_H` is the scalar `nu^2 + 2nu - sigma - rho - 1/4` and
/// commutes with every generator.
pub fn verify_casimir(g: &GeneratorSet) -> Result<Rational> {
    let q = casimir_h(g);
    for (name, x) in [("K1", &g.k1), ("K2", &g.k2), ("K3", &g.k3), ("P", &g.p)] {
        let c = q.commutator(x);
        if !c.is_zero() {
            return Err(Error::relation(&format!("[Q_H,{name}] = 0"), c));
        }
    }
    let expected = g.constants.casimir_value();
    let residual = &q - &RMatrix::scalar(g.dim(), expected.clone());
    if !residual.is_zero() {
        return Err(Error::relation("Q_H = q_H I", residual));
    }
    Ok(expected)
}

/// `S[i][j] = Q_i(x_j)` and its exact inverse.
#[derive(Clone, Debug, Serialize)]
pub struct TransitionMatrix {
    pub s: RMatrix,
    pub s_inv: RMatrix,
}

/// Builds `S` and checks `K2 S = S diag(x_j / 2)`.
///
/// Column `j` of `S` is the eigenvector of `K2` for `x_j / 2`, normalized so
/// that its first entry `Q_0 = 1`; columns follow the grid order.
pub fn transition_matrix(p: &HahnParams) -> Result<TransitionMatrix> {
    let dim = p.dim();
    let values = p.value_table();
    let s = RMatrix::from_fn(dim, |i, j| values[i][j].clone());
    let s_inv = s.inverse().ok_or(Error::SingularTransition)?;
    let k2 = build_realization(p).k2;
    let half_grid = RMatrix::from_diag(p.grid_values().into_iter().map(|x| x * rat(1, 2)));
    let residual = &(&k2 * &s) - &(&s * &half_grid);
    if !residual.is_zero() {
        return Err(Error::relation("K2 S = S diag(x/2)", residual));
    }
    Ok(TransitionMatrix { s, s_inv })
}

/// `K1` written in the eigenbasis of `K2` (columns ordered by grid index).
pub fn conjugated_k1(p: &HahnParams) -> Result<RMatrix> {
    let t = transition_matrix(p)?;
    Ok(build_realization(p).k1.conjugate_by(&t.s, &t.s_inv))
}

#[derive(Clone, Debug, Serialize)]
pub struct PentadiagonalReport {
    pub bandwidth: usize,
    pub conjugated_k1: RMatrix,
}

/// `S^{-1} K1 S` has bandwidth at most two and spectrum `{0, .., N}`.
pub fn verify_pentadiagonality(p: &HahnParams) -> Result<PentadiagonalReport> {
    let m = conjugated_k1(p)?;
    let bandwidth = m.bandwidth();
    if bandwidth > 2 {
        return Err(Error::BandwidthViolation { bandwidth, limit: 2 });
    }
    let spectrum: Vec<Rational> = (0..p.dim()).map(|n| int(n as i64)).collect();
    if !m.has_spectrum(&spectrum) {
        return Err(Error::SpectrumMismatch(
            "conjugated K1 does not have spectrum {0, .., N}".into(),
        ));
    }
    Ok(PentadiagonalReport {
        bandwidth,
        conjugated_k1: m,
    })
}

/// Shifted generators in which `H` reads as a two-parameter extension of
/// `u(2)` by the involution `P`.
#[derive(Clone, Debug, Serialize)]
pub struct TildeGenerators {
    pub k1: RMatrix,
    pub k2: RMatrix,
    pub k3: RMatrix,
    pub p: RMatrix,
    #[serde(with = "serde_rational")]
    pub nu: Rational,
    #[serde(with = "serde_rational")]
    pub chi: Rational,
}

impl TildeGenerators {
    pub fn relation_residuals(&self) -> Vec<(&'static str, RMatrix)> {
        let (k1, k2, k3, p) = (&self.k1, &self.k2, &self.k3, &self.p);
        let r_k3k2 = {
            let rhs = &(k1 + &(k1 * p).scale(&self.nu)) + &p.scale(&self.chi);
            &k3.commutator(k2) - &rhs
        };
        vec![
            ("[~K1,P] = 0", k1.commutator(p)),
            ("{~K2,P} = 0", k2.anticommutator(p)),
            ("{~K3,P} = 0", k3.anticommutator(p)),
            ("[~K1,~K2] = ~K3", &k1.commutator(k2) - k3),
            ("[~K1,~K3] = ~K2", &k1.commutator(k3) - k2),
            ("[~K3,~K2] = ~K1 + nu ~K1 P + chi P", r_k3k2),
        ]
    }

    /// `~K1^2 + ~K2^2 - ~K3^2 + (nu/2) P`
    pub fn casimir(&self) -> RMatrix {
        let q = &(&(&self.k1 * &self.k1) + &(&self.k2 * &self.k2)) - &(&self.k3 * &self.k3);
        &q + &self.p.scale(&(&self.nu / int(2)))
    }
}

/// `~K1 = K1 + rho/4`, `~K2 = (K2 + nu P + 1/2) / 2`, `~K3 = K3 / 2`.
pub fn tilde_presentation(g: &GeneratorSet) -> TildeGenerators {
    let n = g.dim();
    let StructureConstants { nu, rho, .. } = &g.constants;
    let half = rat(1, 2);
    let k1 = &g.k1 + &RMatrix::scalar(n, rho / int(4));
    let k2 = (&(&g.k2 + &g.p.scale(nu)) + &RMatrix::scalar(n, half.clone())).scale(&half);
    let k3 = g.k3.scale(&half);
    TildeGenerators {
        k1,
        k2,
        k3,
        p: g.p.clone(),
        nu: nu.clone(),
        chi: g.constants.chi(),
    }
}

/// Verifies the shifted relations and returns the scalar value of `~Q`.
pub fn verify_tilde(t: &TildeGenerators) -> Result<Rational> {
    for (name, residual) in t.relation_residuals() {
        if !residual.is_zero() {
            return Err(Error::relation(name, residual));
        }
    }
    let q = t.casimir();
    q.as_scalar()
        .ok_or_else(|| Error::relation("~Q scalar", &q - &RMatrix::scalar(q.dim(), q[(0, 0)].clone())))
}
