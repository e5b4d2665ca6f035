//! Ladder modules of `sl_{-1}(2)`, their coupling, and Clebsch-Gordan
//! coefficients.
//!
//! Everything is written in the scaled basis `f_n = e_n / sqrt([n]_mu!)`,
//! where all operator entries are rational. The coupled problem is solved on
//! the invariant subspace spanned by `g_n = f_n (x) f_{N-n}`, so no
//! truncation enters the tensor-product computation.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{build_realization, structure_constants, verify_relations, GeneratorSet, StructureConstants};
use crate::error::{Error, Result};
use crate::exact::{int, parity_sign, rat, serde_rational, sign, Rational, RMatrix};
use crate::hahn::{mu_factorial, mu_number, HahnParams};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleLabel {
    pub epsilon: i8,
    #[serde(with = "serde_rational")]
    pub mu: Rational,
}

impl ModuleLabel {
    pub fn new(epsilon: i8, mu: Rational) -> Result<Self> {
        if epsilon != 1 && epsilon != -1 {
            return Err(Error::InvalidInput(format!("epsilon must be +1 or -1, got {epsilon}")));
        }
        if mu.is_negative() {
            return Err(Error::InvalidInput(format!("mu must be non-negative, got {mu}")));
        }
        Ok(ModuleLabel { epsilon, mu })
    }

    fn eps(&self) -> Rational {
        int(self.epsilon as i64)
    }

    /// Eigenvalue of `R` on `f_n`.
    fn r_value(&self, n: usize) -> Rational {
        self.eps() * parity_sign(n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    A0,
    APlus,
    AMinus,
    R,
    Q,
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A0" => Ok(Generator::A0),
            "A+" | "Aplus" => Ok(Generator::APlus),
            "A-" | "Aminus" => Ok(Generator::AMinus),
            "R" => Ok(Generator::R),
            "Q" => Ok(Generator::Q),
            _ => Err(Error::Parse(format!("unknown generator `{s}`"))),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Generator::A0 => "A0",
            Generator::APlus => "A+",
            Generator::AMinus => "A-",
            Generator::R => "R",
            Generator::Q => "Q",
        };
        f.write_str(s)
    }
}

/// `cutoff x cutoff` truncation of a generator in the scaled basis.
pub fn module_action(label: &ModuleLabel, generator: Generator, cutoff: usize) -> Result<RMatrix> {
    if cutoff == 0 {
        return Err(Error::InvalidInput("cutoff must be at least 1".into()));
    }
    let mu = &label.mu;
    let m = match generator {
        Generator::A0 => RMatrix::from_diag((0..cutoff).map(|n| int(n as i64) + mu + rat(1, 2))),
        Generator::APlus => RMatrix::from_fn(cutoff, |i, j| {
            if i == j + 1 {
                mu_number(i, mu)
            } else {
                Rational::zero()
            }
        }),
        Generator::AMinus => RMatrix::from_fn(cutoff, |i, j| {
            if j == i + 1 {
                int(1)
            } else {
                Rational::zero()
            }
        }),
        Generator::R => RMatrix::from_diag((0..cutoff).map(|n| label.r_value(n))),
        Generator::Q => {
            let ap = module_action(label, Generator::APlus, cutoff)?;
            let am = module_action(label, Generator::AMinus, cutoff)?;
            let a0 = module_action(label, Generator::A0, cutoff)?;
            let r = module_action(label, Generator::R, cutoff)?;
            let q = &(&(&ap * &am) * &r) - &(&a0 * &r);
            &q + &r.scale(&rat(1, 2))
        }
    };
    Ok(m)
}

/// Zeroes the last row, which truncation corrupts for products `A- A+`.
fn safe_rows(m: &RMatrix) -> RMatrix {
    let last = m.dim() - 1;
    RMatrix::from_fn(m.dim(), |i, j| if i == last { Rational::zero() } else { m[(i, j)].clone() })
}

#[derive(Clone, Debug, Serialize)]
pub struct ParaboseReport {
    pub cutoff: usize,
    pub rows_checked: usize,
}

/// `[A-, A+] = 1 + 2 eps mu R` on rows `0 .. cutoff-2`.
pub fn verify_parabose(label: &ModuleLabel, cutoff: usize) -> Result<ParaboseReport> {
    if cutoff < 3 {
        return Err(Error::InvalidInput("cutoff must be at least 3".into()));
    }
    let ap = module_action(label, Generator::APlus, cutoff)?;
    let am = module_action(label, Generator::AMinus, cutoff)?;
    let r = module_action(label, Generator::R, cutoff)?;
    let rhs = &RMatrix::identity(cutoff) + &r.scale(&(int(2) * label.eps() * &label.mu));
    let residual = safe_rows(&(&am.commutator(&ap) - &rhs));
    if !residual.is_zero() {
        return Err(Error::relation("[A-,A+] = 1 + 2 eps mu R", residual));
    }
    Ok(ParaboseReport {
        cutoff,
        rows_checked: cutoff - 1,
    })
}

/// The remaining defining relations on truncation-safe rows, and `Q = -eps mu`.
pub fn verify_module_relations(label: &ModuleLabel, cutoff: usize) -> Result<()> {
    if cutoff < 3 {
        return Err(Error::InvalidInput("cutoff must be at least 3".into()));
    }
    let get = |g| module_action(label, g, cutoff);
    let (a0, ap, am, r, q) = (
        get(Generator::A0)?,
        get(Generator::APlus)?,
        get(Generator::AMinus)?,
        get(Generator::R)?,
        get(Generator::Q)?,
    );
    let id = RMatrix::identity(cutoff);
    let checks = [
        ("[A0,A+] = A+", &a0.commutator(&ap) - &ap),
        ("[A0,A-] = -A-", &a0.commutator(&am) + &am),
        ("{A+,A-} = 2A0", safe_rows(&(&ap.anticommutator(&am) - &a0.scale(&int(2))))),
        ("{A+,R} = 0", ap.anticommutator(&r)),
        ("{A-,R} = 0", am.anticommutator(&r)),
        ("[A0,R] = 0", a0.commutator(&r)),
        ("R^2 = 1", &(&r * &r) - &id),
        ("Q = -eps mu", &q + &id.scale(&(label.eps() * &label.mu))),
    ];
    for (name, residual) in checks {
        if !residual.is_zero() {
            return Err(Error::relation(name, residual));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingProblem {
    pub a: ModuleLabel,
    pub b: ModuleLabel,
    #[serde(rename = "N")]
    pub n: usize,
}

impl CouplingProblem {
    pub fn new(a: ModuleLabel, b: ModuleLabel, n: usize) -> Self {
        CouplingProblem { a, b, n }
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// `[n]_{mu_a}! [N-n]_{mu_b}!`; the squared norm of `g_n` is its inverse.
    pub fn basis_norm(&self, n: usize) -> Rational {
        mu_factorial(n, &self.a.mu) * mu_factorial(self.n - n, &self.b.mu)
    }

    fn is_standard(&self) -> bool {
        self.a.epsilon == 1 && self.b.epsilon == 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KappaSet {
    pub kappa1: RMatrix,
    pub kappa2: RMatrix,
    pub kappa3: RMatrix,
    pub r: RMatrix,
    /// Coupled Casimir `Q_ab`; `kappa2 = lambda3 Q_ab`.
    pub q_ab: RMatrix,
    #[serde(serialize_with = "crate::exact::serde_rational_vec::serialize")]
    pub lambdas: Vec<Rational>,
}

impl KappaSet {
    /// `lambda1 + lambda2 lambda3`
    pub fn lambda_sum(&self) -> Rational {
        &self.lambdas[0] + &self.lambdas[1] * &self.lambdas[2]
    }

    /// `lambda1 - lambda2 lambda3`
    pub fn lambda_difference(&self) -> Rational {
        &self.lambdas[0] - &self.lambdas[1] * &self.lambdas[2]
    }

    pub fn relation_residuals(&self) -> Vec<(&'static str, RMatrix)> {
        let n = self.kappa1.dim();
        let id = RMatrix::identity(n);
        let l = self.lambda_sum();
        let (k1, k2, k3, r) = (&self.kappa1, &self.kappa2, &self.kappa3, &self.r);
        let r_k2r = &(&k2.anticommutator(r) + r) - &id.scale(&l);
        let r_k1k3 = {
            let rhs = &(k2 - &r.scale(&(&l / int(2)))) + &id.scale(&rat(1, 2));
            &k1.commutator(k3) - &rhs
        };
        let r_k3k2 = {
            let mut rhs = k1.scale(&int(4));
            rhs = &rhs + &(k3 * r).scale(&l);
            rhs = &rhs - &(k1 * r).scale(&(int(2) * &l));
            rhs = &rhs + &r.scale(&(&self.lambdas[3] * self.lambda_difference()));
            &k3.commutator(k2) - &rhs
        };
        vec![
            ("r^2 = 1", &(r * r) - &id),
            ("[k1,r] = 0", k1.commutator(r)),
            ("{k2,r} = -r + (l1 + l2 l3)", r_k2r),
            ("{k3,r} = 0", k3.anticommutator(r)),
            ("[k1,k2] = k3", &k1.commutator(k2) - k3),
            ("[k1,k3] = k2 - (l1 + l2 l3)/2 r + 1/2", r_k1k3),
            ("[k3,k2] = 4k1 + (l1 + l2 l3)(k3 r - 2 k1 r) + l4 (l1 - l2 l3) r", r_k3k2),
        ]
    }

    /// `Q_CG = 4 k1^2 + k2^2 - k3^2 + k2 - (l1 + l2 l3) r`
    pub fn casimir_cg(&self) -> RMatrix {
        let mut q = (&self.kappa1 * &self.kappa1).scale(&int(4));
        q = &q + &(&self.kappa2 * &self.kappa2);
        q = &q - &(&self.kappa3 * &self.kappa3);
        q = &q + &self.kappa2;
        &q - &self.r.scale(&self.lambda_sum())
    }

    /// Scalar value of `Q_CG`: `(l1 - l2 l3)^2 / 4 + l4^2 - 5/4`.
    pub fn casimir_cg_value(&self) -> Rational {
        let d = self.lambda_difference();
        &d * &d / int(4) + &self.lambdas[3] * &self.lambdas[3] - rat(5, 4)
    }
}

/// Checks `Q_CG` against the displayed constant
/// `(l1 + l2 l3)^2 / 4 + l4^2 - 5/4`, which differs from
/// [`KappaSet::casimir_cg_value`] whenever `mu_a mu_b != 0`.
pub fn verify_cg_casimir_displayed(k: &KappaSet) -> Result<Rational> {
    let l = k.lambda_sum();
    let expected = &l * &l / int(4) + &k.lambdas[3] * &k.lambdas[3] - rat(5, 4);
    let residual = &k.casimir_cg() - &RMatrix::scalar(k.kappa1.dim(), expected.clone());
    if !residual.is_zero() {
        return Err(Error::relation("Q_CG = ((l1 + l2 l3)^2 / 4 + l4^2 - 5/4) I", residual));
    }
    Ok(expected)
}

pub fn verify_kappa_relations(k: &KappaSet) -> Result<()> {
    for (name, residual) in k.relation_residuals() {
        if !residual.is_zero() {
            return Err(Error::relation(name, residual));
        }
    }
    Ok(())
}

/// Checks `Q_CG = q_CG I` with `q_CG` from [`KappaSet::casimir_cg_value`].
pub fn verify_cg_casimir(k: &KappaSet) -> Result<Rational> {
    let q = k.casimir_cg();
    let expected = k.casimir_cg_value();
    let residual = &q - &RMatrix::scalar(q.dim(), expected.clone());
    if !residual.is_zero() {
        return Err(Error::relation("Q_CG = q_CG I", residual));
    }
    Ok(expected)
}

/// Builds the coupled operators on `span{g_0 .. g_N}` and self-checks their
/// relations.
pub fn coupled_operators(cp: &CouplingProblem) -> Result<KappaSet> {
    let n_tot = cp.n;
    let dim = cp.dim();
    let (a, b) = (&cp.a, &cp.b);
    let kappa1 = RMatrix::from_diag((0..dim).map(|n| int(n as i64) + (&a.mu - &b.mu - int(n_tot as i64)) / int(2)));
    let ra = RMatrix::from_diag((0..dim).map(|n| a.r_value(n)));
    let rb = RMatrix::from_diag((0..dim).map(|n| b.r_value(n_tot - n)));
    // A- B+ lowers n; A+ B- raises it
    let mut am_bp = RMatrix::zeros(dim);
    let mut ap_bm = RMatrix::zeros(dim);
    for n in 0..dim {
        if n > 0 {
            am_bp[(n - 1, n)] = mu_number(n_tot - n + 1, &b.mu);
        }
        if n < n_tot {
            ap_bm[(n + 1, n)] = mu_number(n + 1, &a.mu);
        }
    }
    let qa = -(a.eps() * &a.mu);
    let qb = -(b.eps() * &b.mu);
    let mut q_ab = &(&am_bp - &ap_bm) * &ra;
    q_ab = &q_ab - &(&ra * &rb).scale(&rat(1, 2));
    q_ab = &q_ab + &rb.scale(&qa);
    q_ab = &q_ab + &ra.scale(&qb);

    let lambdas = vec![
        int(-2) * a.eps() * &a.mu,
        int(-2) * b.eps() * &b.mu,
        parity_sign(n_tot) * a.eps() * b.eps(),
        &a.mu + &b.mu + int(n_tot as i64 + 1),
    ];
    let kappa2 = q_ab.scale(&lambdas[2]);
    let kappa3 = kappa1.commutator(&kappa2);
    let k = KappaSet {
        kappa1,
        kappa2,
        kappa3,
        r: ra,
        q_ab,
        lambdas,
    };
    verify_kappa_relations(&k)?;
    Ok(k)
}

/// An irreducible component `(eps_ab, mu_ab)` of the coupled module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoupledLabel {
    pub s: usize,
    pub epsilon: i8,
    #[serde(with = "serde_rational")]
    pub mu: Rational,
}

impl CoupledLabel {
    /// Eigenvalue of `Q_ab`: `-eps_ab mu_ab`.
    pub fn q(&self) -> Rational {
        -(int(self.epsilon as i64) * &self.mu)
    }
}

/// `mu_ab = mu_a + mu_b + s + 1/2` with `eps_ab = (-1)^s eps_a eps_b`.
pub fn casimir_spectrum(cp: &CouplingProblem) -> Vec<CoupledLabel> {
    (0..cp.dim())
        .map(|s| {
            let parity = if s % 2 == 0 { 1 } else { -1 };
            CoupledLabel {
                s,
                epsilon: parity * cp.a.epsilon * cp.b.epsilon,
                mu: &cp.a.mu + &cp.b.mu + int(s as i64) + rat(1, 2),
            }
        })
        .collect()
}

/// Clebsch-Gordan coefficients `C[n][k]` with rows indexed by `n_a = n` and
/// columns by the coupled component `s = k`.
///
/// The irrational entries are stored as an exact square and a sign.
#[derive(Clone, Debug, Serialize)]
pub struct CGTable {
    pub problem: CouplingProblem,
    pub labels: Vec<CoupledLabel>,
    /// Eigenvalue of `kappa2` for each column.
    #[serde(serialize_with = "crate::exact::serde_rational_vec::serialize")]
    pub eigenvalues: Vec<Rational>,
    pub squares: Vec<Vec<String>>,
    pub signs: Vec<Vec<i8>>,
    #[serde(skip)]
    pub(crate) squares_exact: Vec<Vec<Rational>>,
    /// Eigenvectors of `kappa2` in the scaled basis, one per column.
    #[serde(skip)]
    pub vectors: Vec<Vec<Rational>>,
}

impl CGTable {
    pub fn square(&self, n: usize, k: usize) -> &Rational {
        &self.squares_exact[n][k]
    }

    pub fn sign(&self, n: usize, k: usize) -> i8 {
        self.signs[n][k]
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    /// Floating-point value of `C[n][k]`, for display only.
    pub fn approx(&self, n: usize, k: usize) -> f64 {
        self.sign(n, k) as f64 * crate::exact::to_f64(self.square(n, k)).sqrt()
    }

    /// Column and row orthonormality, checked exactly through the scaled
    /// eigenvectors.
    pub fn verify_orthonormal(&self) -> Result<()> {
        let dim = self.dim();
        let norms: Vec<Rational> = (0..dim).map(|n| self.problem.basis_norm(n)).collect();
        let col_norm: Vec<Rational> = self
            .vectors
            .iter()
            .map(|c| c.iter().zip(&norms).map(|(x, f)| x * x / f).sum())
            .collect();
        for k in 0..dim {
            let total: Rational = (0..dim).map(|n| self.square(n, k).clone()).sum();
            if total != int(1) {
                return Err(Error::OrthogonalityViolation { n: k, m: k, residual: (total - int(1)).to_string() });
            }
            for l in k + 1..dim {
                let dot: Rational = (0..dim).map(|n| &self.vectors[k][n] * &self.vectors[l][n] / &norms[n]).sum();
                if !dot.is_zero() {
                    return Err(Error::OrthogonalityViolation { n: k, m: l, residual: dot.to_string() });
                }
            }
        }
        for n in 0..dim {
            let diag: Rational = (0..dim).map(|k| self.square(n, k).clone()).sum();
            if diag != int(1) {
                return Err(Error::OrthogonalityViolation { n, m: n, residual: (diag - int(1)).to_string() });
            }
            for m in n + 1..dim {
                let dot: Rational = (0..dim)
                    .map(|k| &self.vectors[k][n] * &self.vectors[k][m] / &col_norm[k])
                    .sum();
                if !dot.is_zero() {
                    return Err(Error::OrthogonalityViolation { n, m, residual: dot.to_string() });
                }
            }
        }
        Ok(())
    }
}

pub fn clebsch_gordan(cp: &CouplingProblem) -> Result<CGTable> {
    let kappa = coupled_operators(cp)?;
    let dim = cp.dim();
    let labels = casimir_spectrum(cp);
    let eigenvalues: Vec<Rational> = labels.iter().map(|l| l.q() * &kappa.lambdas[2]).collect();
    if !kappa.kappa2.has_spectrum(&eigenvalues) {
        return Err(Error::SpectrumMismatch("kappa2 spectrum differs from the coupled Casimir labels".into()));
    }
    let norms: Vec<Rational> = (0..dim).map(|n| cp.basis_norm(n)).collect();
    let mut vectors = Vec::with_capacity(dim);
    let mut squares = vec![vec![Rational::zero(); dim]; dim];
    let mut signs = vec![vec![0i8; dim]; dim];
    for (k, ev) in eigenvalues.iter().enumerate() {
        let shifted = &kappa.kappa2 - &RMatrix::scalar(dim, ev.clone());
        let mut null = shifted.nullspace();
        if null.len() != 1 {
            return Err(Error::DegenerateEigenvalue(ev.to_string()));
        }
        let c = null.pop().unwrap();
        let lead = c.iter().position(|x| !x.is_zero()).ok_or(Error::PhaseUndefined(k))?;
        let phase = sign(&c[lead]);
        let total: Rational = c.iter().zip(&norms).map(|(x, f)| x * x / f).sum();
        for n in 0..dim {
            squares[n][k] = &c[n] * &c[n] / (&norms[n] * &total);
            signs[n][k] = sign(&c[n]) * phase;
        }
        vectors.push(c);
    }
    Ok(CGTable {
        problem: cp.clone(),
        labels,
        eigenvalues,
        squares: squares.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect(),
        signs,
        squares_exact: squares,
        vectors,
    })
}

/// Dual -1 Hahn parameters attached to a coupling with `eps_a = eps_b = 1`:
/// `(2mu_b + N + 1, 2mu_a + N + 1)` for even `N`, `(2mu_a, 2mu_b)` for odd.
pub fn cg_mapping(cp: &CouplingProblem) -> Result<HahnParams> {
    let n = int(cp.n as i64);
    let (ma2, mb2) = (int(2) * &cp.a.mu, int(2) * &cp.b.mu);
    if cp.n % 2 == 0 {
        HahnParams::new(mb2 + &n + int(1), ma2 + &n + int(1), cp.n)
    } else {
        HahnParams::new(ma2, mb2, cp.n)
    }
}

/// `z_k = (-1)^{k+1}(2mu_a + 2mu_b + 2k + 1)` (N even) or
/// `(-1)^k(2mu_a + 2mu_b + 2k + 1)` (N odd).
pub fn cg_spectrum_points(cp: &CouplingProblem) -> Vec<Rational> {
    (0..cp.dim())
        .map(|k| {
            let m = int(2) * (&cp.a.mu + &cp.b.mu) + int(2 * k as i64 + 1);
            if cp.n % 2 == 0 {
                -(parity_sign(k) * m)
            } else {
                parity_sign(k) * m
            }
        })
        .collect()
}

/// Grid index `s` with `z_k = x_s`.
pub fn cg_grid_index(cp: &CouplingProblem, k: usize) -> usize {
    if cp.n % 2 == 0 {
        cp.n - k
    } else {
        k
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CgMatchReport {
    pub hahn: HahnParams,
    #[serde(serialize_with = "crate::exact::serde_rational_vec::serialize")]
    pub z: Vec<Rational>,
    /// `sign(C[n][k]) sign(Q_n(z_k))`, constant along each row.
    pub row_gauge: Vec<i8>,
    /// The gauge predicted from the signs of the superdiagonal of `kappa2`.
    pub predicted_row_gauge: Vec<i8>,
    pub signs_match_literally: bool,
}

/// Identifies the Clebsch-Gordan table with dual -1 Hahn data.
///
/// Checks the spectrum of `2 kappa2`, the grid relation, and
/// `C[n][k]^2 = w~_k Q_n(z_k)^2 / v_n` exactly. Signed entries agree with
/// `Q_n(z_k)` up to a row sign `g_n` which is required to be independent of
/// `k`; the report records it. Use [`verify_cg_signed`] for the strict check.
pub fn verify_cg_polynomial_match(cp: &CouplingProblem) -> Result<CgMatchReport> {
    if !cp.is_standard() {
        return Err(Error::InvalidInput("polynomial identification needs eps_a = eps_b = 1".into()));
    }
    let hahn = cg_mapping(cp)?;
    let table = clebsch_gordan(cp)?;
    let kappa = coupled_operators(cp)?;
    let dim = cp.dim();
    let z = cg_spectrum_points(cp);

    if !kappa.kappa2.scale(&int(2)).has_spectrum(&z) {
        return Err(Error::SpectrumMismatch("2 spec(kappa2) differs from {z_k}".into()));
    }
    let grid = hahn.grid_values();
    let w = hahn.weights();
    for k in 0..dim {
        let s = cg_grid_index(cp, k);
        if z[k] != grid[s] {
            return Err(Error::MatchViolation { n: 0, k, detail: format!("z_k = {} but x_{s} = {}", z[k], grid[s]) });
        }
        if table.eigenvalues[k].clone() * int(2) != z[k] {
            return Err(Error::MatchViolation { n: 0, k, detail: "column eigenvalue is not z_k / 2".into() });
        }
    }

    let mut row_gauge = vec![0i8; dim];
    for k in 0..dim {
        let s = cg_grid_index(cp, k);
        let q = hahn.eval_all(&z[k]);
        for n in 0..dim {
            let expected = &w.omega[s] * &q[n] * &q[n] / &w.v[n];
            if *table.square(n, k) != expected {
                return Err(Error::MatchViolation {
                    n,
                    k,
                    detail: format!("C^2 = {} but w~ Q^2 / v = {}", table.square(n, k), expected),
                });
            }
            let qs = sign(&q[n]);
            if qs == 0 {
                continue;
            }
            let g = table.sign(n, k) * qs;
            if row_gauge[n] == 0 {
                row_gauge[n] = g;
            } else if row_gauge[n] != g {
                return Err(Error::MatchViolation { n, k, detail: "sign ratio varies along the row".into() });
            }
        }
    }
    let predicted = predicted_row_gauge(&kappa);
    for n in 0..dim {
        if row_gauge[n] == 0 {
            row_gauge[n] = predicted[n];
        }
    }
    if row_gauge != predicted {
        return Err(Error::MatchViolation { n: 0, k: 0, detail: "row gauge differs from the kappa2 prediction".into() });
    }
    let signs_match_literally = row_gauge.iter().all(|&g| g == 1);
    Ok(CgMatchReport {
        hahn,
        z,
        row_gauge,
        predicted_row_gauge: predicted,
        signs_match_literally,
    })
}

/// `g_n = prod_{j <= n} sign(kappa2[j-1][j])`: the diagonal sign change that
/// turns `kappa2` into a matrix with positive superdiagonal.
fn predicted_row_gauge(k: &KappaSet) -> Vec<i8> {
    let mut g = vec![1i8];
    for j in 1..k.kappa2.dim() {
        let prev = g[j - 1];
        g.push(prev * sign(&k.kappa2[(j - 1, j)]));
    }
    g
}

/// Strict signed comparison: `sign(C[n][k]) = sign(Q_n(z_k))` under the
/// `n = 0` positive phase. Fails at the first disagreeing entry.
pub fn verify_cg_signed(cp: &CouplingProblem) -> Result<()> {
    let report = verify_cg_polynomial_match(cp)?;
    let table = clebsch_gordan(cp)?;
    for k in 0..cp.dim() {
        let q = report.hahn.eval_all(&report.z[k]);
        for n in 0..cp.dim() {
            if table.sign(n, k) != sign(&q[n]) {
                return Err(Error::MatchViolation {
                    n,
                    k,
                    detail: format!("sign(C) = {} but sign(Q_n(z_k)) = {}", table.sign(n, k), sign(&q[n])),
                });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct KappaHReport {
    pub hahn: HahnParams,
    pub constants: StructureConstants,
    /// `c` with `K1 = kappa1 + c`; equals `-rho/4`.
    #[serde(with = "serde_rational")]
    pub shift: Rational,
    #[serde(with = "serde_rational")]
    pub lambda_sum: Rational,
    pub generators: GeneratorSet,
}

/// Shows that `(kappa1 + c, kappa2, r)` realizes `H` for the mapped
/// parameters, and that this is the same representation as the recurrence
/// realization (same `K1`, same spectrum of `K2`).
pub fn verify_kappa_is_h(cp: &CouplingProblem) -> Result<KappaHReport> {
    if !cp.is_standard() {
        return Err(Error::InvalidInput("the H identification needs eps_a = eps_b = 1".into()));
    }
    let hahn = cg_mapping(cp)?;
    let constants = structure_constants(&hahn);
    let k = coupled_operators(cp)?;
    let min = k.kappa1.diagonal().into_iter().min().expect("dimension is positive");
    let shift = -min;
    if shift != -(&constants.rho / int(4)) {
        return Err(Error::MatchViolation {
            n: 0,
            k: 0,
            detail: format!("spectral shift {shift} differs from -rho/4 = {}", -(&constants.rho / int(4))),
        });
    }
    let lambda_sum = k.lambda_sum();
    if lambda_sum != int(-2) * &constants.nu {
        return Err(Error::MatchViolation {
            n: 0,
            k: 0,
            detail: format!("l1 + l2 l3 = {lambda_sum} but -2 nu = {}", int(-2) * &constants.nu),
        });
    }
    let k1 = &k.kappa1 + &RMatrix::scalar(cp.dim(), shift.clone());
    let generators = GeneratorSet::new(k1, k.kappa2.clone(), k.r.clone(), constants.clone());
    verify_relations(&generators)?;
    let primal = build_realization(&hahn);
    if generators.k1 != primal.k1 || generators.p != primal.p {
        return Err(Error::MatchViolation { n: 0, k: 0, detail: "K1 or P differ from the recurrence realization".into() });
    }
    if !generators.k2.scale(&int(2)).has_spectrum(&hahn.grid_values()) {
        return Err(Error::SpectrumMismatch("2 kappa2 does not have the grid spectrum".into()));
    }
    Ok(KappaHReport {
        hahn,
        constants,
        shift,
        lambda_sum,
        generators,
    })
}
