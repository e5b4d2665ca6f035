//! Parameter lattices and the per-cell verification battery behind the
//! `sweep` command.
//!
//! Cells are independent and run on a rayon pool (capped by `MHAHN_THREADS`);
//! results keep lattice order, so reports do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{
    build_realization, tilde_presentation, verify_casimir, verify_pentadiagonality, verify_relations, verify_tilde,
};
use crate::dual_rep::{derive_dual_rep, similarity_to_primal, transcription_notes, verify_dual_rep, FreeParams};
use crate::exact::{int, rat, Rational};
use crate::hahn::HahnParams;
use crate::sl_minus::{
    clebsch_gordan, coupled_operators, verify_cg_casimir, verify_cg_casimir_displayed, verify_cg_polynomial_match, verify_cg_signed,
    verify_module_relations, verify_parabose, CouplingProblem, ModuleLabel,
};

/// Three `(alpha, beta)` pairs per parity, as functions of `N`.
///
/// Even `N` needs `alpha, beta > N`; `(N+1, N+1)` sits on the line
/// `alpha + beta = 2N + 2` where `2 lambda_N + 1` vanishes. Odd `N` needs
/// `alpha, beta > -1`; `(0, 0)` has `alpha + beta = 0`.
pub fn lattice_pairs(n: usize) -> Vec<(Rational, Rational)> {
    let nn = int(n as i64);
    if n % 2 == 0 {
        vec![
            (&nn + int(1), &nn + int(1)),
            (&nn + rat(3, 2), &nn + rat(7, 3)),
            (int(2) * &nn + int(5), &nn + rat(1, 3)),
        ]
    } else {
        vec![(int(3), int(2)), (int(0), int(0)), (rat(-1, 2), rat(5, 3))]
    }
}

pub fn hahn_lattice(max_n: usize) -> Vec<HahnParams> {
    (0..=max_n)
        .flat_map(|n| {
            lattice_pairs(n)
                .into_iter()
                .map(move |(a, b)| HahnParams::new(a, b, n).expect("lattice lies in the positivity regime"))
        })
        .collect()
}

pub fn mu_values() -> Vec<Rational> {
    vec![int(0), rat(1, 2), int(1), rat(3, 2)]
}

pub fn coupling_lattice(max_n: usize) -> Vec<CouplingProblem> {
    let mut out = Vec::new();
    for n in 0..=max_n {
        for ma in mu_values() {
            for mb in mu_values() {
                for (ea, eb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    let a = ModuleLabel::new(ea, ma.clone()).expect("valid label");
                    let b = ModuleLabel::new(eb, mb.clone()).expect("valid label");
                    out.push(CouplingProblem::new(a, b, n));
                }
            }
        }
    }
    out
}

pub fn module_lattice() -> Vec<ModuleLabel> {
    let mut out = Vec::new();
    for e in [1, -1] {
        for mu in [int(0), rat(1, 2), rat(3, 2)] {
            out.push(ModuleLabel::new(e, mu).expect("valid label"));
        }
    }
    out
}

/// Seed for cell `index`, decorrelated from neighbouring cells.
pub fn cell_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// A nonzero rational with small numerator and denominator.
pub fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    let num = rng.gen_range(1..=40i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
    rat(num, rng.gen_range(1..=9i64))
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub criterion: u8,
    pub name: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellReport {
    pub key: String,
    pub checks: Vec<CheckOutcome>,
}

impl CellReport {
    fn new(key: String) -> Self {
        CellReport { key, checks: Vec::new() }
    }

    fn record<T, E: std::fmt::Display>(&mut self, criterion: u8, name: &'static str, r: std::result::Result<T, E>) {
        self.checks.push(CheckOutcome {
            criterion,
            name,
            passed: r.is_ok(),
            detail: r.err().map(|e| e.to_string()),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `key: ok (n checks)` or `key: FAIL name: detail; ...`
    pub fn summary_line(&self) -> String {
        if self.passed() {
            format!("{}: ok ({} checks)", self.key, self.checks.len())
        } else {
            let failed: Vec<String> = self
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("[{}] {}: {}", c.criterion, c.name, c.detail.as_deref().unwrap_or("")))
                .collect();
            format!("{}: FAIL {}", self.key, failed.join("; "))
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub max_n: usize,
    /// Largest `N` for which the dual representation is derived.
    pub dual_max_n: usize,
    pub seed: u64,
    /// Random gauges per cell, in addition to the unit gauge.
    pub gauges: usize,
    /// Adds the displayed Q_CG constant and the strict signed CG comparison.
    pub literal: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            max_n: 9,
            dual_max_n: 9,
            seed: 0,
            gauges: 3,
            literal: false,
        }
    }
}

pub fn hahn_key(p: &HahnParams) -> String {
    format!("hahn alpha={} beta={} N={}", p.alpha(), p.beta(), p.n())
}

pub fn coupling_key(cp: &CouplingProblem) -> String {
    format!(
        "coupling mu_a={} mu_b={} eps_a={} eps_b={} N={}",
        cp.a.mu, cp.b.mu, cp.a.epsilon, cp.b.epsilon, cp.n
    )
}

pub fn module_key(l: &ModuleLabel) -> String {
    format!("module eps={} mu={}", l.epsilon, l.mu)
}

/// Criteria 1-4, 7 and 8 on one `(alpha, beta, N)` cell.
pub fn run_hahn_cell(p: &HahnParams, cfg: &SweepConfig, seed: u64) -> CellReport {
    let mut rep = CellReport::new(hahn_key(p));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rep.record(1, "orthogonality", p.verify_orthogonality());

    let mut points = p.grid_values();
    points.extend((0..5).map(|_| random_rational(&mut rng)));
    let agree = points.iter().try_for_each(|x| {
        (0..p.dim()).try_for_each(|n| {
            let h = p.eval_hypergeometric(n, x).map_err(|e| e.to_string())?;
            let r = p.eval_recurrence(n, x);
            if h == r {
                Ok(())
            } else {
                Err(format!("n={n}, x={x}: hypergeometric {h} vs recurrence {r}"))
            }
        })
    });
    rep.record(2, "hypergeometric = recurrence", agree);

    let g = build_realization(p);
    rep.record(3, "relations", verify_relations(&g));
    rep.record(3, "casimir", verify_casimir(&g));
    let spectrum_ok = g.k2.scale(&int(2)).has_spectrum(&p.grid_values());
    rep.record(3, "spectrum of 2 K2", if spectrum_ok { Ok(()) } else { Err("differs from the grid") });
    rep.record(4, "pentadiagonality", verify_pentadiagonality(p));

    if p.n() <= cfg.dual_max_n {
        let mut gauges = vec![FreeParams::ones(p)];
        gauges.extend((0..cfg.gauges).map(|_| FreeParams::random(p, &mut rng)));
        let dual = gauges.iter().try_for_each(|fp| {
            let d = derive_dual_rep(p, fp)?;
            verify_dual_rep(&d)?;
            similarity_to_primal(p, &d).map(|_| ())
        });
        rep.record(7, "dual representation", dual);
        let notes = transcription_notes(p, &FreeParams::ones(p)).and_then(|n| {
            if n.unexplained == 0 && n.corrected_equals_derived {
                Ok(())
            } else {
                Err(crate::Error::InconsistentSystem(format!("{} unexplained discrepancies", n.unexplained)))
            }
        });
        rep.record(7, "transcription notes", notes);
    }

    rep.record(8, "tilde presentation", verify_tilde(&tilde_presentation(&g)));
    rep
}

/// Criteria 5 and 6 on one coupling cell.
pub fn run_coupling_cell(cp: &CouplingProblem, cfg: &SweepConfig) -> CellReport {
    let mut rep = CellReport::new(coupling_key(cp));
    match coupled_operators(cp) {
        Ok(k) => {
            rep.record(5, "kappa relations", Ok::<(), String>(()));
            rep.record(5, "Q_CG scalar", verify_cg_casimir(&k));
            if cfg.literal {
                rep.record(5, "Q_CG displayed constant", verify_cg_casimir_displayed(&k));
            }
        }
        Err(e) => rep.record(5, "kappa relations", Err::<(), _>(e)),
    }
    rep.record(6, "CG orthonormality", clebsch_gordan(cp).and_then(|t| t.verify_orthonormal()));
    if cp.a.epsilon == 1 && cp.b.epsilon == 1 {
        rep.record(6, "CG = dual -1 Hahn", verify_cg_polynomial_match(cp));
        if cfg.literal {
            rep.record(6, "CG signs, n=0 phase", verify_cg_signed(cp));
        }
    }
    rep
}

/// Criterion 9 on one module.
pub fn run_module_cell(l: &ModuleLabel) -> CellReport {
    let mut rep = CellReport::new(module_key(l));
    rep.record(9, "parabose relation", verify_parabose(l, 12));
    rep.record(9, "module relations and Q", verify_module_relations(l, 12));
    rep
}

fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("MHAHN_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        builder = builder.num_threads(n.max(1));
    }
    builder.build().expect("thread pool")
}

/// Runs every cell; the output order is the lattice order.
pub fn run_sweep(cfg: &SweepConfig) -> Vec<CellReport> {
    let hahn = hahn_lattice(cfg.max_n);
    let couplings = coupling_lattice(cfg.max_n.min(10));
    let modules = module_lattice();
    thread_pool().install(|| {
        let mut out: Vec<CellReport> = hahn
            .par_iter()
            .enumerate()
            .map(|(i, p)| run_hahn_cell(p, cfg, cell_seed(cfg.seed, i)))
            .collect();
        out.extend(couplings.par_iter().map(|cp| run_coupling_cell(cp, cfg)).collect::<Vec<_>>());
        out.extend(modules.iter().map(run_module_cell));
        out
    })
}
