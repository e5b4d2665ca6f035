//! Python bindings. Rationals cross the boundary as `fractions.Fraction`;
//! anything whose `str()` reads as `p/q` or an integer is accepted.

use mhahn::algebra::{build_realization, structure_constants, verify_casimir, verify_pentadiagonality, verify_relations};
use mhahn::dual_rep::{derive_dual_rep, similarity_to_primal, transcription_notes, verify_dual_rep, FreeParams};
use mhahn::sl_minus::{
    clebsch_gordan as cg_table, coupled_operators, verify_cg_casimir, verify_cg_polynomial_match, verify_module_relations,
    verify_parabose as parabose, CouplingProblem, ModuleLabel,
};
use mhahn::{parse_rational, Error, Rational};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(mhahn, VerificationError, PyException, "An exact identity failed to hold.");

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Parse(_) | Error::Regime(_) | Error::InvalidInput(_) | Error::ParameterCount { .. } | Error::ZeroParameter(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => VerificationError::new_err(other.to_string()),
    }
}

fn rational(x: &Bound<'_, PyAny>) -> PyResult<Rational> {
    parse_rational(&x.str()?.to_cow()?).map_err(to_py_err)
}

fn fraction<'py>(py: Python<'py>, x: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((x.to_string(),))
}

fn fractions<'py>(py: Python<'py>, xs: &[Rational]) -> PyResult<Vec<Bound<'py, PyAny>>> {
    xs.iter().map(|x| fraction(py, x)).collect()
}

/// Round-trips a serializable value through JSON into plain Python objects.
fn to_python<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Parameters `(alpha, beta, N)` of the dual -1 Hahn polynomials.
#[pyclass(name = "HahnParams", frozen)]
struct PyHahnParams {
    inner: mhahn::HahnParams,
}

#[pymethods]
impl PyHahnParams {
    #[new]
    #[pyo3(signature = (alpha, beta, n))]
    fn new(alpha: &Bound<'_, PyAny>, beta: &Bound<'_, PyAny>, n: usize) -> PyResult<Self> {
        let inner = mhahn::HahnParams::new(rational(alpha)?, rational(beta)?, n).map_err(to_py_err)?;
        Ok(PyHahnParams { inner })
    }

    #[getter]
    fn alpha<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, self.inner.alpha())
    }

    #[getter]
    fn beta<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, self.inner.beta())
    }

    #[getter(N)]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// `[(b_n, u_n)]` for `n = 0..N`.
    fn recurrence<'py>(&self, py: Python<'py>) -> PyResult<Vec<(Bound<'py, PyAny>, Bound<'py, PyAny>)>> {
        (0..self.inner.dim())
            .map(|n| {
                let rc = self.inner.recurrence_coefficients(n);
                Ok((fraction(py, &rc.b)?, fraction(py, &rc.u)?))
            })
            .collect()
    }

    fn grid<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        fractions(py, &self.inner.grid_values())
    }

    fn weights<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        fractions(py, &self.inner.weights().omega)
    }

    fn norms<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        fractions(py, &self.inner.weights().v)
    }

    /// `Q_n(x_s)`, rows indexed by `n`.
    fn values<'py>(&self, py: Python<'py>) -> PyResult<Vec<Vec<Bound<'py, PyAny>>>> {
        self.inner.value_table().iter().map(|row| fractions(py, row)).collect()
    }

    /// `Q_n(x)` from the recurrence.
    fn eval<'py>(&self, py: Python<'py>, n: usize, x: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        if n > self.inner.n() {
            return Err(PyValueError::new_err(format!("degree {n} exceeds N = {}", self.inner.n())));
        }
        fraction(py, &self.inner.eval_recurrence(n, &rational(x)?))
    }

    /// `Q_n(x)` from the hypergeometric representation.
    fn eval_hypergeometric<'py>(&self, py: Python<'py>, n: usize, x: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        if n > self.inner.n() {
            return Err(PyValueError::new_err(format!("degree {n} exceeds N = {}", self.inner.n())));
        }
        let v = self.inner.eval_hypergeometric(n, &rational(x)?).map_err(to_py_err)?;
        fraction(py, &v)
    }

    /// `{"nu", "sigma", "rho", "casimir", "chi"}` of the algebra H.
    fn structure_constants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = structure_constants(&self.inner);
        let d = PyDict::new(py);
        d.set_item("nu", fraction(py, &c.nu)?)?;
        d.set_item("sigma", fraction(py, &c.sigma)?)?;
        d.set_item("rho", fraction(py, &c.rho)?)?;
        d.set_item("casimir", fraction(py, &c.casimir_value())?)?;
        d.set_item("chi", fraction(py, &c.chi())?)?;
        Ok(d)
    }

    /// Runs orthogonality, relations, Casimir and pentadiagonality; raises
    /// `VerificationError` on the first failure.
    fn verify(&self) -> PyResult<()> {
        self.inner.verify_orthogonality().map_err(to_py_err)?;
        let g = build_realization(&self.inner);
        verify_relations(&g).map_err(to_py_err)?;
        verify_casimir(&g).map_err(to_py_err)?;
        verify_pentadiagonality(&self.inner).map_err(to_py_err)?;
        Ok(())
    }

    /// Derives the representation with diagonal `K2` in the given gauge
    /// (all ones by default) and checks it, including the intertwiner.
    #[pyo3(signature = (params=None))]
    fn dual_rep<'py>(&self, py: Python<'py>, params: Option<Vec<Bound<'py, PyAny>>>) -> PyResult<Bound<'py, PyAny>> {
        let fp = match params {
            None => FreeParams::ones(&self.inner),
            Some(v) => {
                let values = v.iter().map(rational).collect::<PyResult<Vec<_>>>()?;
                FreeParams::new(&self.inner, values).map_err(to_py_err)?
            }
        };
        let d = derive_dual_rep(&self.inner, &fp).map_err(to_py_err)?;
        verify_dual_rep(&d).map_err(to_py_err)?;
        similarity_to_primal(&self.inner, &d).map_err(to_py_err)?;
        to_python(py, &d)
    }

    fn transcription_notes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let notes = transcription_notes(&self.inner, &FreeParams::ones(&self.inner)).map_err(to_py_err)?;
        to_python(py, &notes)
    }

    fn __repr__(&self) -> String {
        format!("HahnParams(alpha={}, beta={}, N={})", self.inner.alpha(), self.inner.beta(), self.inner.n())
    }
}

fn problem(mu_a: &Bound<'_, PyAny>, mu_b: &Bound<'_, PyAny>, n: usize, eps_a: i8, eps_b: i8) -> PyResult<CouplingProblem> {
    let a = ModuleLabel::new(eps_a, rational(mu_a)?).map_err(to_py_err)?;
    let b = ModuleLabel::new(eps_b, rational(mu_b)?).map_err(to_py_err)?;
    Ok(CouplingProblem::new(a, b, n))
}

/// Clebsch-Gordan table as `{"squares", "signs", "eigenvalues", ...}`;
/// entry `[n][k]` is the coefficient of `e_n (x) e_(N-n)` in column `k`.
#[pyfunction]
#[pyo3(signature = (mu_a, mu_b, n, eps_a=1, eps_b=1))]
fn clebsch_gordan<'py>(
    py: Python<'py>,
    mu_a: &Bound<'py, PyAny>,
    mu_b: &Bound<'py, PyAny>,
    n: usize,
    eps_a: i8,
    eps_b: i8,
) -> PyResult<Bound<'py, PyAny>> {
    let cp = problem(mu_a, mu_b, n, eps_a, eps_b)?;
    let table = cg_table(&cp).map_err(to_py_err)?;
    table.verify_orthonormal().map_err(to_py_err)?;
    to_python(py, &table)
}

/// Row gauge and parameters identifying the CG table with dual -1 Hahn
/// polynomials (requires `eps_a = eps_b = 1`).
#[pyfunction]
#[pyo3(signature = (mu_a, mu_b, n))]
fn cg_polynomial_match<'py>(
    py: Python<'py>,
    mu_a: &Bound<'py, PyAny>,
    mu_b: &Bound<'py, PyAny>,
    n: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let cp = problem(mu_a, mu_b, n, 1, 1)?;
    let report = verify_cg_polynomial_match(&cp).map_err(to_py_err)?;
    to_python(py, &report)
}

/// Value of the coupled Casimir after checking the coupled relations.
#[pyfunction]
#[pyo3(signature = (mu_a, mu_b, n, eps_a=1, eps_b=1))]
fn coupled_casimir<'py>(
    py: Python<'py>,
    mu_a: &Bound<'py, PyAny>,
    mu_b: &Bound<'py, PyAny>,
    n: usize,
    eps_a: i8,
    eps_b: i8,
) -> PyResult<Bound<'py, PyAny>> {
    let cp = problem(mu_a, mu_b, n, eps_a, eps_b)?;
    let k = coupled_operators(&cp).map_err(to_py_err)?;
    fraction(py, &verify_cg_casimir(&k).map_err(to_py_err)?)
}

/// Checks the parabose relation and the module relations at `cutoff`.
#[pyfunction]
#[pyo3(signature = (eps, mu, cutoff=12))]
fn verify_module(eps: i8, mu: &Bound<'_, PyAny>, cutoff: usize) -> PyResult<()> {
    let label = ModuleLabel::new(eps, rational(mu)?).map_err(to_py_err)?;
    parabose(&label, cutoff).map_err(to_py_err)?;
    verify_module_relations(&label, cutoff).map_err(to_py_err)
}

#[pymodule]
#[pyo3(name = "mhahn")]
fn mhahn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHahnParams>()?;
    m.add_function(wrap_pyfunction!(clebsch_gordan, m)?)?;
    m.add_function(wrap_pyfunction!(cg_polynomial_match, m)?)?;
    m.add_function(wrap_pyfunction!(coupled_casimir, m)?)?;
    m.add_function(wrap_pyfunction!(verify_module, m)?)?;
    m.add("VerificationError", m.py().get_type::<VerificationError>())?;
    Ok(())
}
