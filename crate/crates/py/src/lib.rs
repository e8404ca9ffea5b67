//! Python bindings: mapping classes, characters, intertwiners, Gauss sums
//! and the JSON job runner.

use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Rational64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict};

use skein_core::cyclotomic::RootOfUnity;
use skein_core::harness::{self, CharacterSpec, Command, JobSpec, OutputFormat};
use skein_core::intertwiner::{self as tw, IntertwinerResult, Mode};
use skein_core::punctured_torus;
use skein_core::quantum_torus::{MappingClass, Sign};
use skein_core::torus_rep::TorusCharacter;
use skein_core::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::TooLarge(_) | Error::RingTooLarge(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn py_int<'py>(py: Python<'py>, digits: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("builtins")?.getattr("int")?.call1((digits,))
}

fn rational(x: &Bound<'_, PyAny>) -> PyResult<Rational64> {
    let s = x.str()?.to_string();
    Rational64::from_str(s.trim()).map_err(|_| PyValueError::new_err(format!("not a rational: {s:?}")))
}

/// An element [[a, b], [c, d]] of SL(2, Z).
#[pyclass(name = "MappingClass", frozen, from_py_object)]
#[derive(Clone)]
struct PyMappingClass(MappingClass);

#[pymethods]
impl PyMappingClass {
    #[new]
    fn new(a: i64, b: i64, c: i64, d: i64) -> PyResult<Self> {
        MappingClass::new(a, b, c, d).map(Self).map_err(err)
    }

    #[getter]
    fn entries(&self) -> (i64, i64, i64, i64) {
        let [a, b, c, d] = self.0.entries();
        (a, b, c, d)
    }

    fn trace(&self) -> i64 {
        self.0.trace()
    }

    fn is_periodic(&self) -> bool {
        self.0.is_periodic()
    }

    fn order(&self) -> Option<u32> {
        self.0.order()
    }

    fn act(&self, x: i64, y: i64) -> (i64, i64) {
        self.0.act((x, y))
    }

    fn __mul__(&self, other: &Self) -> Self {
        Self(self.0.mul(&other.0))
    }

    fn __repr__(&self) -> String {
        let [a, b, c, d] = self.0.entries();
        format!("MappingClass({a}, {b}, {c}, {d})")
    }
}

/// Character with eigenvalues e^{2πi·angle}, a branch sign and lift offsets.
#[pyclass(name = "Character", frozen, from_py_object)]
#[derive(Clone)]
struct PyCharacter(TorusCharacter);

#[pymethods]
impl PyCharacter {
    #[new]
    #[pyo3(signature = (angle1, angle2, sign = "plus", lifts = (0, 0)))]
    fn new(angle1: &Bound<'_, PyAny>, angle2: &Bound<'_, PyAny>, sign: &str, lifts: (i64, i64)) -> PyResult<Self> {
        let sign = Sign::from_str(sign).map_err(err)?;
        Ok(Self(TorusCharacter::new(rational(angle1)?, rational(angle2)?, sign).with_lifts(lifts.0, lifts.1)))
    }

    #[getter]
    fn angles(&self) -> (String, String) {
        (self.0.angle1.to_string(), self.0.angle2.to_string())
    }

    #[getter]
    fn sign(&self) -> &'static str {
        self.0.sign.name()
    }

    fn is_invariant(&self, a: &PyMappingClass) -> bool {
        self.0.is_invariant(&a.0)
    }

    fn ring_order(&self, n: u64) -> u64 {
        self.0.ring_order(n)
    }

    fn __repr__(&self) -> String {
        format!("Character({}, {}, {:?})", self.0.angle1, self.0.angle2, self.0.sign.name())
    }
}

/// Exact intertwiner Λ between a torus representation and its pullback.
#[pyclass(name = "Intertwiner", frozen)]
struct PyIntertwiner(IntertwinerResult<RootOfUnity>);

#[pymethods]
impl PyIntertwiner {
    #[new]
    fn new(matrix: &PyMappingClass, character: &PyCharacter, n: u64) -> PyResult<Self> {
        if !character.0.is_invariant(&matrix.0) {
            return Err(PyValueError::new_err("character is not invariant under the mapping class"));
        }
        let lift = character.0.lift(n).map_err(err)?;
        tw::build_intertwiner(&matrix.0, &lift).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> u64 {
        self.0.n
    }

    #[getter]
    fn m(&self) -> u64 {
        self.0.m()
    }

    #[getter]
    fn n_prime(&self) -> u64 {
        self.0.n_prime()
    }

    #[getter]
    fn k0(&self) -> u64 {
        self.0.coeffs.k0
    }

    #[getter]
    fn ring_order(&self) -> u64 {
        self.0.ring_order()
    }

    /// Checks ρ(A·X)Λ = Λρ(X) on the generators exactly.
    fn verify(&self) -> bool {
        tw::verify_intertwining(&self.0) && tw::check_pattern(&self.0)
    }

    /// Trace of the unnormalized Λ.
    fn trace(&self) -> Cplx {
        self.0.trace_complex().into()
    }

    /// |Trace(Λ)|² / n' as an exact integer.
    fn abs_trace_sq<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let sq = self.0.trace_exact().abs_sq();
        let v = sq
            .as_integer()
            .ok_or_else(|| PyRuntimeError::new_err("|Trace|^2 is not rational"))?;
        py_int(py, &(v / BigInt::from(self.0.n_prime())).to_string())
    }

    /// log|det Λ| against its predicted value.
    fn det_check<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = tw::abs_det_check(&self.0).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("log_abs_det", d.log_abs_det)?;
        out.set_item("expected", d.expected)?;
        out.set_item("ok", d.ok)?;
        Ok(out)
    }

    /// Dense complex matrix as nested lists.
    fn to_list(&self) -> Vec<Vec<Cplx>> {
        let m = self.0.matrix.to_dense_complex();
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect())
            .collect()
    }
}

/// Complex number crossing into Python.
struct Cplx(Complex64);

impl From<Complex64> for Cplx {
    fn from(z: Complex64) -> Self {
        Cplx(z)
    }
}

impl<'py> IntoPyObject<'py> for Cplx {
    type Target = PyComplex;
    type Output = Bound<'py, PyComplex>;
    type Error = std::convert::Infallible;
    fn into_pyobject(self, py: Python<'py>) -> Result<Self::Output, Self::Error> {
        Ok(PyComplex::from_doubles(py, self.0.re, self.0.im))
    }
}

/// |Σ_{t mod n} (−q^{1/2})^{k t²}|² as an exact integer.
#[pyfunction]
fn gauss_sum_abs_sq<'py>(py: Python<'py>, k: i64, n: u64) -> PyResult<Bound<'py, PyAny>> {
    skein_core::ensure_odd(n as i64).map_err(err)?;
    let v = tw::gauss_sum(k, n)
        .abs_sq()
        .as_integer()
        .ok_or_else(|| PyRuntimeError::new_err("|G|^2 is not rational"))?;
    py_int(py, &v.to_string())
}

/// Complex value of the Gauss sum Σ (−q^{1/2})^{k t²}.
#[pyfunction]
fn gauss_sum(k: i64, n: u64) -> PyResult<Cplx> {
    skein_core::ensure_odd(n as i64).map_err(err)?;
    Ok(tw::gauss_sum(k, n).eval_complex().into())
}

/// One |Trace| row as a dict.
#[pyfunction]
#[pyo3(signature = (matrix, character, n, mode = "auto", closed_form = false))]
fn trace_row<'py>(
    py: Python<'py>,
    matrix: &PyMappingClass,
    character: &PyCharacter,
    n: u64,
    mode: &str,
    closed_form: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = Mode::from_str(mode).map_err(err)?;
    let row = tw::trace_row(&matrix.0, &character.0, n, mode, closed_form).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("n", row.n)?;
    out.set_item("abs_trace", row.abs_trace)?;
    match &row.abs_trace_sq_exact {
        Some(v) => out.set_item("abs_trace_sq_exact", py_int(py, &v.to_string())?)?,
        None => out.set_item("abs_trace_sq_exact", py.None())?,
    }
    out.set_item("log_trace_over_n", row.log_trace_over_n)?;
    out.set_item("is_exact_zero", row.is_exact_zero)?;
    out.set_item("variant_matched", row.variant_matched.map(|v| v.tag()))?;
    out.set_item("path", row.path.tag())?;
    out.set_item("verified", row.verified)?;
    out.set_item("bound_ok", row.bound_ok)?;
    Ok(out)
}

/// |Trace|² of the normalized punctured-torus intertwiner, equal to gcd(6, n).
#[pyfunction]
fn punctured_trace_sq<'py>(py: Python<'py>, n: u64) -> PyResult<Bound<'py, PyAny>> {
    let v = punctured_torus::punctured_trace_sq(n).map_err(err)?;
    py_int(py, &v.to_string())
}

/// Builds the punctured-torus intertwiner and checks conjugation exactly.
#[pyfunction]
fn punctured_verify(n: u64) -> PyResult<bool> {
    Ok(punctured_torus::build_periodic_intertwiner(n).map_err(err)?.verify_conjugation())
}

/// Runs a harness job and returns the JSON report.
#[pyfunction]
#[pyo3(signature = (
    command, n, matrix = None, sign = "plus", character = "trivial",
    k = None, lifts = (0, 0), mode = "auto", workers = None,
))]
#[allow(clippy::too_many_arguments)]
fn run_job(
    command: &str,
    n: &str,
    matrix: Option<&str>,
    sign: &str,
    character: &str,
    k: Option<Vec<i64>>,
    lifts: (i64, i64),
    mode: &str,
    workers: Option<usize>,
) -> PyResult<String> {
    let build = || -> Result<JobSpec, Error> {
        let cmd = Command::from_str(command)?;
        if cmd == Command::Accept {
            return Err(Error::InvalidInput("accept is not available from run_job".into()));
        }
        let mut job = JobSpec::new(cmd);
        job.matrix = matrix.map(harness::parse_matrix).transpose()?;
        job.sign = Sign::from_str(sign)?;
        job.character = CharacterSpec::from_str(character)?;
        job.k = k.unwrap_or_default();
        job.lifts = lifts;
        job.n_values = harness::parse_n_list(n)?;
        job.mode = Mode::from_str(mode)?;
        job.output = OutputFormat::Json;
        job.workers = workers;
        Ok(job)
    };
    let job = build().map_err(err)?;
    let report = harness::run(&job).map_err(err)?;
    Ok(report.render(OutputFormat::Json))
}

#[pymodule]
fn skein(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMappingClass>()?;
    m.add_class::<PyCharacter>()?;
    m.add_class::<PyIntertwiner>()?;
    m.add_function(wrap_pyfunction!(gauss_sum, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_sum_abs_sq, m)?)?;
    m.add_function(wrap_pyfunction!(trace_row, m)?)?;
    m.add_function(wrap_pyfunction!(punctured_trace_sq, m)?)?;
    m.add_function(wrap_pyfunction!(punctured_verify, m)?)?;
    m.add_function(wrap_pyfunction!(run_job, m)?)?;
    Ok(())
}
