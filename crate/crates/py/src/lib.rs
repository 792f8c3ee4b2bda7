//! Python bindings. Structured results come back as plain dicts and lists
//! (via JSON), exact rationals as `fractions.Fraction`.

use hitmat::campaign::{run_campaign, summarize, CampaignConfig};
use hitmat::lofford::{FormKind, FormSpec, Number};
use hitmat::matrix::{bareiss_rank, deficiency_from_parts, rank_exact, rank_mod_p, ZeroOneMatrix};
use hitmat::process::{
    hitting_trial, matrix_at, rank_equals_n_minus_z_trial, tau_zero, Model, Probes, Template,
    UniformField, LEVEL_DENOMINATOR,
};
use hitmat::structure::{
    is_b_blocked, is_n_robust, is_well_separated, selectors, CheckMode, RobustParams, SampleConfig,
};
use hitmat::walks::{
    deficiency_trace, expected_h, h_monte_carlo, h_statistic, mean_h, reflected_gap, srw_trace,
    WalkParams,
};
use num_rational::Rational64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn fraction<'py>(py: Python<'py>, text: String) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((text,))
}

fn model(name: &str) -> PyResult<Model> {
    name.parse().map_err(err)
}

fn template(json: Option<&str>) -> PyResult<Option<Template>> {
    json.map(Template::from_json_str).transpose().map_err(err)
}

fn number(x: &Bound<'_, PyAny>) -> PyResult<Number> {
    Ok(Number::Text(x.str()?.to_string()))
}

/// A square 0-1 matrix with zero diagonal allowed but not required.
#[pyclass(name = "Matrix", module = "hitmat_py", frozen)]
struct PyMatrix {
    inner: ZeroOneMatrix,
}

#[pymethods]
impl PyMatrix {
    #[new]
    fn new(rows: Vec<Vec<u8>>) -> PyResult<Self> {
        ZeroOneMatrix::from_rows(&rows).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self { inner: ZeroOneMatrix::identity(n) }
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        ZeroOneMatrix::parse_text(text).map(|inner| Self { inner }).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn rows(&self) -> Vec<Vec<u8>> {
        let n = self.inner.n();
        (0..n).map(|i| (0..n).map(|j| self.inner.get(i, j) as u8).collect()).collect()
    }

    fn transpose(&self) -> Self {
        Self { inner: self.inner.transpose() }
    }

    fn leading_minor(&self, m: usize) -> PyResult<Self> {
        if m > self.inner.n() {
            return Err(err(format!("minor size {m} exceeds n = {}", self.inner.n())));
        }
        Ok(Self { inner: self.inner.leading_minor(m) })
    }

    fn rank(&self) -> usize {
        rank_exact(&self.inner).rank
    }

    /// Rank with its certificate: `{"rank", "certified", "primes_used", "oracle_checked"}`.
    fn rank_report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &rank_exact(&self.inner))
    }

    fn rank_mod_p(&self, prime: u64) -> PyResult<usize> {
        if prime < 2 || prime >= 1 << 63 {
            return Err(err(format!("modulus {prime} is outside [2, 2^63)")));
        }
        Ok(rank_mod_p(&self.inner, prime))
    }

    fn bareiss_rank(&self) -> usize {
        bareiss_rank(&self.inner)
    }

    fn z(&self) -> usize {
        self.inner.z_value()
    }

    fn deficiency(&self) -> PyResult<usize> {
        deficiency_from_parts(self.inner.n(), self.rank(), self.inner.z_value()).map_err(err)
    }

    fn zero_rows(&self) -> Vec<usize> {
        self.inner.zero_rows()
    }

    fn zero_cols(&self) -> Vec<usize> {
        self.inner.zero_cols()
    }

    fn selectors(&self, rows: Vec<usize>) -> PyResult<Vec<usize>> {
        if let Some(&i) = rows.iter().find(|&&i| i >= self.inner.n()) {
            return Err(err(format!("row {i} is out of range")));
        }
        Ok(selectors(&self.inner, &rows, None))
    }

    /// Blocked verdict as a dict; `holds` is `None` when sampling found no
    /// counterexample.
    #[pyo3(signature = (b, template=None, exact=true, seed=0))]
    fn is_b_blocked<'py>(
        &self,
        py: Python<'py>,
        b: usize,
        template: Option<&str>,
        exact: bool,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let t = self::template(template)?;
        let mode = if exact { CheckMode::Exact } else { CheckMode::Sampled };
        let cfg = SampleConfig { seed, ..SampleConfig::default() };
        let v = is_b_blocked(&self.inner, b, t.as_ref(), mode, &cfg).map_err(err)?;
        to_py(py, &v)
    }

    /// `n`-robustness with `k = floor(ln ln n / (2p))`.
    #[pyo3(signature = (p, exact=false))]
    fn is_n_robust<'py>(&self, py: Python<'py>, p: f64, exact: bool) -> PyResult<Bound<'py, PyAny>> {
        let params = RobustParams::for_p(self.inner.n(), p);
        let mode = if exact { CheckMode::Exact } else { CheckMode::Sampled };
        let v = is_n_robust(&self.inner, &params, mode, &SampleConfig::default()).map_err(err)?;
        let robust = v.robust();
        let mut value = serde_json::to_value(&v).map_err(err)?;
        value["robust"] = serde_json::json!(robust);
        to_py(py, &value)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!("Matrix(n={}, ones={})", self.inner.n(), self.inner.count_ones())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// The sample `(n, model, seed)` at probability `p`.
#[pyfunction]
#[pyo3(signature = (n, p, seed, model="asymmetric", template=None))]
fn sample(n: usize, p: f64, seed: u64, model: &str, template: Option<&str>) -> PyResult<PyMatrix> {
    let field = UniformField::new(n, self::model(model)?, seed).map_err(err)?;
    let t = self::template(template)?;
    let inner = matrix_at(&field, p, t.as_ref()).map_err(err)?;
    Ok(PyMatrix { inner })
}

/// The hitting time as an exact `Fraction` with denominator `2^64`.
#[pyfunction]
#[pyo3(signature = (n, seed, model="asymmetric", template=None))]
fn hitting_time<'py>(
    py: Python<'py>,
    n: usize,
    seed: u64,
    model: &str,
    template: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let field = UniformField::new(n, self::model(model)?, seed).map_err(err)?;
    let t = self::template(template)?;
    let tau = tau_zero(&field, t.as_ref());
    fraction(py, format!("{}/{}", tau.numerator(), LEVEL_DENOMINATOR))
}

#[pyfunction]
#[pyo3(signature = (n, seed, model="asymmetric", template=None))]
fn hitting<'py>(
    py: Python<'py>,
    n: usize,
    seed: u64,
    model: &str,
    template: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let t = self::template(template)?;
    let m = self::model(model)?;
    let r = py
        .detach(|| hitting_trial(n, m, seed, t.as_ref(), Probes::default()))
        .map_err(err)?;
    to_py(py, &r.without_timing())
}

#[pyfunction]
#[pyo3(signature = (n, p, seed, model="asymmetric", template=None))]
fn rank_equals_n_minus_z(n: usize, p: f64, seed: u64, model: &str, template: Option<&str>) -> PyResult<bool> {
    let t = self::template(template)?;
    rank_equals_n_minus_z_trial(n, p, self::model(model)?, seed, t.as_ref()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, p, seed, model="asymmetric", template=None))]
fn well_separated<'py>(
    py: Python<'py>,
    n: usize,
    p: f64,
    seed: u64,
    model: &str,
    template: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let field = UniformField::new(n, self::model(model)?, seed).map_err(err)?;
    let t = self::template(template)?;
    let params = RobustParams::for_p(n, p);
    to_py(py, &is_well_separated(&field, p, &params, t.as_ref()))
}

#[pyfunction]
fn walk(beta: f64, length: usize, seed: u64) -> PyResult<Vec<i64>> {
    Ok(srw_trace(&WalkParams::new(beta, length, seed).map_err(err)?))
}

#[pyfunction]
#[pyo3(name = "h_statistic")]
fn py_h_statistic(trace: Vec<i64>) -> usize {
    h_statistic(&trace)
}

#[pyfunction]
#[pyo3(name = "reflected_gap")]
fn py_reflected_gap(trace: Vec<i64>) -> Vec<i64> {
    reflected_gap(&trace)
}

/// `beta / (1 - beta)^2` for `beta = num / den`.
#[pyfunction]
#[pyo3(name = "expected_h")]
fn py_expected_h(py: Python<'_>, num: i64, den: i64) -> PyResult<Bound<'_, PyAny>> {
    if den == 0 {
        return Err(err("zero denominator"));
    }
    let v = expected_h(Rational64::new(num, den)).map_err(err)?;
    fraction(py, v.to_string())
}

/// The mean of `H`, `beta / (1 - 2 beta)^2`, for `beta = num / den`.
#[pyfunction]
#[pyo3(name = "mean_h")]
fn py_mean_h(py: Python<'_>, num: i64, den: i64) -> PyResult<Bound<'_, PyAny>> {
    if den == 0 {
        return Err(err("zero denominator"));
    }
    let v = mean_h(Rational64::new(num, den)).map_err(err)?;
    fraction(py, v.to_string())
}

#[pyfunction]
#[pyo3(name = "h_monte_carlo")]
fn py_h_monte_carlo<'py>(
    py: Python<'py>,
    beta: f64,
    length: usize,
    walks: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let est = py.detach(|| h_monte_carlo(beta, length, walks, seed)).map_err(err)?;
    to_py(py, &est)
}

#[pyfunction]
#[pyo3(name = "deficiency_trace", signature = (n, p, seed, model="asymmetric", template=None))]
fn py_deficiency_trace<'py>(
    py: Python<'py>,
    n: usize,
    p: f64,
    seed: u64,
    model: &str,
    template: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let t = self::template(template)?;
    let m = self::model(model)?;
    let trace = py
        .detach(|| deficiency_trace(n, p, m, seed, t.as_ref()))
        .map_err(err)?;
    to_py(py, &trace)
}

/// Largest atom of a Bernoulli form. Coefficients may be ints, `Fraction`s
/// or strings like `"2/3"`; `kind` is `linear`, `bilinear` or `quadratic`.
#[pyfunction]
#[pyo3(signature = (kind, p, coefficients=None, matrix=None))]
fn atom_sup<'py>(
    py: Python<'py>,
    kind: &str,
    p: &Bound<'py, PyAny>,
    coefficients: Option<Vec<Bound<'py, PyAny>>>,
    matrix: Option<Vec<Vec<Bound<'py, PyAny>>>>,
) -> PyResult<Bound<'py, PyAny>> {
    let kind: FormKind = serde_json::from_value(serde_json::json!(kind)).map_err(err)?;
    let spec = FormSpec {
        kind,
        p: number(p)?,
        coefficients: coefficients
            .unwrap_or_default()
            .iter()
            .map(number)
            .collect::<PyResult<_>>()?,
        matrix: matrix
            .unwrap_or_default()
            .iter()
            .map(|row| row.iter().map(number).collect())
            .collect::<PyResult<_>>()?,
    };
    let report = py.detach(|| spec.evaluate()).map_err(err)?;
    let mut value = report.to_json();
    value["sup_atom"] = serde_json::json!(report.sup_atom.to_string());
    let out = to_py(py, &value)?;
    out.set_item("sup_atom", fraction(py, report.sup_atom.to_string())?)?;
    Ok(out)
}

/// Runs a campaign from its JSON config and returns the summary dict.
#[pyfunction]
#[pyo3(name = "run_campaign", signature = (config, workers=None, output_path=None))]
fn py_run_campaign<'py>(
    py: Python<'py>,
    config: &str,
    workers: Option<usize>,
    output_path: Option<std::path::PathBuf>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = CampaignConfig::from_json(config).map_err(err)?;
    if workers.is_some() {
        cfg.workers = workers;
    }
    if output_path.is_some() {
        cfg.output_path = output_path;
    }
    let run = py.detach(|| run_campaign(&cfg)).map_err(err)?;
    let out = to_py(py, &run.summary)?;
    out.set_item("csv", run.csv)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(name = "summarize")]
fn py_summarize(py: Python<'_>, path: std::path::PathBuf) -> PyResult<Bound<'_, PyAny>> {
    let s = summarize(&path).map_err(err)?;
    to_py(py, &s)
}

#[pymodule]
fn hitmat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyMatrix>()?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(hitting_time, m)?)?;
    m.add_function(wrap_pyfunction!(hitting, m)?)?;
    m.add_function(wrap_pyfunction!(rank_equals_n_minus_z, m)?)?;
    m.add_function(wrap_pyfunction!(well_separated, m)?)?;
    m.add_function(wrap_pyfunction!(walk, m)?)?;
    m.add_function(wrap_pyfunction!(py_h_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(py_reflected_gap, m)?)?;
    m.add_function(wrap_pyfunction!(py_expected_h, m)?)?;
    m.add_function(wrap_pyfunction!(py_mean_h, m)?)?;
    m.add_function(wrap_pyfunction!(py_h_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(py_deficiency_trace, m)?)?;
    m.add_function(wrap_pyfunction!(atom_sup, m)?)?;
    m.add_function(wrap_pyfunction!(py_run_campaign, m)?)?;
    m.add_function(wrap_pyfunction!(py_summarize, m)?)?;
    Ok(())
}
