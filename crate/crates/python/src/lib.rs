use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyLookupError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wvnn::config::{parse_observable, FlatConfig};
use wvnn::linalg::{self, CMatrix, CVector};
use wvnn::meter::{weak_shift_estimate, CouplingSign, MeterConfig, ProtocolConfig};
use wvnn::quantum::{self, QubitParams, QutritParams};
use wvnn::verify::{run_verify, VerifyOptions};
use wvnn::weak::{self, Variant, DEFAULT_CLASSIFY_TOL};

create_exception!(
    pywvnn,
    DegenerateInputError,
    PyValueError,
    "Post-selection is (nearly) orthogonal or the input is degenerate."
);

fn err(e: wvnn::Error) -> PyErr {
    match e {
        wvnn::Error::NearOrthogonalPostselection { .. } | wvnn::Error::DegenerateInput(_) => {
            DegenerateInputError::new_err(e.to_string())
        }
        wvnn::Error::NotFound(_) => PyLookupError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn vector(v: Vec<Complex64>) -> PyResult<CVector> {
    CVector::new(v).map_err(err)
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    CMatrix::from_rows(&rows).map_err(err)
}

fn rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    m.data().chunks(m.dim()).map(<[Complex64]>::to_vec).collect()
}

fn variant(name: &str) -> PyResult<Variant> {
    match name {
        "A" | "a" => Ok(Variant::A),
        "Aprime" | "A-prime" | "aprime" => Ok(Variant::APrime),
        _ => Err(PyValueError::new_err(format!(
            "variant must be 'A' or 'Aprime', got {name:?}"
        ))),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Hermitian observable with its cached spectrum.
#[pyclass(frozen, module = "pywvnn")]
struct Observable {
    inner: quantum::Observable,
}

#[pymethods]
impl Observable {
    /// `pauli:x|y|z`, `gellmann:K`, `bloch:THETA,PHI`, `combo` or `matrix:FILE.json`.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Self {
            inner: parse_observable(spec).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(Self {
            inner: quantum::observable_from_matrix(matrix(rows)?).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn spectrum(&self) -> Vec<f64> {
        self.inner.spectrum().to_vec()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        rows(self.inner.matrix())
    }

    fn __repr__(&self) -> String {
        format!(
            "Observable(dim={}, spectrum={:?})",
            self.inner.dim(),
            self.inner.spectrum()
        )
    }
}

/// One of the two rank-one weak operators.
#[pyclass(frozen, module = "pywvnn")]
struct WeakOperator {
    inner: weak::WeakOperator,
}

#[pymethods]
impl WeakOperator {
    #[new]
    #[pyo3(signature = (obs, psi_i, psi_f, variant = "A"))]
    fn new(obs: &Observable, psi_i: Vec<Complex64>, psi_f: Vec<Complex64>, variant: &str) -> PyResult<Self> {
        let w = weak::build_weak_operator(&obs.inner, &vector(psi_i)?, &vector(psi_f)?, self::variant(variant)?)
            .map_err(err)?;
        Ok(Self { inner: w })
    }

    #[getter]
    fn variant(&self) -> &'static str {
        match self.inner.variant() {
            Variant::A => "A",
            Variant::APrime => "Aprime",
        }
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        rows(self.inner.matrix())
    }

    fn trace(&self) -> Complex64 {
        self.inner.nonzero_eig()
    }

    /// Weak value as the expectation in the reading state.
    fn expectation(&self) -> Complex64 {
        self.inner.expectation()
    }

    fn henrici_spectral(&self) -> PyResult<f64> {
        weak::henrici_spectral(self.inner.matrix()).map_err(err)
    }

    fn henrici_structural(&self) -> PyResult<f64> {
        self.inner.henrici_structural().map_err(err)
    }

    fn quasi_idempotence_defect(&self) -> f64 {
        weak::quasi_idempotence_defect(&self.inner)
    }

    fn eigenstructure<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &weak::eigenstructure(&self.inner).map_err(err)?)
    }
}

#[pyfunction]
#[pyo3(signature = (theta, xi = 0.0))]
fn qubit_state(theta: f64, xi: f64) -> PyResult<Vec<Complex64>> {
    let v = quantum::qubit_state(QubitParams::new(theta, xi).map_err(err)?).map_err(err)?;
    Ok(v.into_entries())
}

#[pyfunction]
#[pyo3(signature = (theta, alpha, chi1 = 0.0, chi2 = 0.0))]
fn qutrit_state(theta: f64, alpha: f64, chi1: f64, chi2: f64) -> PyResult<Vec<Complex64>> {
    let v = quantum::qutrit_state(QutritParams::new(theta, alpha, chi1, chi2).map_err(err)?).map_err(err)?;
    Ok(v.into_entries())
}

#[pyfunction]
fn weak_value(obs: &Observable, psi_i: Vec<Complex64>, psi_f: Vec<Complex64>) -> PyResult<Complex64> {
    weak::weak_value_trace(&obs.inner, &vector(psi_i)?, &vector(psi_f)?).map_err(err)
}

/// Weak value with its classification tags and both Henrici departures.
#[pyfunction]
#[pyo3(signature = (obs, psi_i, psi_f, tol = DEFAULT_CLASSIFY_TOL))]
fn weak_value_report<'py>(
    py: Python<'py>,
    obs: &Observable,
    psi_i: Vec<Complex64>,
    psi_f: Vec<Complex64>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = weak::weak_value_report(&obs.inner, &vector(psi_i)?, &vector(psi_f)?, tol).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("value", r.value)?;
    d.set_item("tags", r.classification.tags())?;
    d.set_item("class_code", r.classification.code())?;
    d.set_item("spectrum_min", r.spectrum_min)?;
    d.set_item("spectrum_max", r.spectrum_max)?;
    d.set_item("henrici_a", r.henrici_a)?;
    d.set_item("henrici_aprime", r.henrici_aprime)?;
    d.set_item("overlap_sq", r.overlap_sq)?;
    Ok(d)
}

/// Departure from normality of an arbitrary square matrix.
#[pyfunction]
fn henrici_departure(rows: Vec<Vec<Complex64>>) -> PyResult<f64> {
    weak::henrici_spectral(&matrix(rows)?).map_err(err)
}

#[pyfunction]
fn normality_defect(rows: Vec<Vec<Complex64>>) -> PyResult<f64> {
    Ok(linalg::normality_defect(&matrix(rows)?))
}

#[pyfunction]
fn eigvals(rows: Vec<Vec<Complex64>>) -> PyResult<Vec<Complex64>> {
    linalg::eigvals(&matrix(rows)?).map_err(err)
}

/// Simulated von Neumann readout extrapolated to zero coupling.
#[pyfunction]
#[pyo3(signature = (obs, psi_i, psi_f, gamma_ladder, grid_points = 1024, x_extent = 20.0, sigma_x = 1.0, sign = "negative"))]
#[allow(clippy::too_many_arguments)]
fn meter_estimate<'py>(
    py: Python<'py>,
    obs: &Observable,
    psi_i: Vec<Complex64>,
    psi_f: Vec<Complex64>,
    gamma_ladder: Vec<f64>,
    grid_points: usize,
    x_extent: f64,
    sigma_x: f64,
    sign: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let mut c = ProtocolConfig::new(obs.inner.clone(), vector(psi_i)?, vector(psi_f)?, 0.0);
    c.meter = MeterConfig {
        grid_points,
        x_extent,
        sigma_x,
    };
    c.sign = match sign {
        "negative" => CouplingSign::Negative,
        "positive" => CouplingSign::Positive,
        _ => return Err(PyValueError::new_err("sign must be 'negative' or 'positive'")),
    };
    let est = py.detach(|| weak_shift_estimate(&c, &gamma_ladder)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("re_est", est.re_est)?;
    d.set_item("im_est", est.im_est)?;
    d.set_item("records", json_to_py(py, &est.records())?)?;
    Ok(d)
}

/// Run a preset and/or config mapping. Returns the summary and every table as
/// `{"axes": {name: [...]}, "fields": {name: [...]}, "meta": {...}}`; writes files when `out` is given.
#[pyfunction]
#[pyo3(signature = (preset = None, config = None, out = None, json = false))]
fn sweep<'py>(
    py: Python<'py>,
    preset: Option<&str>,
    config: Option<BTreeMap<String, String>>,
    out: Option<PathBuf>,
    json: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = match preset {
        Some(name) => wvnn::preset::preset(name).map_err(err)?,
        None => FlatConfig::default(),
    };
    for (k, v) in config.unwrap_or_default() {
        cfg.set(&k, v);
    }
    let run = py.detach(|| wvnn::preset::run_config(&cfg)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("summary", run.summary.clone())?;
    let tables = run
        .tables
        .iter()
        .map(|t| table_dict(py, t))
        .collect::<PyResult<Vec<_>>>()?;
    d.set_item("tables", tables)?;
    d.set_item("curves", json_to_py(py, &run.curves)?)?;
    if let Some(dir) = out {
        let paths = run.write(&dir, json).map_err(err)?;
        d.set_item("files", paths)?;
    }
    Ok(d)
}

fn table_dict<'py>(py: Python<'py>, t: &wvnn::sweep::SweepTable) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("id", &t.id)?;
    d.set_item("observable", &t.observable)?;
    let axes = PyDict::new(py);
    for a in &t.axes {
        axes.set_item(&a.name, &a.values)?;
    }
    d.set_item("axes", axes)?;
    let fields = PyDict::new(py);
    for (name, values) in &t.fields {
        fields.set_item(name, values)?;
    }
    d.set_item("fields", fields)?;
    d.set_item("meta", t.meta.clone())?;
    Ok(d)
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    wvnn::preset::preset_names()
}

/// Seeded invariant suite; returns the full report.
#[pyfunction]
#[pyo3(signature = (seed = None, samples = None, inject_fault = false))]
fn verify<'py>(
    py: Python<'py>,
    seed: Option<u64>,
    samples: Option<usize>,
    inject_fault: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let d = VerifyOptions::default();
    let opts = VerifyOptions {
        seed: seed.unwrap_or(d.seed),
        samples: samples.unwrap_or(d.samples),
        inject_fault,
    };
    let report = py.detach(|| run_verify(&opts));
    json_to_py(py, &report)
}

#[pymodule]
fn pywvnn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DegenerateInputError", m.py().get_type::<DegenerateInputError>())?;
    m.add_class::<Observable>()?;
    m.add_class::<WeakOperator>()?;
    m.add_function(wrap_pyfunction!(qubit_state, m)?)?;
    m.add_function(wrap_pyfunction!(qutrit_state, m)?)?;
    m.add_function(wrap_pyfunction!(weak_value, m)?)?;
    m.add_function(wrap_pyfunction!(weak_value_report, m)?)?;
    m.add_function(wrap_pyfunction!(henrici_departure, m)?)?;
    m.add_function(wrap_pyfunction!(normality_defect, m)?)?;
    m.add_function(wrap_pyfunction!(eigvals, m)?)?;
    m.add_function(wrap_pyfunction!(meter_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
