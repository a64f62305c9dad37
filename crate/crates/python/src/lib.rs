//! Python bindings: grid domains, spectra, torsion, asymmetries, the
//! inequality harness and exponent fits.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use speclab::asymmetry;
use speclab::dirichlet;
use speclab::geometry::{Family, GridDomain, TwoBallConfig};
use speclab::harness::{self, DomainSpec, HarnessOptions, InequalityId};
use speclab::nodal;
use speclab::reference::Reference;
use speclab::report::{self, RunConfig};
use speclab::sharpness::{self, DeltaMode, SharpnessOptions};
use speclab::sparse::{smallest_eigenpairs, SparseSymMatrix};

fn err(e: speclab::Error) -> PyErr {
    match e {
        speclab::Error::IterationLimit { .. } | speclab::Error::NotPositiveDefinite { .. } | speclab::Error::Io(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(f)) => f.into_pyobject(py)?.into_any(),
            _ => py.None().into_bound(py),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let items = a.iter().map(|x| value_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, value_to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn to_py<'py, T: Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(x).map_err(|e| PyValueError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

/// A set of lattice cells of spacing `h`.
#[pyclass(name = "Domain", module = "pyspeclab", frozen)]
struct PyDomain {
    inner: GridDomain,
}

#[pymethods]
impl PyDomain {
    /// Disk (or ball, with a 3-element center) of the given radius.
    #[staticmethod]
    #[pyo3(signature = (radius, h, center = vec![0.0, 0.0]))]
    fn ball(radius: f64, h: f64, center: Vec<f64>) -> PyResult<Self> {
        Ok(PyDomain {
            inner: speclab::make_ball(radius, &center, h).map_err(err)?,
        })
    }

    /// Two disjoint equal balls of total measure `ω_d`, centers `separation` apart.
    #[staticmethod]
    #[pyo3(signature = (separation, h, dim = 2))]
    fn theta(separation: f64, h: f64, dim: usize) -> PyResult<Self> {
        let cfg = TwoBallConfig::theta(dim, separation).map_err(err)?;
        Ok(PyDomain {
            inner: speclab::make_theta(&cfg, h).map_err(err)?,
        })
    }

    /// Member `t` of a parametric family: "volume-split", "ellipse-pair", "dumbbell-neck".
    #[staticmethod]
    fn family(name: &str, t: f64, h: f64) -> PyResult<Self> {
        Ok(PyDomain {
            inner: speclab::domain_family(name, t, h).map_err(err)?,
        })
    }

    /// Rasterize a domain spec given as JSON, e.g.
    /// `{"label": "e", "shape": {"kind": "ellipsoid", "semi_axes": [2, 1]}}`.
    #[staticmethod]
    fn from_spec(spec_json: &str, h: f64) -> PyResult<Self> {
        let spec: DomainSpec = serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyDomain {
            inner: spec.rasterize(h).map_err(err)?,
        })
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn measure(&self) -> f64 {
        self.inner.measure()
    }

    #[getter]
    fn cell_count(&self) -> usize {
        self.inner.cell_count()
    }

    /// Frame extent `[nx, ny, nz]`.
    #[getter]
    fn shape(&self) -> [usize; 3] {
        self.inner.frame().extent
    }

    /// Row-major mask, x fastest.
    fn mask(&self) -> Vec<bool> {
        self.inner.mask().to_vec()
    }

    fn to_pgm<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.to_pgm())
    }

    fn components(&self) -> Vec<PyDomain> {
        nodal::connected_components(&self.inner)
            .into_iter()
            .map(|inner| PyDomain { inner })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Domain(label={:?}, h={}, cells={}, measure={:.6})",
            self.inner.label(),
            self.inner.h(),
            self.inner.cell_count(),
            self.inner.measure()
        )
    }
}

/// The `k` smallest Dirichlet eigenvalues on one grid.
#[pyfunction]
fn spectrum<'py>(py: Python<'py>, domain: &PyDomain, k: usize) -> PyResult<Bound<'py, PyAny>> {
    let s = py.detach(|| dirichlet::spectrum(&domain.inner, k)).map_err(err)?;
    to_py(py, &s)
}

/// Eigenfunction `j` (0-based) of the grid operator on the domain's frame.
#[pyfunction]
fn eigenfunction(py: Python<'_>, domain: &PyDomain, k: usize, j: usize) -> PyResult<Vec<f64>> {
    let s = py.detach(|| dirichlet::spectrum(&domain.inner, k)).map_err(err)?;
    s.eigenfunctions
        .get(j)
        .cloned()
        .ok_or_else(|| PyValueError::new_err(format!("eigenfunction {j} not among the first {k}")))
}

/// Torsion function summary on one grid.
#[pyfunction]
fn torsion<'py>(py: Python<'py>, domain: &PyDomain) -> PyResult<Bound<'py, PyAny>> {
    let t = py.detach(|| dirichlet::torsion(&domain.inner)).map_err(err)?;
    to_py(py, &t)
}

/// Spectrum and torsion from a (coarse, fine) pair of rasterizations, extrapolated.
#[pyfunction]
#[pyo3(signature = (coarse, fine, k, with_torsion = false))]
fn extrapolated<'py>(
    py: Python<'py>,
    coarse: &PyDomain,
    fine: &PyDomain,
    k: usize,
    with_torsion: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let domains = [coarse.inner.clone(), fine.inner.clone()];
    let s = py
        .detach(|| dirichlet::solve_domains(&domains, k, with_torsion))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("spectrum", to_py(py, &s.spectrum)?)?;
    d.set_item("torsion", to_py(py, &s.torsion)?)?;
    Ok(d.into_any())
}

#[pyfunction]
fn fraenkel1<'py>(py: Python<'py>, domain: &PyDomain) -> PyResult<Bound<'py, PyAny>> {
    let r = py.detach(|| asymmetry::fraenkel1(&domain.inner)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
fn fraenkel2<'py>(py: Python<'py>, domain: &PyDomain) -> PyResult<Bound<'py, PyAny>> {
    let r = py.detach(|| asymmetry::fraenkel2(&domain.inner)).map_err(err)?;
    to_py(py, &r)
}

/// Split into two disjoint pieces with `max λ₁(Ω±) ≤ λ₂(Ω)`.
#[pyfunction]
fn decompose<'py>(py: Python<'py>, domain: &PyDomain) -> PyResult<Bound<'py, PyAny>> {
    let dec = py
        .detach(|| {
            let s = dirichlet::spectrum(&domain.inner, 2)?;
            let dec = nodal::decompose(&domain.inner, &s)?;
            Ok::<_, speclab::Error>((s, dec))
        })
        .map_err(err)?;
    let d = to_py(py, &dec.1)?;
    d.set_item("lambda2", dec.0.lambda(2))?;
    Ok(d)
}

/// Closed-form ball and two-ball data at the volume of the unit ball.
#[pyfunction]
#[pyo3(signature = (dim = 2, k = 6))]
fn reference<'py>(py: Python<'py>, dim: usize, k: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &Reference::new(dim, k).map_err(err)?)
}

fn harness_options(ladder: Vec<f64>, k_max: usize, checks: Vec<String>) -> PyResult<HarnessOptions> {
    let checks = checks
        .iter()
        .map(|c| c.parse::<InequalityId>())
        .collect::<speclab::Result<Vec<_>>>()
        .map_err(err)?;
    Ok(HarnessOptions {
        ladder,
        k_max,
        checks,
        ..HarnessOptions::default()
    })
}

/// Inequality records for one domain spec (JSON).
#[pyfunction]
#[pyo3(signature = (spec_json, ladder = vec![1.0 / 32.0, 1.0 / 64.0], k_max = 6, checks = vec![]))]
fn verify<'py>(
    py: Python<'py>,
    spec_json: &str,
    ladder: Vec<f64>,
    k_max: usize,
    checks: Vec<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let spec: DomainSpec = serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let opts = harness_options(ladder, k_max, checks)?;
    opts.validate().map_err(err)?;
    let records = py
        .detach(|| harness::evaluate(&spec, &opts).map(|e| harness::records_for(&e, &opts)))
        .map_err(err)?;
    to_py(py, &records)
}

/// Sweep the built-in corpus (or the first `limit` entries of it).
#[pyfunction]
#[pyo3(signature = (ladder = vec![1.0 / 32.0, 1.0 / 64.0], k_max = 6, checks = vec![], limit = None))]
fn sweep_default<'py>(
    py: Python<'py>,
    ladder: Vec<f64>,
    k_max: usize,
    checks: Vec<String>,
    limit: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = harness_options(ladder, k_max, checks)?;
    let mut corpus = harness::default_corpus();
    if let Some(n) = limit {
        corpus.truncate(n);
    }
    let report = py.detach(|| harness::sweep(&corpus, &opts)).map_err(err)?;
    to_py(py, &report)
}

fn parse_family(name: &str) -> PyResult<Family> {
    name.parse::<Family>().map_err(err)
}

fn parse_mode(mode: &str) -> PyResult<DeltaMode> {
    match mode {
        "positive-part" => Ok(DeltaMode::PositivePart),
        "absolute" => Ok(DeltaMode::Absolute),
        _ => Err(PyValueError::new_err(format!("unknown mode `{mode}`"))),
    }
}

/// Log–log slope of `Δλ_k` against `Δλ₂` along a family, from grid solves.
#[pyfunction]
#[pyo3(signature = (family, k, t_grid = None, ladder = vec![1.0 / 32.0, 1.0 / 64.0], mode = "positive-part"))]
fn fit_exponent<'py>(
    py: Python<'py>,
    family: &str,
    k: usize,
    t_grid: Option<Vec<f64>>,
    ladder: Vec<f64>,
    mode: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let f = parse_family(family)?;
    let grid = t_grid.unwrap_or_else(|| sharpness::default_t_grid(f));
    let opts = SharpnessOptions {
        ladder,
        mode: parse_mode(mode)?,
        ..SharpnessOptions::default()
    };
    let fit = py.detach(|| sharpness::fit_exponent(f, k, &grid, &opts)).map_err(err)?;
    to_py(py, &fit)
}

/// The same fit against closed-form eigenvalues (volume-split only).
#[pyfunction]
#[pyo3(signature = (family, k, t_grid, mode = "absolute", dim = 2))]
fn fit_exponent_analytic<'py>(
    py: Python<'py>,
    family: &str,
    k: usize,
    t_grid: Vec<f64>,
    mode: &str,
    dim: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let fit = sharpness::fit_exponent_analytic(parse_family(family)?, k, &t_grid, parse_mode(mode)?, dim)
        .map_err(err)?;
    to_py(py, &fit)
}

/// Smallest eigenpairs of a dense symmetric positive definite matrix.
#[pyfunction]
#[pyo3(signature = (matrix, k, tol = 1e-10))]
fn smallest_eigenpairs_dense(py: Python<'_>, matrix: Vec<Vec<f64>>, k: usize, tol: f64) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let triplets: Vec<(usize, usize, f64)> = matrix
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(j, &v)| (i, j, v)))
        .collect();
    let a = SparseSymMatrix::from_triplets(n, &triplets).map_err(err)?;
    let pairs = py.detach(|| smallest_eigenpairs(&a, k, tol)).map_err(err)?;
    Ok(pairs.into_iter().map(|p| (p.value, p.vector)).unzip())
}

/// Run a TOML config; returns `(exit_code, files, summary)`.
#[pyfunction]
#[pyo3(signature = (path, out = None))]
fn run_config(py: Python<'_>, path: std::path::PathBuf, out: Option<std::path::PathBuf>) -> PyResult<(i32, Vec<String>, Vec<String>)> {
    let cfg = RunConfig::load(&path).map_err(err)?;
    let o = py.detach(|| report::run(&cfg, out.as_deref())).map_err(err)?;
    Ok((
        o.exit_code,
        o.files.iter().map(|p| p.display().to_string()).collect(),
        o.summary,
    ))
}

#[pymodule]
fn pyspeclab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDomain>()?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(eigenfunction, m)?)?;
    m.add_function(wrap_pyfunction!(torsion, m)?)?;
    m.add_function(wrap_pyfunction!(extrapolated, m)?)?;
    m.add_function(wrap_pyfunction!(fraenkel1, m)?)?;
    m.add_function(wrap_pyfunction!(fraenkel2, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(reference, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_default, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponent_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(smallest_eigenpairs_dense, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
