//! Python bindings: `import pyalphamu`.

use alphamu::series::{evaluate, truncation_bound};
use alphamu::{CombinerKind, Error, EvalOptions, SeriesEval, SeriesKind, SnrConfig, SumSpec};
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) => PyValueError::new_err(e.to_string()),
        Error::NumericRange(_) | Error::PrecisionLoss { .. } => PyArithmeticError::new_err(e.to_string()),
        Error::Convergence { .. } | Error::Resolution(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn spec(alpha: f64, mu: f64, rhat: f64, l: u32) -> PyResult<SumSpec> {
    SumSpec::from_parts(alpha, mu, rhat, l).map_err(to_py)
}

fn combiner(name: &str) -> PyResult<CombinerKind> {
    CombinerKind::parse(name).map_err(to_py)
}

/// One series evaluation.
#[pyclass(frozen, get_all, skip_from_py_object)]
pub struct Series {
    pub value: f64,
    pub terms_used: usize,
    /// None when no closed-form bound could be computed.
    pub certified_bound: Option<f64>,
    pub bound_kind: &'static str,
    pub rounding_estimate: f64,
}

#[pymethods]
impl Series {
    fn __repr__(&self) -> String {
        format!(
            "Series(value={:e}, terms_used={}, certified_bound={:?}, bound_kind='{}')",
            self.value, self.terms_used, self.certified_bound, self.bound_kind
        )
    }
}

impl From<SeriesEval> for Series {
    fn from(e: SeriesEval) -> Self {
        Self {
            value: e.value,
            terms_used: e.terms_used,
            certified_bound: e.certified_bound,
            bound_kind: e.bound_kind.name(),
            rounding_estimate: e.rounding_estimate,
        }
    }
}

fn series(alpha: f64, mu: f64, rhat: f64, l: u32, r: f64, kind: SeriesKind, tol: f64, max_terms: usize) -> PyResult<Series> {
    let opts = EvalOptions {
        target_abs_err: tol,
        max_terms,
        ..EvalOptions::default()
    };
    evaluate(&spec(alpha, mu, rhat, l)?, r, kind, &opts).map(Series::from).map_err(to_py)
}

/// Density of the sum of `l` i.i.d. α-μ envelopes at `r`.
#[pyfunction]
#[pyo3(signature = (alpha, mu, rhat, l, r, tol = 1e-12, max_terms = 500))]
pub fn sum_pdf(alpha: f64, mu: f64, rhat: f64, l: u32, r: f64, tol: f64, max_terms: usize) -> PyResult<Series> {
    series(alpha, mu, rhat, l, r, SeriesKind::Pdf, tol, max_terms)
}

#[pyfunction]
#[pyo3(signature = (alpha, mu, rhat, l, r, tol = 1e-12, max_terms = 500))]
pub fn sum_cdf(alpha: f64, mu: f64, rhat: f64, l: u32, r: f64, tol: f64, max_terms: usize) -> PyResult<Series> {
    series(alpha, mu, rhat, l, r, SeriesKind::Cdf, tol, max_terms)
}

/// Closed-form bound on the tail left after `n_terms` terms; `kind` is "pdf" or "cdf".
#[pyfunction]
#[pyo3(signature = (alpha, mu, rhat, l, r, n_terms, kind = "pdf"))]
pub fn bound(alpha: f64, mu: f64, rhat: f64, l: u32, r: f64, n_terms: usize, kind: &str) -> PyResult<f64> {
    let kind = match kind {
        "pdf" => SeriesKind::Pdf,
        "cdf" => SeriesKind::Cdf,
        other => return Err(PyValueError::new_err(format!("kind must be 'pdf' or 'cdf', got '{other}'"))),
    };
    truncation_bound(&spec(alpha, mu, rhat, l)?, r, n_terms, kind).map_err(to_py)
}

/// Average symbol error rate of an `egc` or `mrc` receiver at `snr_db` (Es/N0).
#[pyfunction]
#[pyo3(signature = (alpha, mu, rhat, l, combiner_name, snr_db, g = 1.0, tol = 1e-8))]
pub fn aser(alpha: f64, mu: f64, rhat: f64, l: u32, combiner_name: &str, snr_db: f64, g: f64, tol: f64) -> PyResult<f64> {
    let cfg = SnrConfig::from_db(snr_db, g, 0.0).map_err(to_py)?;
    alphamu::aser(&spec(alpha, mu, rhat, l)?, combiner(combiner_name)?, &cfg, tol)
        .map(|a| a.value)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (alpha, mu, rhat, l, combiner_name, snr_db, gamma_out_db, tol = 1e-8))]
pub fn outage(alpha: f64, mu: f64, rhat: f64, l: u32, combiner_name: &str, snr_db: f64, gamma_out_db: f64, tol: f64) -> PyResult<f64> {
    let cfg = SnrConfig::from_db(snr_db, 1.0, gamma_out_db).map_err(to_py)?;
    alphamu::outage_probability(&spec(alpha, mu, rhat, l)?, combiner(combiner_name)?, &cfg, tol)
        .map(|e| e.value)
        .map_err(to_py)
}

/// (diversity_gain, coding_gain) of the high-SNR ASER asymptote.
#[pyfunction]
#[pyo3(signature = (alpha, mu, rhat, l, combiner_name, g = 1.0))]
pub fn aser_gains(alpha: f64, mu: f64, rhat: f64, l: u32, combiner_name: &str, g: f64) -> PyResult<(f64, f64)> {
    let cfg = SnrConfig::from_db(0.0, g, 0.0).map_err(to_py)?;
    let (_, gains) = alphamu::aser_asymptotic(&spec(alpha, mu, rhat, l)?, combiner(combiner_name)?, &cfg).map_err(to_py)?;
    Ok((gains.diversity_gain, gains.coding_gain))
}

/// Monte Carlo CDF of the sum at each point of `grid`; returns (values, dkw_band).
#[pyfunction]
#[pyo3(signature = (alpha, mu, rhat, l, grid, samples = 1_000_000, seed = 1))]
pub fn mc_cdf(alpha: f64, mu: f64, rhat: f64, l: u32, grid: Vec<f64>, samples: usize, seed: u64) -> PyResult<(Vec<f64>, f64)> {
    let e = alphamu::mc_empirical_cdf(&spec(alpha, mu, rhat, l)?, &grid, samples, seed).map_err(to_py)?;
    Ok((e.values, e.dkw_band))
}

#[pymodule]
fn pyalphamu(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Series>()?;
    m.add_function(wrap_pyfunction!(sum_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(sum_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    m.add_function(wrap_pyfunction!(aser, m)?)?;
    m.add_function(wrap_pyfunction!(outage, m)?)?;
    m.add_function(wrap_pyfunction!(aser_gains, m)?)?;
    m.add_function(wrap_pyfunction!(mc_cdf, m)?)?;
    Ok(())
}
