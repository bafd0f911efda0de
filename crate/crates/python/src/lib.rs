//! Python bindings for `ginibre-overlap`.

use ginibre_overlap::analytic_complex as ac;
use ginibre_overlap::analytic_real as ar;
use ginibre_overlap::analytic_real::{BulkPoint, EdgePoint, RealForm};
use ginibre_overlap::detratio as dr;
use ginibre_overlap::ensemble::{self as en, Beta, EigenKind, EnsembleSpec, C64};
use ginibre_overlap::mc_harness as mc;
use ginibre_overlap::{Error, QuadSpec};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for ginibre_overlap::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn beta(b: u8) -> PyResult<Beta> {
    Beta::try_from(b).py()
}

/// Finite-N joint density of `t` and a real eigenvalue `lam`.
#[pyfunction]
#[pyo3(signature = (n, t, lam, form = "gamma"))]
fn jpd_real(n: u32, t: f64, lam: f64, form: &str) -> PyResult<f64> {
    let form = match form {
        "gamma" => RealForm::GammaForm,
        "sum" => RealForm::SumForm,
        other => return Err(PyValueError::new_err(format!("form must be 'gamma' or 'sum', got {other:?}"))),
    };
    ar::jpd_real(&ar::RealJpdQuery::new(n, t, lam), form).py()
}

#[pyfunction]
fn density_real(n: u32, lam: f64) -> PyResult<f64> {
    ar::density_real(n, lam).py()
}

/// `(value, error estimate)` of the t-marginal of the real joint density.
#[pyfunction]
fn integrate_jpd_real(n: u32, lam: f64) -> PyResult<(f64, f64)> {
    let i = ar::integrate_jpd_real(n, lam, &QuadSpec::default()).py()?;
    Ok((i.value, i.err_est))
}

#[pyfunction]
fn jpd_real_bulk(s: f64, x: f64) -> PyResult<f64> {
    ar::jpd_real_bulk(BulkPoint { s, x }).py()
}

#[pyfunction]
fn jpd_real_edge(sigma: f64, delta: f64) -> PyResult<f64> {
    ar::jpd_real_edge(EdgePoint { sigma, delta }).py()
}

/// Finite-N joint density of `t` and a complex eigenvalue with `|z|^2 = z_abs_sq`.
#[pyfunction]
fn jpd_complex(n: u32, t: f64, z_abs_sq: f64) -> PyResult<f64> {
    ac::jpd_complex(&ac::ComplexJpdQuery::new(n, t, z_abs_sq)).py()
}

#[pyfunction]
fn jpd_complex_zero(n: u32, t: f64) -> PyResult<f64> {
    ac::jpd_complex_zero(n, t).py()
}

#[pyfunction]
fn density_complex(n: u32, z_abs_sq: f64) -> PyResult<f64> {
    ac::density_complex(n, z_abs_sq).py()
}

#[pyfunction]
fn integrate_jpd_complex(n: u32, z_abs_sq: f64) -> PyResult<(f64, f64)> {
    let i = ac::integrate_jpd_complex(n, z_abs_sq, &QuadSpec::default()).py()?;
    Ok((i.value, i.err_est))
}

#[pyfunction]
fn jpd_complex_bulk(s: f64, w_abs: f64) -> PyResult<f64> {
    ac::jpd_complex_bulk(BulkPoint { s, x: w_abs }).py()
}

#[pyfunction]
fn jpd_complex_edge(sigma: f64, delta: f64) -> PyResult<f64> {
    ac::jpd_complex_edge(EdgePoint { sigma, delta }).py()
}

/// One eigenvalue of a sampled matrix with its self-overlap.
#[pyclass(frozen, get_all)]
#[derive(Clone)]
struct OverlapSample {
    eigenvalue: C64,
    t: f64,
    is_real: bool,
    matrix_index: u64,
    residual: f64,
}

#[pymethods]
impl OverlapSample {
    fn __repr__(&self) -> String {
        format!("OverlapSample(eigenvalue={}, t={}, is_real={})", self.eigenvalue, self.t, self.is_real)
    }
}

/// Entries of the `index`-th matrix of the seeded stream, as a list of rows.
#[pyfunction]
fn sample_matrix(n: usize, beta_code: u8, seed: u64, index: u64) -> PyResult<Vec<Vec<C64>>> {
    let spec = EnsembleSpec::new(n, beta(beta_code)?, seed).py()?;
    let m = en::sample_ginibre(&spec, index).to_complex();
    Ok((0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect())
}

/// Eigenvalues and diagonal overlaps `t = O_aa - 1` of one sampled matrix.
#[pyfunction]
fn sample_overlaps(n: usize, beta_code: u8, seed: u64, index: u64) -> PyResult<Vec<OverlapSample>> {
    let spec = EnsembleSpec::new(n, beta(beta_code)?, seed).py()?;
    let g = en::sample_ginibre(&spec, index);
    let samples = en::overlaps_biorthogonal(&g, index).py()?;
    Ok(samples
        .into_iter()
        .map(|s| OverlapSample {
            eigenvalue: s.eigenvalue,
            t: s.t,
            is_real: s.kind == EigenKind::RealLine,
            matrix_index: s.matrix_index,
            residual: s.residual,
        })
        .collect())
}

/// Eigenvalue region for conditioning: a real interval or an annulus.
#[pyclass(frozen)]
#[derive(Clone)]
struct Window(mc::Window);

#[pymethods]
impl Window {
    #[staticmethod]
    fn real_interval(lo: f64, hi: f64) -> PyResult<Self> {
        mc::Window::real_interval(lo, hi).py().map(Self)
    }

    #[staticmethod]
    fn annulus(r1: f64, r2: f64) -> PyResult<Self> {
        mc::Window::annulus(r1, r2).py().map(Self)
    }

    fn __repr__(&self) -> String {
        format!("Window('{}')", self.0)
    }
}

/// Log-binned histogram of `t` over a sampling campaign.
#[pyclass]
#[derive(Clone)]
struct Histogram(mc::ConditionedHistogram);

#[pymethods]
impl Histogram {
    /// Bin counts; the first and last entries are under- and overflow.
    #[getter]
    fn counts(&self) -> Vec<u64> {
        self.0.counts.clone()
    }

    #[getter]
    fn bin_edges(&self) -> Vec<f64> {
        self.0.bin_edges.clone()
    }

    #[getter]
    fn n_samples(&self) -> u64 {
        self.0.n_samples
    }

    #[getter]
    fn n_matrices(&self) -> u64 {
        self.0.n_matrices
    }

    #[getter]
    fn n_rejected(&self) -> u64 {
        self.0.n_rejected
    }

    fn ecdf_at_edges(&self) -> Vec<f64> {
        self.0.ecdf_at_edges()
    }

    /// `(mean, standard error)` of the sampled t.
    fn mean_t(&self) -> PyResult<(f64, f64)> {
        self.0.mean_t().py()
    }

    fn merge(&mut self, other: &Histogram) -> PyResult<()> {
        self.0.merge(&other.0).py()
    }

    /// Kolmogorov-Smirnov test against the exact conditional law.
    #[pyo3(signature = (alpha = mc::DEFAULT_ALPHA))]
    fn compare(&self, alpha: f64) -> PyResult<ComparisonReport> {
        let r = mc::compare_to_analytic(&self.0, alpha, &QuadSpec::default()).py()?;
        Ok(ComparisonReport {
            statistic: r.statistic_value,
            threshold: r.threshold,
            sample_size: r.sample_size,
            passed: r.pass,
        })
    }

    /// `(slope, stderr)` of the survival function's log-log tail above `t_min`.
    fn tail_exponent(&self, t_min: f64) -> PyResult<(f64, f64)> {
        let f = mc::tail_exponent(&self.0, t_min).py()?;
        Ok((f.slope, f.stderr))
    }
}

#[pyclass(frozen, get_all)]
#[derive(Clone)]
struct ComparisonReport {
    statistic: f64,
    threshold: f64,
    sample_size: u64,
    passed: bool,
}

#[pymethods]
impl ComparisonReport {
    fn __repr__(&self) -> String {
        format!(
            "ComparisonReport(statistic={}, threshold={}, sample_size={}, passed={})",
            self.statistic,
            self.threshold,
            self.sample_size,
            if self.passed { "True" } else { "False" }
        )
    }
}

/// Histogram `t` over matrices `0..n_matrices` for eigenvalues in `window`.
#[pyfunction]
fn run_campaign(py: Python<'_>, n: usize, beta_code: u8, seed: u64, n_matrices: u64, window: &Window) -> PyResult<Histogram> {
    let spec = EnsembleSpec::new(n, beta(beta_code)?, seed).py()?;
    let w = window.0;
    py.allow_threads(|| mc::run_campaign(&spec, n_matrices, &w)).py().map(Histogram)
}

/// Conditional CDF of `t` for eigenvalues in `window`, on `t_grid`.
#[pyfunction]
fn conditional_cdf(n: usize, beta_code: u8, window: &Window, t_grid: Vec<f64>) -> PyResult<Vec<f64>> {
    let spec = EnsembleSpec::new(n, beta(beta_code)?, 0).py()?;
    mc::analytic_conditional_cdf(&spec, &window.0, &t_grid, &QuadSpec::default()).py()
}

fn query(n: usize, beta_code: u8, l: u32, z: C64, p: f64) -> PyResult<dr::DetRatioQuery> {
    dr::DetRatioQuery::new(n, beta(beta_code)?, l, z, p).py()
}

/// Closed form of the averaged determinant ratio.
#[pyfunction]
#[pyo3(name = "detratio_closed")]
fn detratio_closed_py(n: usize, beta_code: u8, l: u32, z: C64, p: f64) -> PyResult<f64> {
    dr::detratio_closed(&query(n, beta_code, l, z, p)?, &QuadSpec::default()).py()
}

/// Monte Carlo estimate `(mean, stderr, n_samples)` of the same ratio.
#[pyfunction]
#[pyo3(name = "detratio_mc")]
fn detratio_mc_py(
    py: Python<'_>,
    n: usize,
    beta_code: u8,
    l: u32,
    z: C64,
    p: f64,
    n_samples: u64,
    seed: u64,
) -> PyResult<(f64, f64, u64)> {
    let q = query(n, beta_code, l, z, p)?;
    let e = py.allow_threads(|| dr::detratio_mc(&q, n_samples, seed)).py()?;
    Ok((e.mean, e.stderr, e.n_samples))
}

#[pymodule]
fn pyginibre(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(jpd_real, m)?)?;
    m.add_function(wrap_pyfunction!(density_real, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_jpd_real, m)?)?;
    m.add_function(wrap_pyfunction!(jpd_real_bulk, m)?)?;
    m.add_function(wrap_pyfunction!(jpd_real_edge, m)?)?;
    m.add_function(wrap_pyfunction!(jpd_complex, m)?)?;
    m.add_function(wrap_pyfunction!(jpd_complex_zero, m)?)?;
    m.add_function(wrap_pyfunction!(density_complex, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_jpd_complex, m)?)?;
    m.add_function(wrap_pyfunction!(jpd_complex_bulk, m)?)?;
    m.add_function(wrap_pyfunction!(jpd_complex_edge, m)?)?;
    m.add_function(wrap_pyfunction!(sample_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(sample_overlaps, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(detratio_closed_py, m)?)?;
    m.add_function(wrap_pyfunction!(detratio_mc_py, m)?)?;
    m.add_class::<OverlapSample>()?;
    m.add_class::<Window>()?;
    m.add_class::<Histogram>()?;
    m.add_class::<ComparisonReport>()?;
    Ok(())
}
