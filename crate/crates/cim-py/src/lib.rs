//! Python bindings exposing the estimator family, the streaming kernel, the
//! index with its region report, null calibration, and the synthetic
//! generators.

use cim_core::synth::{
    gen_markov_chain, gen_parabola, gen_pattern, sample_copula, CopulaFamily, CopulaSpec, Margin,
    Pattern, PatternSpec,
};
use cim_core::{CimError, DimensionKind, SamplePairs, ScanConfig, Statistic};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: CimError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_pairs(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<SamplePairs> {
    SamplePairs::new(xs, ys).map_err(py_err)
}

fn parse_kind(name: &str) -> PyResult<DimensionKind> {
    match name {
        "continuous" => Ok(DimensionKind::Continuous),
        "discrete" => Ok(DimensionKind::Discrete),
        other => Err(PyValueError::new_err(format!(
            "unknown dimension kind '{other}'"
        ))),
    }
}

fn kind_name(kind: DimensionKind) -> &'static str {
    match kind {
        DimensionKind::Continuous => "continuous",
        DimensionKind::Discrete => "discrete",
    }
}

fn scan_config(msi: f64, alpha: f64) -> PyResult<ScanConfig> {
    let cfg = ScanConfig {
        msi,
        alpha,
        ..ScanConfig::default()
    };
    cfg.validate().map_err(py_err)?;
    Ok(cfg)
}

/// Rank-transforms both margins onto (0, 1], ties sharing the max rank.
#[pyfunction]
fn pseudo_observations(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = cim_core::pseudo_observations(&to_pairs(xs, ys)?);
    Ok((p.us, p.vs))
}

/// Classifies a margin as "continuous" or "discrete" by its tie counts.
#[pyfunction]
fn classify_dimension(values: Vec<f64>) -> PyResult<&'static str> {
    Ok(kind_name(cim_core::classify_dimension(&values)))
}

/// Classic Kendall tau; raises if either margin has ties.
#[pyfunction]
fn tau(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    Ok(cim_core::tau_hat(&to_pairs(xs, ys)?).map_err(py_err)?.value)
}

/// Tie-scaled tau-b.
#[pyfunction]
fn tau_b(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    Ok(cim_core::tau_b_hat(&to_pairs(xs, ys)?).value)
}

/// Tie-corrected tau for discrete margins.
#[pyfunction]
fn tau_n(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    Ok(cim_core::tau_n_hat(&to_pairs(xs, ys)?).value)
}

/// Tau for continuous, discrete, or hybrid margins. `kinds` is an optional
/// pair like ("continuous", "discrete"); margins are classified
/// automatically when omitted.
#[pyfunction]
#[pyo3(signature = (xs, ys, kinds=None))]
fn tau_kl(xs: Vec<f64>, ys: Vec<f64>, kinds: Option<(String, String)>) -> PyResult<f64> {
    let pairs = to_pairs(xs, ys)?;
    let result = match kinds {
        Some((a, b)) => cim_core::tau_kl_hat(&pairs, (parse_kind(&a)?, parse_kind(&b)?)),
        None => cim_core::tau_kl_hat_auto(&pairs),
    };
    Ok(result.value)
}

/// One detected region of monotonicity.
#[pyclass(get_all, skip_from_py_object)]
#[derive(Clone)]
struct Region {
    scan_lo: f64,
    scan_hi: f64,
    cross_lo: f64,
    cross_hi: f64,
    tau_kl: f64,
    count: u64,
}

#[pymethods]
impl Region {
    fn __repr__(&self) -> String {
        format!(
            "Region(scan=[{:.4},{:.4}), cross=[{:.4},{:.4}), tau_kl={:.4}, count={})",
            self.scan_lo, self.scan_hi, self.cross_lo, self.cross_hi, self.tau_kl, self.count
        )
    }
}

/// Result of the index computation.
#[pyclass(get_all)]
struct CimResult {
    value: f64,
    tau_kl: f64,
    region_count: usize,
    regions: Vec<Region>,
    winning_si: f64,
    winning_orientation: String,
    winning_split: u32,
    n: u64,
}

#[pymethods]
impl CimResult {
    fn __repr__(&self) -> String {
        format!(
            "CimResult(value={:.6}, regions={}, n={})",
            self.value, self.region_count, self.n
        )
    }
}

/// Computes the dependence index with its monotonicity-region report.
#[pyfunction]
#[pyo3(signature = (xs, ys, msi=1.0/64.0, alpha=0.2))]
fn compute_cim(xs: Vec<f64>, ys: Vec<f64>, msi: f64, alpha: f64) -> PyResult<CimResult> {
    let cfg = scan_config(msi, alpha)?;
    let result = cim_core::compute_cim(&to_pairs(xs, ys)?, &cfg).map_err(py_err)?;
    Ok(CimResult {
        value: result.value,
        tau_kl: result.tau_kl_global,
        region_count: cim_core::region_count(&result, 0.05),
        regions: result
            .regions
            .iter()
            .map(|r| Region {
                scan_lo: r.scan_axis_interval.0,
                scan_hi: r.scan_axis_interval.1,
                cross_lo: r.cross_axis_interval.0,
                cross_hi: r.cross_axis_interval.1,
                tau_kl: r.tau_kl,
                count: r.sample_count,
            })
            .collect(),
        winning_si: result.winning_si,
        winning_orientation: match result.winning_orientation {
            cim_core::Orientation::UScansV => "u_scans_v".to_string(),
            cim_core::Orientation::VScansU => "v_scans_u".to_string(),
        },
        winning_split: result.winning_split,
        n: result.n,
    })
}

/// Incremental tau over scan-ordered samples.
#[pyclass]
struct TauStream {
    inner: cim_core::TauStream,
}

#[pymethods]
impl TauStream {
    #[new]
    #[pyo3(signature = (hybrid_overlap=true))]
    fn new(hybrid_overlap: bool) -> Self {
        TauStream {
            inner: cim_core::TauStream::with_overlap(hybrid_overlap),
        }
    }

    /// Consumes one sample and returns tau over everything seen so far.
    fn consume(&mut self, u: f64, v: f64) -> PyResult<f64> {
        self.inner.consume(u, v).map_err(py_err)
    }

    fn current(&self) -> f64 {
        self.inner.current()
    }

    fn count(&self) -> u64 {
        self.inner.count()
    }

    fn reset(&mut self) {
        self.inner.reset()
    }
}

/// A calibrated null distribution.
#[pyclass]
struct NullModel {
    inner: cim_core::NullModel,
    cfg: ScanConfig,
}

#[pymethods]
impl NullModel {
    /// Right-tail (index) or two-sided (tau) significance of an observation.
    fn p_value(&self, observed: f64) -> PyResult<f64> {
        cim_core::p_value(&self.inner, observed, Some(&self.cfg)).map_err(py_err)
    }

    /// Fit parameters: ("gaussian", mean, sd) or ("beta", a, b).
    fn fit(&self) -> (String, f64, f64) {
        match self.inner.fit {
            cim_core::NullFit::Gaussian { mean, sd } => ("gaussian".into(), mean, sd),
            cim_core::NullFit::Beta { a, b } => ("beta".into(), a, b),
        }
    }

    fn samples(&self) -> Vec<f64> {
        self.inner.samples.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

/// Calibrates a null distribution for "tau_kl" or "cim" at sample size `n`
/// from `b` independent replicates.
#[pyfunction]
#[pyo3(signature = (statistic, n, b, kinds=("continuous".to_string(), "continuous".to_string()), seed=0, msi=1.0/64.0, alpha=0.2))]
fn calibrate_null(
    statistic: &str,
    n: u64,
    b: u64,
    kinds: (String, String),
    seed: u64,
    msi: f64,
    alpha: f64,
) -> PyResult<NullModel> {
    let statistic = match statistic {
        "tau_kl" => Statistic::TauKl,
        "cim" => Statistic::Cim,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown statistic '{other}'"
            )))
        }
    };
    let cfg = scan_config(msi, alpha)?;
    let inner = cim_core::calibrate_null(
        statistic,
        n,
        b,
        (parse_kind(&kinds.0)?, parse_kind(&kinds.1)?),
        seed,
        &cfg,
    )
    .map_err(py_err)?;
    Ok(NullModel { inner, cfg })
}

/// Generates a noisy functional pattern; see `patterns()` for names.
#[pyfunction]
#[pyo3(name = "gen_pattern", signature = (pattern, n, noise_sd=0.0, seed=0))]
fn gen_pattern_py(
    pattern: &str,
    n: usize,
    noise_sd: f64,
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let s = gen_pattern(&PatternSpec {
        pattern: Pattern::parse(pattern).map_err(py_err)?,
        n,
        noise_sd,
        seed,
    })
    .map_err(py_err)?;
    Ok((s.xs().to_vec(), s.ys().to_vec()))
}

/// The supported pattern names.
#[pyfunction]
fn patterns() -> Vec<&'static str> {
    Pattern::ALL.iter().map(|p| p.name()).collect()
}

/// `Y = 4 (X - r)^2 + N(0, noise_sd^2)` with `X ~ U(0, 1)`.
#[pyfunction]
#[pyo3(name = "gen_parabola", signature = (r, noise_sd, n, seed=0))]
fn gen_parabola_py(r: f64, noise_sd: f64, n: usize, seed: u64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let s = gen_parabola(r, noise_sd, n, seed).map_err(py_err)?;
    Ok((s.xs().to_vec(), s.ys().to_vec()))
}

/// Draws dependent pairs from a copula family ("gaussian", "frank",
/// "gumbel", "clayton") at strength `tau`. Margins are "gaussian" or a
/// positive integer for that many uniform discrete levels.
#[pyfunction]
#[pyo3(name = "sample_copula", signature = (family, tau, n, margins=("gaussian".to_string(), "gaussian".to_string()), seed=0))]
fn sample_copula_py(
    family: &str,
    tau: f64,
    n: usize,
    margins: (String, String),
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let parse_margin = |text: &str| -> PyResult<Margin> {
        if text == "gaussian" {
            Ok(Margin::ContinuousGaussian)
        } else if let Ok(levels) = text.parse::<u32>() {
            Ok(Margin::DiscreteUniform(levels))
        } else {
            Err(PyValueError::new_err(format!("unknown margin '{text}'")))
        }
    };
    let s = sample_copula(&CopulaSpec {
        family: CopulaFamily::parse(family).map_err(py_err)?,
        tau,
        n,
        margins: (parse_margin(&margins.0)?, parse_margin(&margins.1)?),
        seed,
    })
    .map_err(py_err)?;
    Ok((s.xs().to_vec(), s.ys().to_vec()))
}

/// A Gaussian Markov chain as a dict of column name to values.
#[pyfunction]
#[pyo3(name = "gen_markov_chain", signature = (n_vars, n, link_tau, seed=0))]
fn gen_markov_chain_py(
    py: Python<'_>,
    n_vars: usize,
    n: usize,
    link_tau: f64,
    seed: u64,
) -> PyResult<Py<pyo3::types::PyDict>> {
    let d = gen_markov_chain(n_vars, n, link_tau, seed).map_err(py_err)?;
    let dict = pyo3::types::PyDict::new(py);
    for (name, col) in d.names().iter().zip(d.columns()) {
        dict.set_item(name, col.clone())?;
    }
    Ok(dict.into())
}

/// Gaussian-copula parameter implied by tau: `sin(pi * tau / 2)`.
#[pyfunction]
fn tau_to_gaussian_rho(tau: f64) -> PyResult<f64> {
    cim_core::tau_to_gaussian_rho(tau).map_err(py_err)
}

#[pymodule]
fn cim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Region>()?;
    m.add_class::<CimResult>()?;
    m.add_class::<TauStream>()?;
    m.add_class::<NullModel>()?;
    m.add_function(wrap_pyfunction!(pseudo_observations, m)?)?;
    m.add_function(wrap_pyfunction!(classify_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(tau, m)?)?;
    m.add_function(wrap_pyfunction!(tau_b, m)?)?;
    m.add_function(wrap_pyfunction!(tau_n, m)?)?;
    m.add_function(wrap_pyfunction!(tau_kl, m)?)?;
    m.add_function(wrap_pyfunction!(compute_cim, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_null, m)?)?;
    m.add_function(wrap_pyfunction!(patterns, m)?)?;
    m.add_function(wrap_pyfunction!(tau_to_gaussian_rho, m)?)?;
    m.add_function(wrap_pyfunction!(gen_pattern_py, m)?)?;
    m.add_function(wrap_pyfunction!(gen_parabola_py, m)?)?;
    m.add_function(wrap_pyfunction!(sample_copula_py, m)?)?;
    m.add_function(wrap_pyfunction!(gen_markov_chain_py, m)?)?;
    Ok(())
}
