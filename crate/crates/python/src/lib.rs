//! Python bindings for `phasedisc`.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use phasedisc::bpsk::{self, BpskConfig};
use phasedisc::gram;
use phasedisc::optimizer;
use phasedisc::probes::{self, ProbeSpec, Sign};

create_exception!(pyphasedisc, ConvergenceError, PyRuntimeError);

fn to_py(e: phasedisc::Error) -> PyErr {
    match e {
        phasedisc::Error::Convergence(msg) => ConvergenceError::new_err(msg),
        phasedisc::Error::Truncation { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Photon-number distribution folded modulo M.
#[pyclass(frozen, name = "ModMDistribution")]
struct PyModMDistribution {
    inner: phasedisc::ModMDistribution,
}

#[pymethods]
impl PyModMDistribution {
    #[new]
    fn new(pfrak: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: phasedisc::ModMDistribution::new(pfrak).map_err(to_py)?,
        })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn pfrak(&self) -> Vec<f64> {
        self.inner.pfrak().to_vec()
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.inner.pfrak_energy()
    }

    fn gram_row(&self) -> PyGramRow {
        PyGramRow {
            inner: gram::gram_row_from_pfrak(&self.inner),
        }
    }

    fn error_probability(&self) -> f64 {
        gram::error_probability_from_pfrak(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("ModMDistribution({:?})", self.inner.pfrak())
    }
}

/// First row of a circulant Gram matrix.
#[pyclass(frozen, name = "GramRow")]
struct PyGramRow {
    inner: gram::GramRow,
}

#[pymethods]
impl PyGramRow {
    #[new]
    fn new(entries: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self {
            inner: gram::GramRow::new(entries).map_err(to_py)?,
        })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn entries(&self) -> Vec<Complex64> {
        self.inner.entries().to_vec()
    }

    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        Ok(self.inner.eigenvalues().map_err(to_py)?.lambdas().to_vec())
    }

    fn error_probability(&self) -> PyResult<f64> {
        Ok(self.inner.eigenvalues().map_err(to_py)?.error_probability())
    }

    fn __len__(&self) -> usize {
        self.inner.m()
    }
}

/// Energy-constrained optimal probe 𝔭_ν = 1/(A + νB)².
#[pyclass(frozen, name = "OptimalSolution")]
struct PyOptimalSolution {
    inner: optimizer::OptimalSolution,
}

#[pymethods]
impl PyOptimalSolution {
    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn pfrak(&self) -> Vec<f64> {
        self.inner.pfrak.pfrak().to_vec()
    }

    #[getter]
    fn p_error(&self) -> f64 {
        self.inner.error_probability
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual_norm
    }

    fn __repr__(&self) -> String {
        format!(
            "OptimalSolution(a={}, b={}, p_error={})",
            self.inner.a, self.inner.b, self.inner.error_probability
        )
    }
}

#[pyfunction]
fn solve_optimal(n_s: f64, m: usize) -> PyResult<PyOptimalSolution> {
    Ok(PyOptimalSolution {
        inner: optimizer::solve_optimal(n_s, m).map_err(to_py)?,
    })
}

#[pyfunction]
fn optimal_error_curve(m: usize, grid: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
    optimizer::optimal_error_curve(m, &grid).map_err(to_py)
}

/// Gram row of a named probe family. Keyword parameters follow the family:
/// coherent(n_s), squeezed(alpha, mu, nu), tmsv(n_s, j), pcs(zeta), ecs(alpha),
/// optimal(n_s), uniform().
#[pyfunction]
#[pyo3(signature = (family, m, **params))]
fn probe_gram_row(
    family: &str,
    m: usize,
    params: Option<&Bound<'_, PyDict>>,
) -> PyResult<PyGramRow> {
    let get = |name: &str| -> PyResult<f64> {
        params
            .and_then(|p| p.get_item(name).ok().flatten())
            .ok_or_else(|| PyValueError::new_err(format!("{family} needs parameter {name}")))?
            .extract()
    };
    let spec = match family {
        "coherent" => ProbeSpec::Coherent { n_s: get("n_s")? },
        "squeezed" => ProbeSpec::Squeezed {
            alpha: get("alpha")?,
            mu: get("mu")?,
            nu: get("nu")?,
        },
        "tmsv" => ProbeSpec::Tmsv {
            n_s: get("n_s")?,
            j: params
                .and_then(|p| p.get_item("j").ok().flatten())
                .map(|j| j.extract())
                .transpose()?
                .unwrap_or(1),
        },
        "pcs" => ProbeSpec::Pcs { zeta: get("zeta")? },
        "ecs" => ProbeSpec::Ecs {
            alpha: get("alpha")?,
        },
        "optimal" => ProbeSpec::Optimal { n_s: get("n_s")? },
        "uniform" => ProbeSpec::Uniform,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown probe family {other:?}"
            )))
        }
    };
    Ok(PyGramRow {
        inner: spec.gram_row(m).map_err(to_py)?,
    })
}

#[pyfunction]
fn pcs_zeta_for_energy(n_s: f64) -> PyResult<f64> {
    probes::pcs_zeta_for_energy(n_s).map_err(to_py)
}

#[pyfunction]
fn ecs_alpha_for_energy(n_s: f64) -> PyResult<f64> {
    probes::ecs_alpha_for_energy(n_s).map_err(to_py)
}

#[pyfunction]
fn error_probability(lambdas: Vec<f64>) -> PyResult<f64> {
    Ok(gram::EigenvalueSpectrum::new(lambdas)
        .map_err(to_py)?
        .error_probability())
}

#[pyfunction]
fn binary_error_from_overlap(sigma: Complex64) -> PyResult<f64> {
    gram::binary_error_from_overlap(sigma).map_err(to_py)
}

/// Best squeezed probe at energy `n_s`, as a dict.
#[pyfunction]
fn optimize_squeeze<'py>(py: Python<'py>, n_s: f64, m: usize) -> PyResult<Bound<'py, PyDict>> {
    let opt = optimizer::optimize_squeeze(n_s, m).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("f", opt.f)?;
    d.set_item("sign", opt.sign.value() as i32)?;
    d.set_item("alpha", opt.params.alpha)?;
    d.set_item("mu", opt.params.mu)?;
    d.set_item("nu", opt.params.nu)?;
    d.set_item("p_error", opt.p_error)?;
    d.set_item("no_squeezing", opt.no_squeezing)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (n_s, f, sign, m))]
fn squeezed_error(n_s: f64, f: f64, sign: i32, m: usize) -> PyResult<f64> {
    let sign = match sign {
        1 => Sign::Plus,
        -1 => Sign::Minus,
        other => {
            return Err(PyValueError::new_err(format!(
                "sign must be 1 or -1, got {other}"
            )))
        }
    };
    optimizer::squeezed_error(n_s, f, sign, m).map_err(to_py)
}

#[allow(clippy::too_many_arguments)]
fn bpsk_config(
    n_s: f64,
    eta_s: f64,
    eta_i: f64,
    eta_d0: f64,
    eta_d1: f64,
    seed: u64,
    trials: u64,
) -> PyResult<BpskConfig> {
    let cfg = BpskConfig {
        n_s,
        eta_s,
        eta_i,
        eta_d0,
        eta_d1,
        seed,
        trials,
    };
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

/// (p_erasure, p_error_given_click) of the lossy binary receiver.
#[pyfunction]
#[pyo3(signature = (n_s, eta_s=1.0, eta_i=1.0, eta_d0=1.0, eta_d1=1.0))]
fn bpsk_predictions(
    n_s: f64,
    eta_s: f64,
    eta_i: f64,
    eta_d0: f64,
    eta_d1: f64,
) -> PyResult<(f64, Option<f64>)> {
    let p = bpsk::analytic_predictions(&bpsk_config(n_s, eta_s, eta_i, eta_d0, eta_d1, 0, 1)?);
    Ok((p.p_erasure, p.p_error_given_click))
}

/// Monte Carlo counts as {bit: (clicks_d0, clicks_d1, erasures)}.
#[pyfunction]
#[pyo3(signature = (n_s, trials, seed, eta_s=1.0, eta_i=1.0, eta_d0=1.0, eta_d1=1.0, bits=vec![0, 1]))]
#[allow(clippy::too_many_arguments)]
fn bpsk_monte_carlo<'py>(
    py: Python<'py>,
    n_s: f64,
    trials: u64,
    seed: u64,
    eta_s: f64,
    eta_i: f64,
    eta_d0: f64,
    eta_d1: f64,
    bits: Vec<u8>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = bpsk_config(n_s, eta_s, eta_i, eta_d0, eta_d1, seed, trials)?;
    let counts = py
        .detach(|| bpsk::run_monte_carlo(&cfg, &bits))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    for bit in [0u8, 1] {
        let c = counts.for_bit(bit);
        d.set_item(bit, (c.clicks_d0, c.clicks_d1, c.erasures))?;
    }
    Ok(d)
}

#[pymodule]
fn pyphasedisc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModMDistribution>()?;
    m.add_class::<PyGramRow>()?;
    m.add_class::<PyOptimalSolution>()?;
    m.add("ConvergenceError", m.py().get_type::<ConvergenceError>())?;
    m.add_function(wrap_pyfunction!(solve_optimal, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_error_curve, m)?)?;
    m.add_function(wrap_pyfunction!(probe_gram_row, m)?)?;
    m.add_function(wrap_pyfunction!(pcs_zeta_for_energy, m)?)?;
    m.add_function(wrap_pyfunction!(ecs_alpha_for_energy, m)?)?;
    m.add_function(wrap_pyfunction!(error_probability, m)?)?;
    m.add_function(wrap_pyfunction!(binary_error_from_overlap, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_squeeze, m)?)?;
    m.add_function(wrap_pyfunction!(squeezed_error, m)?)?;
    m.add_function(wrap_pyfunction!(bpsk_predictions, m)?)?;
    m.add_function(wrap_pyfunction!(bpsk_monte_carlo, m)?)?;
    Ok(())
}
