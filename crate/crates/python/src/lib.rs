//! Python bindings for the `cklms` crate.
//!
//! Complex numbers cross the boundary as Python `complex`; vectors as lists.

use std::cell::RefCell;
use std::collections::HashMap;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use cklms::channel::{self, Algorithm, ExperimentConfig};
use cklms::{kernels, wirtinger, CVec, Complex64, Error, Novelty, RealKernel, ScalarField};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn cvec(z: Vec<Complex64>) -> PyResult<CVec> {
    CVec::new(z).map_err(to_py)
}

fn novelty(thresholds: Option<(f64, f64)>) -> PyResult<Option<Novelty>> {
    thresholds
        .map(|(d1, d2)| Novelty::new(d1, d2).map_err(to_py))
        .transpose()
}

fn parse_algorithm(name: &str) -> PyResult<Algorithm> {
    Algorithm::ALL
        .into_iter()
        .find(|a| a.name() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown algorithm '{name}'")))
}

/// Real kernel applied to complex inputs through their real embedding.
#[pyclass(name = "Kernel", frozen)]
struct PyKernel {
    inner: RealKernel,
}

#[pymethods]
impl PyKernel {
    #[staticmethod]
    fn gaussian(sigma: f64) -> PyResult<Self> {
        Ok(Self {
            inner: RealKernel::gaussian(sigma).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn polynomial(degree: u32) -> PyResult<Self> {
        Ok(Self {
            inner: RealKernel::polynomial(degree).map_err(to_py)?,
        })
    }

    /// κ(z1, z2)
    fn eval(&self, z1: Vec<Complex64>, z2: Vec<Complex64>) -> PyResult<f64> {
        kernels::kernel_eval(&self.inner, &cvec(z1)?, &cvec(z2)?).map_err(to_py)
    }

    /// Inner product of the complexified feature vectors.
    fn complexified_inner(&self, z1: Vec<Complex64>, z2: Vec<Complex64>) -> PyResult<Complex64> {
        kernels::complexified_inner(&self.inner, &cvec(z1)?, &cvec(z2)?).map_err(to_py)
    }

    fn feature_distance_sq(&self, z1: Vec<Complex64>, z2: Vec<Complex64>) -> PyResult<f64> {
        kernels::feature_distance_sq(&self.inner, &cvec(z1)?, &cvec(z2)?).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        match self.inner {
            RealKernel::Gaussian { sigma } => format!("Kernel.gaussian({sigma})"),
            RealKernel::Polynomial { degree } => format!("Kernel.polynomial({degree})"),
        }
    }
}

/// Complex kernel LMS filter, optionally normalized and sparsified.
#[pyclass(name = "CklmsFilter")]
struct PyCklms {
    inner: cklms::CklmsFilter,
}

#[pymethods]
impl PyCklms {
    #[new]
    #[pyo3(signature = (kernel, mu, dim, normalized=true, novelty=None))]
    fn new(
        kernel: &PyKernel,
        mu: f64,
        dim: usize,
        normalized: bool,
        novelty: Option<(f64, f64)>,
    ) -> PyResult<Self> {
        let inner = cklms::CklmsFilter::new(kernel.inner, mu, dim)
            .map_err(to_py)?
            .normalized(normalized)
            .with_novelty(self::novelty(novelty)?);
        Ok(Self { inner })
    }

    fn predict(&self, z: Vec<Complex64>) -> PyResult<Complex64> {
        self.inner.predict(&cvec(z)?).map_err(to_py)
    }

    /// Returns `(prediction, error, admitted)`.
    fn step(&mut self, z: Vec<Complex64>, d: Complex64) -> PyResult<(Complex64, Complex64, bool)> {
        let out = self.inner.step(&cvec(z)?, d).map_err(to_py)?;
        Ok((out.prediction, out.error, out.admitted))
    }

    fn admit(&self, z: Vec<Complex64>, e: Complex64) -> PyResult<bool> {
        self.inner.admit(&cvec(z)?, e).map_err(to_py)
    }

    #[getter]
    fn dictionary_size(&self) -> usize {
        self.inner.dictionary_size()
    }

    #[getter]
    fn samples_seen(&self) -> usize {
        self.inner.samples_seen()
    }

    fn centers(&self) -> Vec<Vec<Complex64>> {
        self.inner
            .entries()
            .iter()
            .map(|e| e.center().as_slice().to_vec())
            .collect()
    }

    fn coefficients(&self) -> Vec<Complex64> {
        self.inner.entries().iter().map(|e| e.coeff()).collect()
    }

    fn dictionary_text(&self) -> String {
        self.inner.dictionary_to_text()
    }

    fn __repr__(&self) -> String {
        format!(
            "CklmsFilter(mu={}, dim={}, dictionary_size={})",
            self.inner.mu(),
            self.inner.dim(),
            self.inner.dictionary_size()
        )
    }
}

/// NCLMS or widely-linear NCLMS filter.
#[pyclass(name = "LinearFilter")]
struct PyLinear {
    inner: cklms::LinearCFilter,
}

#[pymethods]
impl PyLinear {
    #[staticmethod]
    fn nclms(length: usize, mu: f64) -> PyResult<Self> {
        Ok(Self {
            inner: cklms::LinearCFilter::nclms(length, mu).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn wl_nclms(length: usize, mu: f64) -> PyResult<Self> {
        Ok(Self {
            inner: cklms::LinearCFilter::wl_nclms(length, mu).map_err(to_py)?,
        })
    }

    fn predict(&self, x: Vec<Complex64>) -> PyResult<Complex64> {
        self.inner.predict(&cvec(x)?).map_err(to_py)
    }

    /// Returns `(prediction, error)`.
    fn update(&mut self, x: Vec<Complex64>, d: Complex64) -> PyResult<(Complex64, Complex64)> {
        self.inner.update(&cvec(x)?, d).map_err(to_py)
    }

    #[getter]
    fn weights(&self) -> Vec<Complex64> {
        self.inner.weights().to_vec()
    }

    #[getter]
    fn conjugate_weights(&self) -> Option<Vec<Complex64>> {
        self.inner.conjugate_weights().map(<[_]>::to_vec)
    }

    #[getter]
    fn is_widely_linear(&self) -> bool {
        self.inner.is_widely_linear()
    }
}

#[pyfunction]
fn embed(z: Vec<Complex64>) -> PyResult<Vec<f64>> {
    Ok(kernels::embed(&cvec(z)?))
}

/// Central-difference Wirtinger derivatives of `f` at `w`.
///
/// `f` takes a list of complex numbers and returns a number.
/// Returns `(d_z, d_zstar)`.
#[pyfunction]
#[pyo3(signature = (f, w, h=1e-5))]
fn numeric_wirtinger(
    f: &Bound<'_, PyAny>,
    w: Vec<Complex64>,
    h: f64,
) -> PyResult<(Vec<Complex64>, Vec<Complex64>)> {
    let failure: RefCell<Option<PyErr>> = RefCell::new(None);
    let field = ScalarField::new(w.len(), |v: &[Complex64]| {
        match f.call1((v.to_vec(),)).and_then(|r| r.extract::<Complex64>()) {
            Ok(value) => value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(f64::NAN, f64::NAN)
            }
        }
    });
    let result = wirtinger::numeric_wirtinger(&field, &w, h);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let pair = result.map_err(to_py)?;
    Ok((pair.d_z, pair.d_zstar))
}

/// Runs the Wirtinger calculus property suite.
///
/// Returns a list of `(property, description, max_error, passed)`.
#[pyfunction]
#[pyo3(signature = (seed=0))]
fn property_suite(seed: u64) -> PyResult<Vec<(u8, String, f64, bool)>> {
    let report = wirtinger::property_suite(seed).map_err(to_py)?;
    Ok(report
        .outcomes
        .into_iter()
        .map(|o| (o.property, o.description.to_string(), o.max_error, o.passed))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (n, rho=std::f64::consts::FRAC_1_SQRT_2, amplitude=0.7, seed=0))]
fn generate_source(n: usize, rho: f64, amplitude: f64, seed: u64) -> PyResult<Vec<Complex64>> {
    channel::generate_source(n, rho, amplitude, seed).map_err(to_py)
}

/// Passes `s` through the nonlinear channel and adds noise at `snr_db`.
#[pyfunction]
#[pyo3(signature = (s, snr_db=15.0, seed=0))]
fn run_channel(s: Vec<Complex64>, snr_db: f64, seed: u64) -> PyResult<Vec<Complex64>> {
    let cfg = cklms::ChannelConfig {
        snr_db,
        ..Default::default()
    };
    channel::run_channel(&cfg, &s, seed).map_err(to_py)
}

/// Returns `(inputs, targets)` for the equalizer.
#[pyfunction]
#[pyo3(signature = (r, s, filter_length=5, delay=2))]
fn build_dataset(
    r: Vec<Complex64>,
    s: Vec<Complex64>,
    filter_length: usize,
    delay: usize,
) -> PyResult<(Vec<Vec<Complex64>>, Vec<Complex64>)> {
    let ds = channel::build_dataset(&r, &s, filter_length, delay).map_err(to_py)?;
    let inputs = ds.inputs.into_iter().map(CVec::into_inner).collect();
    Ok((inputs, ds.targets))
}

/// Monte-Carlo equalization experiment.
///
/// Returns `{algorithm: {"mse": [...], "mse_db": [...], "dict_size": [...]}}`.
#[pyfunction]
#[pyo3(signature = (
    algorithms=vec!["cklms".to_string(), "nclms".to_string(), "wl-nclms".to_string()],
    samples=5000,
    runs=20,
    rho=std::f64::consts::FRAC_1_SQRT_2,
    snr_db=15.0,
    seed=0,
))]
fn run_experiment(
    py: Python<'_>,
    algorithms: Vec<String>,
    samples: usize,
    runs: usize,
    rho: f64,
    snr_db: f64,
    seed: u64,
) -> PyResult<HashMap<String, HashMap<String, Vec<f64>>>> {
    let algs = algorithms
        .iter()
        .map(|a| parse_algorithm(a))
        .collect::<PyResult<Vec<_>>>()?;
    let mut cfg = ExperimentConfig {
        samples,
        runs,
        seed,
        ..Default::default()
    };
    cfg.channel.rho = rho;
    cfg.channel.snr_db = snr_db;
    let curves = py
        .detach(|| channel::run_experiment(&algs, &cfg))
        .map_err(to_py)?;
    Ok(curves
        .into_iter()
        .map(|c| {
            let fields = HashMap::from([
                ("mse".to_string(), c.mse),
                ("mse_db".to_string(), c.mse_db),
                ("dict_size".to_string(), c.dict_size),
            ]);
            (c.algorithm.name().to_string(), fields)
        })
        .collect())
}

#[pymodule]
#[pyo3(name = "cklms")]
fn cklms_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyCklms>()?;
    m.add_class::<PyLinear>()?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(numeric_wirtinger, m)?)?;
    m.add_function(wrap_pyfunction!(property_suite, m)?)?;
    m.add_function(wrap_pyfunction!(generate_source, m)?)?;
    m.add_function(wrap_pyfunction!(run_channel, m)?)?;
    m.add_function(wrap_pyfunction!(build_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
