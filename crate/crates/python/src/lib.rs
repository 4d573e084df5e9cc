//! Python bindings: `import ndp`.
//!
//! Vectors cross the boundary as plain lists; queries use the same text
//! syntax as the command line (`"component 5 1"`, `"new_agent_mean"`, ...).

use std::path::PathBuf;

use ndp_core::datasets::{self, SCENARIO_NAMES};
use ndp_core::io::{self as nio, GamerBase};
use ndp_core::kde::{effective_count, scott_factor};
use ndp_core::posterior::{cocluster_matrix, law_of_with, probability_below, standard_error};
use ndp_core::rng::{stream, StreamPurpose};
use ndp_core::{
    enumerate_posterior, expectation, kde, run_batch, trim_heaviest, Bandwidth, EngineOptions, Functional, GamerParams,
    GridSpec, LawOptions, NdpError, PartitionPosterior, SimplexVector, SimulationBatch, WeightedSampleLaw,
};
use pyo3::exceptions::{PyKeyError, PyOSError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: NdpError) -> PyErr {
    match e {
        NdpError::Io(io) => PyOSError::new_err(io.to_string()),
        NdpError::Lookup(name) => PyKeyError::new_err(name),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for ndp_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn parse(query: &str) -> PyResult<Functional> {
    Functional::parse(query).py()
}

/// Model hyperparameters: concentration kappa, precision eps and base measure.
#[pyclass(name = "ModelConfig", module = "ndp", frozen)]
struct PyModelConfig {
    inner: ndp_core::ModelConfig,
}

#[pymethods]
impl PyModelConfig {
    #[new]
    fn new(kappa: f64, eps: f64, base: Vec<f64>) -> PyResult<Self> {
        let base = SimplexVector::new(base).py()?;
        Ok(Self { inner: ndp_core::ModelConfig::new(kappa, eps, base).py()? })
    }

    /// Base measure from the discretized gamer distribution on scores 0..L-1.
    #[staticmethod]
    #[pyo3(signature = (kappa, eps, r, c, alpha, num_states))]
    fn gamer(kappa: f64, eps: f64, r: f64, c: f64, alpha: f64, num_states: usize) -> PyResult<Self> {
        let file = nio::ConfigFile { kappa, eps, base: None, gamer: Some(GamerBase { r, c, alpha, num_states }) };
        Ok(Self { inner: file.to_config().py()? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: nio::load_config(&path).py()? })
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa()
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.inner.eps()
    }

    #[getter]
    fn base(&self) -> Vec<f64> {
        self.inner.base().as_slice().to_vec()
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    fn __repr__(&self) -> String {
        format!("ModelConfig(kappa={}, eps={}, L={})", self.inner.kappa(), self.inner.eps(), self.inner.num_states())
    }
}

/// Validated observations: one count vector per row.
#[pyclass(name = "Data", module = "ndp", frozen)]
struct PyData {
    inner: ndp_core::ObservationArray,
    row_ids: Vec<String>,
}

fn default_ids(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

#[pymethods]
impl PyData {
    /// Rows of category labels in 0..num_states.
    #[staticmethod]
    fn from_rows(rows: Vec<Vec<usize>>, num_states: usize) -> PyResult<Self> {
        let inner = ndp_core::ObservationArray::validate_and_count(rows, num_states).py()?;
        let row_ids = default_ids(inner.num_rows());
        Ok(Self { inner, row_ids })
    }

    /// Rows given directly as count vectors of equal length.
    #[staticmethod]
    fn from_counts(counts: Vec<Vec<u64>>) -> PyResult<Self> {
        let num_states = counts.first().map_or(0, Vec::len);
        let counts = counts.into_iter().map(ndp_core::CountVector::new).collect();
        let inner = ndp_core::ObservationArray::from_counts(counts, num_states).py()?;
        let row_ids = default_ids(inner.num_rows());
        Ok(Self { inner, row_ids })
    }

    /// Labels CSV, counts CSV or rows JSON, chosen by extension and header.
    #[staticmethod]
    #[pyo3(signature = (path, num_states=None))]
    fn load(path: PathBuf, num_states: Option<usize>) -> PyResult<Self> {
        let loaded = nio::load_data(&path, num_states).py()?;
        Ok(Self { inner: loaded.data, row_ids: loaded.row_ids })
    }

    #[getter]
    fn num_rows(&self) -> usize {
        self.inner.num_rows()
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    #[getter]
    fn row_ids(&self) -> Vec<String> {
        self.row_ids.clone()
    }

    fn counts(&self) -> Vec<Vec<u64>> {
        self.inner.counts().iter().map(|c| c.as_slice().to_vec()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.num_rows()
    }

    fn __repr__(&self) -> String {
        format!("Data(rows={}, L={})", self.inner.num_rows(), self.inner.num_states())
    }
}

/// A built-in example with its data, model and default run settings.
#[pyclass(name = "Scenario", module = "ndp", frozen)]
struct PyScenario {
    #[pyo3(get)]
    name: String,
    #[pyo3(get)]
    data: Py<PyData>,
    #[pyo3(get)]
    config: Py<PyModelConfig>,
    #[pyo3(get)]
    num_sims: usize,
    #[pyo3(get)]
    log_scale_factor: f64,
    #[pyo3(get)]
    trim: usize,
    #[pyo3(get)]
    reported_ess: f64,
    /// (query, reference value) pairs.
    #[pyo3(get)]
    targets: Vec<(String, f64)>,
}

#[pyfunction]
fn load_scenario(py: Python<'_>, name: &str) -> PyResult<PyScenario> {
    let s = datasets::load_scenario(name).py()?;
    Ok(PyScenario {
        name: s.name.to_owned(),
        data: Py::new(py, PyData { inner: s.data, row_ids: s.row_ids })?,
        config: Py::new(py, PyModelConfig { inner: s.config })?,
        num_sims: s.num_sims,
        log_scale_factor: s.log_scale_factor,
        trim: s.trim,
        reported_ess: s.reported_ess,
        targets: s.targets.into_iter().map(|t| (t.query, t.value)).collect(),
    })
}

#[pyfunction]
fn scenario_names() -> Vec<&'static str> {
    SCENARIO_NAMES.to_vec()
}

/// Weighted law of a functional: atoms, weights and an optional prior part.
#[pyclass(name = "Law", module = "ndp", frozen)]
struct PyLaw {
    inner: WeightedSampleLaw,
}

#[pymethods]
impl PyLaw {
    /// All (atom, weight) pairs, prior atoms sharing the prior mass equally.
    fn weighted_atoms(&self) -> Vec<(f64, f64)> {
        self.inner.weighted_atoms()
    }

    fn mean(&self) -> f64 {
        expectation(&self.inner)
    }

    fn probability_below(&self, threshold: f64) -> f64 {
        probability_below(&self.inner, threshold)
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn effective_count(&self) -> f64 {
        effective_count(&self.inner)
    }

    fn scott_factor(&self) -> PyResult<f64> {
        scott_factor(&self.inner).py()
    }

    /// Weighted Gaussian KDE; returns (grid, density, bandwidth).
    #[pyo3(signature = (bandwidth=None, points=512, clip=None))]
    fn kde(
        &self,
        bandwidth: Option<f64>,
        points: usize,
        clip: Option<(f64, f64)>,
    ) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
        let bw = bandwidth.map_or(Bandwidth::Auto, Bandwidth::Fixed);
        let curve = kde(&self.inner, bw, &GridSpec { points, range: None, clip }).py()?;
        Ok((curve.grid, curve.values, curve.bandwidth))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        let file = std::fs::File::create(&path)?;
        nio::write_weighted_sample(file, &self.inner).py()
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let file = std::fs::File::open(&path)?;
        Ok(Self { inner: nio::read_weighted_sample(file).py()? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// K importance-weighted simulations of the row partition and distributions.
#[pyclass(name = "Batch", module = "ndp", frozen)]
struct PyBatch {
    inner: SimulationBatch,
}

#[pymethods]
impl PyBatch {
    #[getter]
    fn num_sims(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn num_rows(&self) -> usize {
        self.inner.num_rows()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    #[getter]
    fn trimmed(&self) -> usize {
        self.inner.trimmed()
    }

    /// (ESS', ESS'').
    fn ess(&self) -> (f64, f64) {
        let e = self.inner.ess();
        (e.prime, e.double_prime)
    }

    fn normalized_weights(&self) -> Vec<f64> {
        self.inner.normalized_weights().to_vec()
    }

    /// log W_k including M log c + log M!.
    fn scaled_log_weights(&self) -> Vec<f64> {
        self.inner.scaled_log_weights()
    }

    /// Row-to-cluster labels of simulation k.
    fn cluster_map(&self, k: usize) -> PyResult<Vec<usize>> {
        let sim = self.inner.sims().get(k).ok_or_else(|| PyValueError::new_err(format!("no simulation {k}")))?;
        Ok(sim.cluster_map())
    }

    /// Distribution of row m (0-based) in simulation k.
    fn theta(&self, k: usize, m: usize) -> PyResult<Vec<f64>> {
        let sim = self.inner.sims().get(k).ok_or_else(|| PyValueError::new_err(format!("no simulation {k}")))?;
        if m >= sim.num_rows() {
            return Err(PyValueError::new_err(format!("no row {m}")));
        }
        Ok(sim.theta(m).to_vec())
    }

    /// Drops the n heaviest simulations and renormalizes.
    fn trim(&self, n: usize) -> PyResult<PyBatch> {
        Ok(PyBatch { inner: trim_heaviest(&self.inner, n).py()? })
    }

    #[pyo3(signature = (query, prior_samples=ndp_core::posterior::DEFAULT_PRIOR_SAMPLES))]
    fn law(&self, py: Python<'_>, query: &str, prior_samples: usize) -> PyResult<PyLaw> {
        let f = parse(query)?;
        let opts = LawOptions { prior_samples, prior_seed: None };
        let inner = py.detach(|| law_of_with(&self.inner, &f, &opts)).py()?;
        Ok(PyLaw { inner })
    }

    /// Posterior expectation of a query.
    #[pyo3(signature = (query, prior_samples=ndp_core::posterior::DEFAULT_PRIOR_SAMPLES))]
    fn expect(&self, py: Python<'_>, query: &str, prior_samples: usize) -> PyResult<f64> {
        Ok(self.law(py, query, prior_samples)?.mean())
    }

    #[pyo3(signature = (query, prior_samples=ndp_core::posterior::DEFAULT_PRIOR_SAMPLES))]
    fn standard_error(&self, query: &str, prior_samples: usize) -> PyResult<f64> {
        let f = parse(query)?;
        standard_error(&self.inner, &f, &LawOptions { prior_samples, prior_seed: None }).py()
    }

    fn cocluster_matrix(&self) -> Vec<Vec<f64>> {
        cocluster_matrix(&self.inner)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        nio::save_batch(&path, &self.inner).py()
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: nio::load_batch(&path).py()? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Sequential imputation with K simulations.
#[pyfunction]
#[pyo3(signature = (data, config, num_sims, seed=1, log_scale_factor=0.0, threads=None))]
fn run(
    py: Python<'_>,
    data: &PyData,
    config: &PyModelConfig,
    num_sims: usize,
    seed: u64,
    log_scale_factor: f64,
    threads: Option<usize>,
) -> PyResult<PyBatch> {
    let mut options = EngineOptions::new(num_sims, seed).with_log_scale_factor(log_scale_factor);
    if let Some(t) = threads {
        options = options.with_threads(t);
    }
    let inner = py.detach(|| run_batch(&data.inner, &config.inner, &options)).py()?;
    Ok(PyBatch { inner })
}

/// Exact posterior over all partitions of at most 12 rows.
#[pyclass(name = "Oracle", module = "ndp", frozen)]
struct PyOracle {
    inner: PartitionPosterior,
}

#[pymethods]
impl PyOracle {
    #[new]
    fn new(py: Python<'_>, data: &PyData, config: &PyModelConfig) -> PyResult<Self> {
        let inner = py.detach(|| enumerate_posterior(&data.inner, &config.inner)).py()?;
        Ok(Self { inner })
    }

    #[getter]
    fn num_partitions(&self) -> usize {
        self.inner.num_partitions()
    }

    #[getter]
    fn log_evidence(&self) -> f64 {
        self.inner.log_evidence()
    }

    fn expect(&self, query: &str) -> PyResult<f64> {
        self.inner.expectation(&parse(query)?).py()
    }

    /// The n most probable partitions as (blocks of 1-based rows, probability).
    #[pyo3(signature = (n=10))]
    fn top(&self, n: usize) -> Vec<(Vec<Vec<usize>>, f64)> {
        self.inner.top(n).into_iter().map(|p| (p.blocks, p.probability)).collect()
    }
}

/// Pareto-mixed gamma distribution of game scores.
#[pyclass(name = "Gamer", module = "ndp", frozen)]
struct PyGamer {
    inner: GamerParams,
}

#[pymethods]
impl PyGamer {
    #[new]
    #[pyo3(signature = (r=7.0/3.0, c=28.0, alpha=3.0))]
    fn new(r: f64, c: f64, alpha: f64) -> PyResult<Self> {
        Ok(Self { inner: GamerParams::new(r, c, alpha).py()? })
    }

    fn pdf(&self, x: f64) -> PyResult<f64> {
        self.inner.pdf(x).py()
    }

    fn cdf(&self, x: f64) -> PyResult<f64> {
        self.inner.cdf(x).py()
    }

    #[pyo3(signature = (n, seed=1))]
    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed, StreamPurpose::Auxiliary, 0);
        (0..n).map(|_| self.inner.sample(&mut rng)).collect()
    }

    fn discretize(&self, num_states: usize) -> PyResult<Vec<f64>> {
        Ok(self.inner.discretize(num_states).py()?.as_slice().to_vec())
    }
}

#[pymodule]
fn ndp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelConfig>()?;
    m.add_class::<PyData>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyBatch>()?;
    m.add_class::<PyLaw>()?;
    m.add_class::<PyOracle>()?;
    m.add_class::<PyGamer>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(load_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_names, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
