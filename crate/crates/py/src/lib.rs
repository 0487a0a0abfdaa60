//! Python bindings for the classification workbench: both engines, the
//! spike-count encoding helpers, and the paired t-test.

use std::path::PathBuf;
use std::str::FromStr;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use colanet_core::data::{schedule_spikes, EncodedExample};
use colanet_core::digital::{CountThreshold, DigitalClassifier, InputVector, TrainExample};
use colanet_core::model_io;
use colanet_core::plasticity::PlasticityParams;
use colanet_core::snn::{Network, SimSchedule};
use colanet_core::stats;

fn to_py_err(e: colanet_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Shared hyperparameter bundle for both engines.
#[pyclass(name = "PlasticityParams")]
#[derive(Clone)]
struct PyPlasticityParams {
    inner: PlasticityParams,
}

#[pymethods]
impl PyPlasticityParams {
    #[new]
    #[pyo3(signature = (w_min=-1.0, w_max=1.0, d=0.1, n_s=0, alpha=0.1,
                        d_h=None, d_d=None, t_h=10, t_p=10, tau_v=10.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        w_min: f64,
        w_max: f64,
        d: f64,
        n_s: u32,
        alpha: f64,
        d_h: Option<f64>,
        d_d: Option<f64>,
        t_h: u32,
        t_p: u32,
        tau_v: f64,
    ) -> PyResult<Self> {
        let inner = PlasticityParams {
            w_min,
            w_max,
            d,
            d_h: d_h.unwrap_or(d),
            d_d: d_d.unwrap_or(d),
            n_s,
            alpha,
            t_h,
            t_p,
            tau_v,
        };
        inner.validate().map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn w_min(&self) -> f64 {
        self.inner.w_min
    }

    #[getter]
    fn w_max(&self) -> f64 {
        self.inner.w_max
    }

    #[getter]
    fn d(&self) -> f64 {
        self.inner.d
    }

    #[getter]
    fn n_s(&self) -> u32 {
        self.inner.n_s
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    fn __repr__(&self) -> String {
        format!(
            "PlasticityParams(w_min={}, w_max={}, d={}, n_s={}, alpha={}, d_h={}, d_d={}, \
             t_h={}, t_p={}, tau_v={})",
            self.inner.w_min,
            self.inner.w_max,
            self.inner.d,
            self.inner.n_s,
            self.inner.alpha,
            self.inner.d_h,
            self.inner.d_d,
            self.inner.t_h,
            self.inner.t_p,
            self.inner.tau_v
        )
    }
}

fn input_vector(counts: Vec<u16>) -> PyResult<InputVector> {
    InputVector::new(counts).map_err(to_py_err)
}

/// The continuous online classifier.
#[pyclass(name = "DigitalClassifier")]
struct PyDigitalClassifier {
    inner: DigitalClassifier,
}

#[pymethods]
impl PyDigitalClassifier {
    #[new]
    #[pyo3(signature = (num_inputs, params, count_threshold="literal"))]
    fn new(
        num_inputs: usize,
        params: PyPlasticityParams,
        count_threshold: &str,
    ) -> PyResult<Self> {
        let mode = CountThreshold::from_str(count_threshold).map_err(to_py_err)?;
        Ok(Self {
            inner: DigitalClassifier::new(num_inputs, params.inner, mode).map_err(to_py_err)?,
        })
    }

    /// Number of microcolumn rows grown so far.
    #[getter]
    fn num_microcolumns(&self) -> usize {
        self.inner.num_microcolumns()
    }

    /// Normalized potentials for one count vector.
    fn potentials(&self, counts: Vec<u16>) -> PyResult<Vec<f64>> {
        self.inner.potentials(&input_vector(counts)?).map_err(to_py_err)
    }

    fn predict(&self, counts: Vec<u16>) -> PyResult<bool> {
        self.inner.predict(&input_vector(counts)?).map_err(to_py_err)
    }

    /// One online update; returns the branch taken as a string.
    fn train_step(&mut self, counts: Vec<u16>, is_target: bool) -> PyResult<String> {
        let outcome = self
            .inner
            .train_step(&TrainExample {
                input: input_vector(counts)?,
                is_target,
            })
            .map_err(to_py_err)?;
        Ok(format!("{outcome:?}"))
    }

    /// Sequential pass over `(counts, is_target)` pairs, `epochs` times.
    #[pyo3(signature = (examples, epochs=1))]
    fn fit(&mut self, examples: Vec<(Vec<u16>, bool)>, epochs: u32) -> PyResult<()> {
        let data: Vec<TrainExample> = examples
            .into_iter()
            .map(|(counts, is_target)| {
                Ok(TrainExample {
                    input: input_vector(counts)?,
                    is_target,
                })
            })
            .collect::<PyResult<_>>()?;
        self.inner.fit(&data, epochs).map_err(to_py_err)
    }

    fn weights(&self, row: usize) -> PyResult<Vec<f64>> {
        if row >= self.inner.num_microcolumns() {
            return Err(PyValueError::new_err(format!("no row {row}")));
        }
        Ok(self.inner.weights(row).to_vec())
    }

    fn threshold(&self, row: usize) -> PyResult<f64> {
        if row >= self.inner.num_microcolumns() {
            return Err(PyValueError::new_err(format!("no row {row}")));
        }
        Ok(self.inner.threshold(row))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        model_io::save_digital(&self.inner, &path).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: model_io::load_digital(&path).map_err(to_py_err)?,
        })
    }
}

/// The time-stepped spiking column network.
#[pyclass(name = "Network")]
struct PyNetwork {
    inner: Network,
    presentation_ticks: u32,
}

impl PyNetwork {
    fn encode(&self, counts: Vec<u16>) -> PyResult<EncodedExample> {
        let counts = input_vector(counts)?;
        let schedule =
            schedule_spikes(&counts, self.presentation_ticks).map_err(to_py_err)?;
        Ok(EncodedExample { counts, schedule })
    }
}

#[pymethods]
impl PyNetwork {
    #[new]
    #[pyo3(signature = (num_inputs, num_microcolumns, params, seed=0,
                        presentation_ticks=10, silence_ticks=10))]
    fn new(
        num_inputs: usize,
        num_microcolumns: usize,
        params: PyPlasticityParams,
        seed: u64,
        presentation_ticks: u32,
        silence_ticks: u32,
    ) -> PyResult<Self> {
        let schedule = SimSchedule {
            presentation_ticks,
            silence_ticks,
        };
        Ok(Self {
            inner: Network::new(num_inputs, num_microcolumns, params.inner, schedule, seed)
                .map_err(to_py_err)?,
            presentation_ticks,
        })
    }

    #[getter]
    fn num_microcolumns(&self) -> usize {
        self.inner.num_microcolumns()
    }

    /// Runs one example; the label node is active when `is_target`.
    /// Returns whether the OUT neuron fired during the presentation.
    fn train_example(&mut self, counts: Vec<u16>, is_target: bool) -> PyResult<bool> {
        let ex = self.encode(counts)?;
        self.inner.simulate_example(&ex, is_target, true).map_err(to_py_err)
    }

    /// Sequential training pass over `(counts, is_target)` pairs.
    fn train(&mut self, examples: Vec<(Vec<u16>, bool)>) -> PyResult<()> {
        for (counts, is_target) in examples {
            self.train_example(counts, is_target)?;
        }
        Ok(())
    }

    /// Inference with the label node silent and plasticity off.
    fn classify(&mut self, counts: Vec<u16>) -> PyResult<bool> {
        let ex = self.encode(counts)?;
        self.inner.classify(&ex).map_err(to_py_err)
    }

    fn weights(&self, microcolumn: usize) -> PyResult<Vec<f64>> {
        if microcolumn >= self.inner.num_microcolumns() {
            return Err(PyValueError::new_err(format!("no microcolumn {microcolumn}")));
        }
        Ok(self.inner.weights(microcolumn).to_vec())
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        model_io::save_network(&self.inner, &path).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = model_io::load_network(&path).map_err(to_py_err)?;
        let presentation_ticks = inner.schedule().presentation_ticks;
        Ok(Self {
            inner,
            presentation_ticks,
        })
    }
}

/// Deterministic even-spacing spike schedule for a count vector.
/// Returns one list of input indices per presentation tick.
#[pyfunction]
#[pyo3(signature = (counts, presentation_ticks=10))]
fn spike_schedule(counts: Vec<u16>, presentation_ticks: u32) -> PyResult<Vec<Vec<u32>>> {
    let counts = input_vector(counts)?;
    schedule_spikes(&counts, presentation_ticks).map_err(to_py_err)
}

/// Paired t-test of zero mean difference. Returns
/// `(mean, sd, t, p, degrees_of_freedom)`.
#[pyfunction]
fn paired_t_test(diffs: Vec<f64>) -> PyResult<(f64, f64, f64, f64, u32)> {
    let r = stats::paired_t_test(&diffs).map_err(to_py_err)?;
    Ok((r.mean, r.sd, r.t_statistic, r.p_value, r.degrees_of_freedom))
}

#[pymodule]
fn colanet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPlasticityParams>()?;
    m.add_class::<PyDigitalClassifier>()?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(spike_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(paired_t_test, m)?)?;
    Ok(())
}
