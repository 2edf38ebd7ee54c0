//! Python bindings: system parameters, closed-form analytics, one-round
//! aggregation simulators, spread-spectrum and beamforming helpers, and the
//! experiment commands.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use airfeel::analytics::{self, ScenarioParams};
use airfeel::experiment::{self, Command, ExperimentConfig, Format};
use airfeel::extensions;
use airfeel::network;
use airfeel::phy::{self, BaaOptions, DigitalOptions, Fading, Receiver};
use airfeel::rng;

fn err(e: airfeel::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Cell and radio parameters; powers in watts.
#[pyclass(name = "SystemParams", module = "airfeel", from_py_object)]
#[derive(Clone, Copy)]
pub struct PySystemParams {
    inner: analytics::SystemParams,
}

#[pymethods]
impl PySystemParams {
    #[new]
    #[pyo3(signature = (p0=None, m=None, b=None, alpha=None, r_cell=None, g_th=None, n0=None, q_bits=None, ber=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        p0: Option<f64>,
        m: Option<usize>,
        b: Option<f64>,
        alpha: Option<f64>,
        r_cell: Option<f64>,
        g_th: Option<f64>,
        n0: Option<f64>,
        q_bits: Option<u32>,
        ber: Option<f64>,
    ) -> PyResult<Self> {
        let d = analytics::SystemParams::reference();
        let inner = analytics::SystemParams {
            p0: p0.unwrap_or(d.p0),
            m: m.unwrap_or(d.m),
            b: b.unwrap_or(d.b),
            alpha: alpha.unwrap_or(d.alpha),
            r_cell: r_cell.unwrap_or(d.r_cell),
            g_th: g_th.unwrap_or(d.g_th),
            n0: n0.unwrap_or(d.n0),
            q_bits: q_bits.unwrap_or(d.q_bits),
            ber: ber.unwrap_or(d.ber),
        };
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn p0(&self) -> f64 {
        self.inner.p0
    }
    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }
    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }
    #[getter]
    fn r_cell(&self) -> f64 {
        self.inner.r_cell
    }
    #[getter]
    fn g_th(&self) -> f64 {
        self.inner.g_th
    }
    #[getter]
    fn n0(&self) -> f64 {
        self.inner.n0
    }
    #[getter]
    fn q_bits(&self) -> u32 {
        self.inner.q_bits
    }
    #[getter]
    fn ber(&self) -> f64 {
        self.inner.ber
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "SystemParams(p0={}, m={}, b={}, alpha={}, r_cell={}, g_th={}, n0={:e}, q_bits={}, ber={})",
            p.p0, p.m, p.b, p.alpha, p.r_cell, p.g_th, p.n0, p.q_bits, p.ber
        )
    }
}

fn params_or_default(params: Option<PySystemParams>) -> analytics::SystemParams {
    params.map_or_else(analytics::SystemParams::reference, |p| p.inner)
}

/// Exponential integral E1(x) for x > 0.
#[pyfunction]
fn exp_integral(x: f64) -> PyResult<f64> {
    analytics::exp_integral(x).map_err(err)
}

/// Expected fraction of truncated parameters, 1 - exp(-g_th).
#[pyfunction]
fn truncation_ratio(g_th: f64) -> PyResult<f64> {
    analytics::truncation_ratio(g_th).map_err(err)
}

/// Aligned receive SNR (linear) when the furthest scheduled device sits at `r_max`.
#[pyfunction]
#[pyo3(signature = (r_max, params=None))]
fn receive_snr(r_max: f64, params: Option<PySystemParams>) -> PyResult<f64> {
    analytics::receive_snr(&params_or_default(params), r_max).map_err(err)
}

/// PMF of the number of interior devices, indices 0..=K.
#[pyfunction]
fn k_in_distribution(k_devices: usize, r_in: f64, r_cell: f64) -> PyResult<Vec<f64>> {
    analytics::k_in_distribution(k_devices, r_in, r_cell).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (k_devices, params=None))]
fn expected_snr_all_inclusive(k_devices: usize, params: Option<PySystemParams>) -> PyResult<f64> {
    analytics::expected_snr_all_inclusive(&params_or_default(params), k_devices).map_err(err)
}

/// Expected SNR and its c(R_in) factor under cell-interior scheduling.
#[pyfunction]
#[pyo3(signature = (k_devices, r_in, params=None))]
fn expected_snr_cell_interior<'py>(
    py: Python<'py>,
    k_devices: usize,
    r_in: f64,
    params: Option<PySystemParams>,
) -> PyResult<Bound<'py, PyDict>> {
    let scen = ScenarioParams { k_devices, r_in, n_cr: 1, q_dim: 1 };
    let s = analytics::expected_snr_cell_interior(&params_or_default(params), &scen).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("snr", s.snr)?;
    d.set_item("c_factor", s.c_factor)?;
    d.set_item("within_bound", s.within_bound)?;
    Ok(d)
}

/// Analog and digital round latencies (s) and their ratio.
#[pyfunction]
#[pyo3(signature = (k_devices, q_dim, r_max=None, params=None))]
fn latency_report<'py>(
    py: Python<'py>,
    k_devices: usize,
    q_dim: usize,
    r_max: Option<f64>,
    params: Option<PySystemParams>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = params_or_default(params);
    let scen = ScenarioParams { k_devices, r_in: p.r_cell, n_cr: 1, q_dim };
    let rep = analytics::latency_reduction_ratio(&p, &scen, r_max.unwrap_or(p.r_cell)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("t_analog", rep.t_analog)?;
    d.set_item("t_digital", rep.t_digital)?;
    d.set_item("ratio", rep.ratio)?;
    Ok(d)
}

/// Device radii (m) of one uniform drop in the cell.
#[pyfunction]
#[pyo3(signature = (k_devices, seed, r_cell=100.0))]
fn sample_radii(k_devices: usize, seed: u64, r_cell: f64) -> PyResult<Vec<f64>> {
    Ok(network::sample_topology(k_devices, r_cell, seed).map_err(err)?.radii().collect())
}

/// One over-the-air aggregation round of `updates` (one list per device).
#[pyfunction]
#[pyo3(signature = (updates, distances, seed, params=None, fading="rayleigh", noise=true, receiver="scheduled"))]
fn baa_round<'py>(
    py: Python<'py>,
    updates: Vec<Vec<f64>>,
    distances: Vec<f64>,
    seed: u64,
    params: Option<PySystemParams>,
    fading: &str,
    noise: bool,
    receiver: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let fading = match fading {
        "rayleigh" => Fading::Rayleigh,
        "flat" => Fading::Flat,
        other => return Err(PyValueError::new_err(format!("unknown fading {other:?}; expected rayleigh or flat"))),
    };
    let receiver = match receiver {
        "scheduled" => Receiver::Scheduled,
        "genie" => Receiver::Genie,
        other => return Err(PyValueError::new_err(format!("unknown receiver {other:?}; expected scheduled or genie"))),
    };
    let opts = BaaOptions { fading, noise, receiver };
    let p = params_or_default(params);
    let out = py
        .detach(|| phy::baa_round(&updates, &distances, &p, &opts, &mut rng::stream(seed, "python-baa", 0)))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("aggregate", out.aggregate)?;
    d.set_item("rho0", out.diagnostics.rho0)?;
    d.set_item("snr", out.diagnostics.snr)?;
    d.set_item("latency_s", out.diagnostics.latency_s)?;
    d.set_item("truncation_fraction", out.diagnostics.truncation_fraction)?;
    d.set_item("mean_transmit_power", out.diagnostics.mean_transmit_power)?;
    Ok(d)
}

/// One digital OFDMA round of `updates`.
#[pyfunction]
#[pyo3(signature = (updates, distances, seed, params=None, bit_flips=false))]
fn digital_round<'py>(
    py: Python<'py>,
    updates: Vec<Vec<f64>>,
    distances: Vec<f64>,
    seed: u64,
    params: Option<PySystemParams>,
    bit_flips: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let p = params_or_default(params);
    let opts = DigitalOptions { bit_flips };
    let out = py
        .detach(|| phy::digital_round(&updates, &distances, &p, &opts, &mut rng::stream(seed, "python-digital", 0)))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("aggregate", out.aggregate)?;
    d.set_item("round_latency", out.round_latency)?;
    d.set_item("per_device_latency", out.per_device_latency)?;
    Ok(d)
}

/// Spreads `symbols` with a ±1 code and despreads them back.
#[pyfunction]
fn dsss_round_trip(symbols: Vec<f64>, chips: Vec<f64>) -> PyResult<Vec<f64>> {
    let code = extensions::SpreadingCode::new(chips).map_err(err)?;
    extensions::despread(&extensions::spread(&symbols, &code), &code).map_err(err)
}

/// Ratio of unspread to despread interference power over `trials` attacks.
#[pyfunction]
#[pyo3(signature = (gamma, trials, seed, k_legit=2, n_symbols=4, adversary_power=1.0))]
fn suppression_ratio(
    py: Python<'_>,
    gamma: usize,
    trials: u64,
    seed: u64,
    k_legit: usize,
    n_symbols: usize,
    adversary_power: f64,
) -> PyResult<f64> {
    py.detach(|| extensions::suppression_experiment(gamma, trials, k_legit, n_symbols, adversary_power, seed))
        .map(|r| r.suppression_ratio)
        .map_err(err)
}

/// Aggregation-beam objective and SDMA feasibility for random CN(0,1) channels.
#[pyfunction]
#[pyo3(signature = (n_antennas, k_users, seed, n0=1.0))]
fn beamforming<'py>(py: Python<'py>, n_antennas: usize, k_users: usize, seed: u64, n0: f64) -> PyResult<Bound<'py, PyDict>> {
    let channels = extensions::random_channels(n_antennas, k_users, &mut rng::stream(seed, "python-beam", 0));
    let problem = extensions::BeamProblem::new(channels, (0..k_users).collect(), n0).map_err(err)?;
    let agg = extensions::aggregation_beamformer(&problem, 1).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("objective", agg.objective)?;
    d.set_item("eigenvalue", agg.eigenvalues[0])?;
    match extensions::sdma_beamformer(&problem) {
        extensions::SdmaOutcome::Infeasible { .. } => {
            d.set_item("sdma_feasible", false)?;
            d.set_item("sdma_snr", PyList::empty(py))?;
        }
        extensions::SdmaOutcome::Beams(beams) => {
            d.set_item("sdma_feasible", true)?;
            d.set_item("sdma_snr", beams.iter().map(|b| b.snr).collect::<Vec<_>>())?;
        }
    }
    Ok(d)
}

fn to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.into_pyobject(py)?.into_any().unbind(),
            (None, Some(i)) => i.into_pyobject(py)?.into_any().unbind(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(a) => PyList::new(py, a.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?)?.into_any().unbind(),
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any().unbind()
        }
    })
}

/// Parses a TOML experiment configuration and returns its SHA-256 hash.
#[pyfunction]
fn config_hash(toml_text: &str) -> PyResult<String> {
    Ok(ExperimentConfig::from_toml(toml_text).map_err(err)?.hash())
}

/// Runs an experiment command and returns its manifest.
///
/// `command` is one of tradeoff, montecarlo, latency, train, compare,
/// extensions. `config` is TOML text (empty for defaults).
#[pyfunction]
#[pyo3(signature = (command, out, config="", seed=None, trials=None, format="csv"))]
fn run(
    py: Python<'_>,
    command: &str,
    out: PathBuf,
    config: &str,
    seed: Option<u64>,
    trials: Option<u64>,
    format: &str,
) -> PyResult<Py<PyAny>> {
    let command: Command = command.parse().map_err(err)?;
    let format = match format {
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => return Err(PyValueError::new_err(format!("unknown format {other:?}; expected csv or json"))),
    };
    let mut cfg = ExperimentConfig::from_toml(config).map_err(err)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(trials) = trials {
        cfg.trials = trials;
    }
    let manifest = py.detach(|| experiment::run(command, &cfg, &out, format)).map_err(err)?;
    let value = serde_json::to_value(&manifest).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &value)
}

#[pymodule]
#[pyo3(name = "airfeel")]
fn airfeel_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySystemParams>()?;
    m.add_function(wrap_pyfunction!(exp_integral, m)?)?;
    m.add_function(wrap_pyfunction!(truncation_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(receive_snr, m)?)?;
    m.add_function(wrap_pyfunction!(k_in_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(expected_snr_all_inclusive, m)?)?;
    m.add_function(wrap_pyfunction!(expected_snr_cell_interior, m)?)?;
    m.add_function(wrap_pyfunction!(latency_report, m)?)?;
    m.add_function(wrap_pyfunction!(sample_radii, m)?)?;
    m.add_function(wrap_pyfunction!(baa_round, m)?)?;
    m.add_function(wrap_pyfunction!(digital_round, m)?)?;
    m.add_function(wrap_pyfunction!(dsss_round_trip, m)?)?;
    m.add_function(wrap_pyfunction!(suppression_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(beamforming, m)?)?;
    m.add_function(wrap_pyfunction!(config_hash, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
