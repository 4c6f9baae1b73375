//! Python bindings: run experiments from config JSON and call the closed-form helpers directly.

use bose_complexity::harness::{self, Artifact, ExperimentConfig, HarnessError, Outcome};
use bose_complexity::phase::{self, InteractionRegime, PhasePoint};
use bose_complexity::{gates, haar, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn harness_err(e: HarnessError) -> PyErr {
    if e.exit_code() == 1 {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn core_err(e: Error) -> PyErr {
    harness_err(HarnessError::Core(e))
}

fn text(a: &Artifact) -> PyResult<String> {
    let bytes = a.to_bytes().map_err(harness_err)?;
    String::from_utf8(bytes).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

fn outcome_dict<'py>(py: Python<'py>, o: &Outcome) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("summary", &o.summary)?;
    d.set_item("format", o.artifact.extension())?;
    d.set_item("output", text(&o.artifact)?)?;
    let side = PyDict::new(py);
    for (name, a) in &o.sidecars {
        side.set_item(name, text(a)?)?;
    }
    d.set_item("sidecars", side)?;
    Ok(d)
}

fn parse(config: &str) -> PyResult<ExperimentConfig> {
    ExperimentConfig::from_json(config).map_err(harness_err)
}

/// Runs one experiment; returns its summary and the text of every output file.
#[pyfunction]
fn run<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = parse(config)?;
    let out = py.detach(|| harness::run(&cfg)).map_err(harness_err)?;
    outcome_dict(py, &out)
}

#[pyfunction]
#[pyo3(signature = (config, jobs=None))]
fn sweep<'py>(py: Python<'py>, config: &str, jobs: Option<usize>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = parse(config)?;
    let out = py.detach(|| harness::sweep(&cfg, jobs)).map_err(harness_err)?;
    outcome_dict(py, &out)
}

fn regime(name: &str) -> PyResult<InteractionRegime> {
    serde_json::from_value(serde_json::Value::String(name.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown interaction regime {name:?}")))
}

#[pyfunction]
fn gamma_easy(alpha: f64, beta: f64, dimension: usize) -> PyResult<f64> {
    Ok(phase::gamma_easy(alpha, beta, dimension).map_err(core_err)?.value)
}

/// `(value, "I" | "II")`.
#[pyfunction]
fn gamma_hard(alpha: f64, beta: f64, dimension: usize, v_regime: &str) -> PyResult<(f64, &'static str)> {
    let h = phase::gamma_hard(&PhasePoint::new(alpha, beta, dimension, regime(v_regime)?, 0.0)).map_err(core_err)?;
    Ok((
        h.value,
        match h.kind {
            phase::HardType::I => "I",
            phase::HardType::II => "II",
        },
    ))
}

/// `(verdict, transition_kind)` at one point of the phase map.
#[pyfunction]
fn classify(
    alpha: f64,
    beta: f64,
    dimension: usize,
    v_regime: &str,
    gamma: f64,
) -> PyResult<(&'static str, &'static str)> {
    let v = phase::classify(&PhasePoint::new(alpha, beta, dimension, regime(v_regime)?, gamma)).map_err(core_err)?;
    Ok((v.verdict.as_str(), v.transition_kind.as_str()))
}

/// `(cdf, two_term_bound)` for the largest squared entry of a uniform unit vector.
#[pyfunction]
fn max_entry_cdf(x: f64, m: usize) -> PyResult<(f64, f64)> {
    let c = haar::max_entry_cdf(x, m).map_err(core_err)?;
    Ok((c.value, c.two_term_bound))
}

#[pyfunction]
fn tuned_entangling_params<'py>(py: Python<'py>, v: f64) -> PyResult<Bound<'py, PyDict>> {
    let p = gates::tuned_entangling_params(v).map_err(core_err)?;
    let d = PyDict::new(py);
    d.set_item("m_int", p.m_int)?;
    d.set_item("J", p.j)?;
    d.set_item("t", p.t)?;
    d.set_item("phi", p.phi)?;
    d.set_item("phi_reference", p.phi_reference)?;
    d.set_item("leakage", p.leakage)?;
    Ok(d)
}

#[pymodule]
fn bose_complexity_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_easy, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_hard, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(max_entry_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(tuned_entangling_params, m)?)?;
    Ok(())
}
