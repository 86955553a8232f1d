use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use vortexlab::evolve::{evolve, to_deviation, BoxSpec, ComplexField, EvolutionConfig, Nonlinearity};
use vortexlab::helmholtz::{
    runge_approximate, Domain, Frequency, FundamentalSolution, Resolution, RungeOptions,
    SourceOperator,
};
use vortexlab::scenarios::{preset, run_scenario, PRESETS};
use vortexlab::specfun::besseli_energy;
use vortexlab::vortex::{EventConfig, ExtractConfig};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    PRESETS.to_vec()
}

/// G_tau(x) for the Helmholtz-Yukawa operator.
#[pyfunction]
fn fundamental_solution(tau: f64, x: [f64; 3]) -> PyResult<f64> {
    FundamentalSolution::new(Frequency::new(tau)).eval(x).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (nu, alpha, r_outer=1.0, imaginary=false))]
fn bessel_energy(nu: f64, alpha: f64, r_outer: f64, imaginary: bool) -> PyResult<f64> {
    let a = if imaginary { Complex64::new(0.0, alpha) } else { Complex64::new(alpha, 0.0) };
    besseli_energy(nu, a, r_outer).map(|e| e.value).map_err(value_err)
}

/// Runge report (JSON) for a point source at `distance` from the centre of the unit ball.
#[pyfunction]
#[pyo3(signature = (tau, eps=5e-3, distance=2.0, target_per_axis=16, source_per_axis=8))]
fn runge_report(py: Python<'_>, tau: f64, eps: f64, distance: f64, target_per_axis: usize, source_per_axis: usize) -> PyResult<String> {
    let report = py.detach(|| {
        let freq = Frequency::new(tau);
        let op = SourceOperator::build(
            Domain::unit_ball(),
            Domain::ball([1.5 * distance, 0.0, 0.0], 0.3),
            freq,
            Resolution { target_per_axis, source_per_axis },
        )?;
        let g = FundamentalSolution::new(freq);
        let phi: Vec<Complex64> = op
            .target_nodes
            .points
            .iter()
            .map(|x| Complex64::new(g.radial(((x[0] - distance).powi(2) + x[1] * x[1] + x[2] * x[2]).sqrt()), 0.0))
            .collect();
        runge_approximate(&op, &phi, eps, None, &RungeOptions::default()).map(|r| r.report)
    });
    json(&report.map_err(value_err)?)
}

/// Detected events (JSON) for a preset at its suggested resolution.
#[pyfunction]
#[pyo3(signature = (name, radius=None))]
fn scenario_events(py: Python<'_>, name: &str, radius: Option<f64>) -> PyResult<String> {
    let (sol, p) = preset(name, radius).map_err(value_err)?;
    let out = py
        .detach(|| run_scenario(&sol, &p.plan, &ExtractConfig::default(), &EventConfig::default()))
        .map_err(value_err)?;
    json(&out.events)
}

/// `(t, mass, energy)` rows for a Gaussian dip of depth `amplitude` in the background 1.
#[pyfunction]
#[pyo3(signature = (amplitude, length=16.0, n=32, kappa=1.0, dt=1e-3, steps=100, records=10))]
#[allow(clippy::too_many_arguments)]
fn evolve_observables(
    py: Python<'_>,
    amplitude: f64,
    length: f64,
    n: usize,
    kappa: f64,
    dt: f64,
    steps: usize,
    records: usize,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let spec = BoxSpec::cubic(length, n).map_err(value_err)?;
    let records = records.clamp(1, steps.max(1));
    let cfg = EvolutionConfig {
        kappa,
        nonlinearity: Nonlinearity::GrossPitaevskii,
        dt,
        snapshot_times: (0..=records).map(|k| (k * steps / records) as f64 * dt).collect(),
    };
    let w = ComplexField::from_fn(spec, 0.0, |x| {
        Complex64::new(amplitude * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0).exp(), 0.0)
    });
    let ev = py.detach(|| evolve(&to_deviation(&w), &cfg)).map_err(value_err)?;
    Ok(ev.observables.iter().map(|o| (o.t, o.mass, o.gl_energy)).collect())
}

#[pymodule]
fn vortexlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", vortexlab::VERSION)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(fundamental_solution, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_energy, m)?)?;
    m.add_function(wrap_pyfunction!(runge_report, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_events, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_observables, m)?)?;
    Ok(())
}
