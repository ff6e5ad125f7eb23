//! Python bindings. Results cross the boundary as plain dicts/lists built from
//! the same serde representation that the CLI writes to disk.

use std::path::Path;

use audit_game::analysis::{self, cover_regime as regime};
use audit_game::runner::{run_trial as trial, shipped};
use audit_game::{metrics, Params, PolicySpec, Registry, StrategySpec, SweepConfig};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match value {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (_, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, to_py(py, v)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &serde_json::to_value(value).map_err(err)?)
}

fn params(map: Option<std::collections::BTreeMap<String, f64>>) -> Params {
    let mut p = Params::new();
    for (k, v) in map.unwrap_or_default() {
        p.insert(&k, v);
    }
    p
}

/// Environment parameters of one game.
#[pyclass(name = "GameConfig", from_py_object)]
#[derive(Clone)]
struct PyGameConfig {
    inner: audit_game::GameConfig,
}

#[pymethods]
impl PyGameConfig {
    #[new]
    #[pyo3(signature = (horizon=12, m0=0.5, sigma=0.02, n_max=1000, n_min=100, epsilon=0.0, z=1.96, population=None, alpha=0.05))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        horizon: usize,
        m0: f64,
        sigma: f64,
        n_max: u32,
        n_min: u32,
        epsilon: f64,
        z: f64,
        population: Option<u32>,
        alpha: f64,
    ) -> PyResult<Self> {
        let inner = audit_game::GameConfig {
            horizon,
            m0,
            sigma,
            n_max,
            n_min,
            epsilon,
            z,
            population: population.unwrap_or(n_max),
            alpha,
        };
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    /// The default calibration with the truth started at 0.30.
    #[staticmethod]
    fn attrition() -> Self {
        Self { inner: audit_game::GameConfig::attrition() }
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon
    }
    #[getter]
    fn m0(&self) -> f64 {
        self.inner.m0
    }
    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
    }
    #[getter]
    fn n_max(&self) -> u32 {
        self.inner.n_max
    }
    #[getter]
    fn n_min(&self) -> u32 {
        self.inner.n_min
    }
    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }
    #[getter]
    fn z(&self) -> f64 {
        self.inner.z
    }
    #[getter]
    fn population(&self) -> u32 {
        self.inner.population
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "GameConfig(horizon={}, m0={}, sigma={}, n_max={}, n_min={}, epsilon={}, z={}, population={}, alpha={})",
            c.horizon, c.m0, c.sigma, c.n_max, c.n_min, c.epsilon, c.z, c.population, c.alpha
        )
    }
}

fn config_or_default(config: Option<PyGameConfig>) -> audit_game::GameConfig {
    config.map(|c| c.inner).unwrap_or_default()
}

#[pyfunction]
fn strategy_names() -> Vec<String> {
    Registry::builtin().strategy_names().map(str::to_owned).collect()
}

#[pyfunction]
fn policy_names() -> Vec<String> {
    Registry::builtin().policy_names().map(str::to_owned).collect()
}

/// Plays one seeded game; returns `{"seed", "metrics", "rounds", "sample_floor"}`.
#[pyfunction]
#[pyo3(signature = (strategy, policy, seed, config=None, strategy_params=None, policy_params=None))]
fn run_trial<'py>(
    py: Python<'py>,
    strategy: &str,
    policy: &str,
    seed: u64,
    config: Option<PyGameConfig>,
    strategy_params: Option<std::collections::BTreeMap<String, f64>>,
    policy_params: Option<std::collections::BTreeMap<String, f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let registry = Registry::builtin();
    let config = config_or_default(config);
    let s = registry
        .resolve_strategy(&StrategySpec { name: strategy.to_owned(), params: params(strategy_params) }, &config)
        .map_err(err)?;
    let p = registry
        .resolve_policy(&PolicySpec { name: policy.to_owned(), params: params(policy_params) }, config.horizon)
        .map_err(err)?;
    let outcome = trial(registry, &config, &s, &p, seed).map_err(err)?;
    let value = serde_json::json!({
        "seed": outcome.seed,
        "metrics": outcome.metrics,
        "rounds": outcome.trajectory.rounds,
        "realized_audit_set": outcome.trajectory.realized_audit_set,
        "sample_floor": outcome.sample_floor,
    });
    to_py(py, &value)
}

/// Runs a sweep from a shipped config name, a YAML path, or inline YAML text.
#[pyfunction]
#[pyo3(signature = (config="default", overrides=None))]
fn run_sweep<'py>(
    py: Python<'py>,
    config: &str,
    overrides: Option<std::collections::BTreeMap<String, String>>,
) -> PyResult<Bound<'py, PyAny>> {
    let registry = Registry::builtin();
    let mut sweep = if let Some(text) = shipped::by_name(config) {
        SweepConfig::from_yaml(text, registry)
    } else if Path::new(config).is_file() {
        audit_game::load_config(Path::new(config), registry)
    } else {
        SweepConfig::from_yaml(config, registry)
    }
    .map_err(err)?;
    for (k, v) in overrides.unwrap_or_default() {
        sweep = sweep.apply_override(&k, &v, registry).map_err(err)?;
    }
    let result = py.detach(|| audit_game::run_sweep(registry, &sweep)).map_err(err)?;
    serialize(py, &result)
}

/// Honest-noisy false-positive experiment over `range(seeds)`.
#[pyfunction]
#[pyo3(signature = (seeds=200, policies=None, config=None))]
fn fpr_experiment<'py>(
    py: Python<'py>,
    seeds: u64,
    policies: Option<Vec<String>>,
    config: Option<PyGameConfig>,
) -> PyResult<Bound<'py, PyAny>> {
    let registry = Registry::builtin();
    let config = config_or_default(config);
    let names = policies.unwrap_or_else(policy_names);
    let specs = names
        .iter()
        .filter(|n| n.as_str() != "surprise")
        .map(|n| registry.resolve_policy(&PolicySpec::new(n), config.horizon))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let seeds: Vec<u64> = (0..seeds).collect();
    let report = py.detach(|| analysis::fpr_experiment(registry, &specs, &seeds, &config)).map_err(err)?;
    serialize(py, &report)
}

#[pyfunction]
fn detection_threshold(p: f64, n: u32, epsilon: f64, z: f64) -> f64 {
    metrics::detection_threshold(p, n, epsilon, z)
}

#[pyfunction]
#[pyo3(signature = (k, alpha=0.05))]
fn bonferroni_z(k: usize, alpha: f64) -> Option<f64> {
    metrics::bonferroni_z(k, alpha)
}

/// `(lower, upper)` of the cover regime; empty when `lower >= upper`.
#[pyfunction]
#[pyo3(signature = (p, n_min, n_max, epsilon=0.0, z=1.96))]
fn cover_regime(p: f64, n_min: u32, n_max: u32, epsilon: f64, z: f64) -> (f64, f64) {
    let r = regime(p, n_min, n_max, epsilon, z);
    (r.lower, r.upper)
}

#[pyfunction]
fn expected_min_audited_round(horizon: usize, k: usize) -> Option<f64> {
    analysis::expected_min_audited_round(horizon, k)
}

#[pyfunction]
fn fwer_bound(alpha: f64, k: usize) -> f64 {
    analysis::fwer_bound(alpha, k)
}

#[pyfunction]
fn cherry_pick_expected_gap(candidates: usize, sigma_pick: f64) -> f64 {
    analysis::cherry_pick_expected_gap(candidates, sigma_pick)
}

#[pymodule]
fn audit_game_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGameConfig>()?;
    m.add_function(wrap_pyfunction!(strategy_names, m)?)?;
    m.add_function(wrap_pyfunction!(policy_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_trial, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(fpr_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(detection_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(bonferroni_z, m)?)?;
    m.add_function(wrap_pyfunction!(cover_regime, m)?)?;
    m.add_function(wrap_pyfunction!(expected_min_audited_round, m)?)?;
    m.add_function(wrap_pyfunction!(fwer_bound, m)?)?;
    m.add_function(wrap_pyfunction!(cherry_pick_expected_gap, m)?)?;
    Ok(())
}
