//! Python bindings. Tables cross the boundary as nested lists indexed
//! `[state][action]` (and `[state][action][next]` for dynamics).

use ::opo_cmdp::cmdp::{self, Dynamics, LayeredStateSpace, Losses, Policy};
use ::opo_cmdp::harness;
use ::opo_cmdp::opo;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: ::opo_cmdp::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn flatten<T: Clone>(rows: &[Vec<T>]) -> Vec<T> {
    rows.iter().flatten().cloned().collect()
}

fn rows(flat: &[f64], width: usize) -> Vec<Vec<f64>> {
    flat.chunks(width.max(1)).map(<[f64]>::to_vec).collect()
}

struct Tables {
    space: LayeredStateSpace,
    num_actions: usize,
}

fn tables(widths: Vec<usize>, table: &[Vec<f64>]) -> PyResult<Tables> {
    let space = LayeredStateSpace::from_widths(&widths).map_err(err)?;
    let num_actions = table.first().map_or(0, Vec::len);
    if table.len() != space.num_states() || table.iter().any(|r| r.len() != num_actions) {
        return Err(PyValueError::new_err("tables must be num_states rows of num_actions entries"));
    }
    Ok(Tables { space, num_actions })
}

fn policy_from(t: &Tables, policy: &[Vec<f64>]) -> PyResult<Policy> {
    Policy::from_probs(t.space.num_states(), t.num_actions, flatten(policy)).map_err(err)
}

fn dynamics_from(t: &Tables, dynamics: &[Vec<Vec<f64>>]) -> PyResult<Dynamics> {
    let flat: Vec<f64> = dynamics.iter().flat_map(|r| flatten(r)).collect();
    Dynamics::from_probs(t.space.num_states(), t.num_actions, flat).map_err(err)
}

fn losses_from(t: &Tables, losses: &[Vec<f64>]) -> PyResult<Losses> {
    Losses::from_means(t.space.num_states(), t.num_actions, flatten(losses)).map_err(err)
}

#[pyfunction]
fn hellinger_sq(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    cmdp::hellinger_sq(&p, &q).map_err(err)
}

#[pyfunction]
fn tv_distance(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    cmdp::tv_distance(&p, &q).map_err(err)
}

#[pyfunction]
fn exploration_bonus(beta: f64, cum_occupancy: f64) -> f64 {
    opo::exploration_bonus(beta, cum_occupancy)
}

#[pyfunction]
fn combined_bonus(bonus_loss: f64, bonus_dyn: f64, horizon: usize) -> f64 {
    opo::combined_bonus(bonus_loss, bonus_dyn, horizon)
}

/// Returns `(V, Q)` of `policy` under `dynamics` and `losses`.
#[pyfunction]
fn value_backup(
    widths: Vec<usize>,
    policy: Vec<Vec<f64>>,
    dynamics: Vec<Vec<Vec<f64>>>,
    losses: Vec<Vec<f64>>,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let t = tables(widths, &losses)?;
    let values = cmdp::value_backup(&t.space, &policy_from(&t, &policy)?, &dynamics_from(&t, &dynamics)?, &losses_from(&t, &losses)?)
        .map_err(err)?;
    Ok((values.v.clone(), rows(&values.q, t.num_actions)))
}

#[pyfunction]
fn occupancy_measures(widths: Vec<usize>, policy: Vec<Vec<f64>>, dynamics: Vec<Vec<Vec<f64>>>) -> PyResult<Vec<Vec<f64>>> {
    let t = tables(widths, &policy)?;
    let q = cmdp::occupancy_measures(&t.space, &policy_from(&t, &policy)?, &dynamics_from(&t, &dynamics)?).map_err(err)?;
    Ok(rows(q.as_slice(), t.num_actions))
}

/// Returns `(policy, V)` of the optimal deterministic policy.
#[pyfunction]
fn optimal_policy(
    widths: Vec<usize>,
    dynamics: Vec<Vec<Vec<f64>>>,
    losses: Vec<Vec<f64>>,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let t = tables(widths, &losses)?;
    let (policy, values) =
        cmdp::optimal_policy(&t.space, &dynamics_from(&t, &dynamics)?, &losses_from(&t, &losses)?).map_err(err)?;
    Ok((rows(policy.as_slice(), t.num_actions), values.v.clone()))
}

#[pyclass(name = "AlgoParams", get_all, frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyAlgoParams {
    eta: f64,
    beta_loss: f64,
    beta_dyn: f64,
    bonus_scale: f64,
    delta: f64,
}

#[pyfunction]
fn default_parameters(
    episodes: usize,
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    loss_class_size: usize,
    dyn_class_size: usize,
    delta: f64,
) -> PyResult<PyAlgoParams> {
    let p = opo::default_parameters(episodes, horizon, num_states, num_actions, (loss_class_size, dyn_class_size), delta)
        .map_err(err)?;
    Ok(PyAlgoParams {
        eta: p.eta,
        beta_loss: p.beta_loss,
        beta_dyn: p.beta_dyn,
        bonus_scale: p.bonus_scale,
        delta: p.delta,
    })
}

#[pyclass(name = "ExperimentConfig", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyExperimentConfig {
    inner: harness::ExperimentConfig,
}

#[pymethods]
impl PyExperimentConfig {
    /// Parses and validates a JSON config.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: harness::ExperimentConfig =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn standard(seed: u64) -> Self {
        Self {
            inner: harness::ExperimentConfig::standard(seed),
        }
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("config serializes")
    }

    /// Copy with the given fields replaced, validated.
    #[pyo3(signature = (episodes=None, seed=None, bonus_scale=None, num_contexts=None))]
    fn replace(
        &self,
        episodes: Option<usize>,
        seed: Option<u64>,
        bonus_scale: Option<f64>,
        num_contexts: Option<usize>,
    ) -> PyResult<Self> {
        let mut inner = self.inner.clone();
        if let Some(x) = episodes {
            inner.episodes = x;
        }
        if let Some(x) = seed {
            inner.seed = x;
        }
        if let Some(x) = bonus_scale {
            inner.bonus_scale = x;
        }
        if let Some(x) = num_contexts {
            inner.num_contexts = x;
        }
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn episodes(&self) -> usize {
        self.inner.episodes
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn bonus_scale(&self) -> f64 {
        self.inner.bonus_scale
    }

    fn __repr__(&self) -> String {
        format!("ExperimentConfig({})", self.to_json())
    }
}

#[pyclass(name = "RunRecord", get_all, frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRunRecord {
    episode: usize,
    context: usize,
    realized_value: f64,
    optimal_value: f64,
    regret_increment: f64,
    cum_regret: f64,
    expected_regret_increment: f64,
    cum_expected_regret: f64,
    loss_estimator: Option<usize>,
    dyn_estimator: Option<usize>,
    bonus_mass: f64,
    sq_err_diag: f64,
    hellinger_diag: f64,
}

impl From<&harness::RunRecord> for PyRunRecord {
    fn from(r: &harness::RunRecord) -> Self {
        Self {
            episode: r.episode,
            context: r.context,
            realized_value: r.realized_value,
            optimal_value: r.optimal_value,
            regret_increment: r.regret_increment,
            cum_regret: r.cum_regret,
            expected_regret_increment: r.expected_regret_increment,
            cum_expected_regret: r.cum_expected_regret,
            loss_estimator: r.loss_estimator,
            dyn_estimator: r.dyn_estimator,
            bonus_mass: r.bonus_mass,
            sq_err_diag: r.sq_err_diag,
            hellinger_diag: r.hellinger_diag,
        }
    }
}

/// `(name, checks, violations, worst_slack)` for one family of checks.
type ReportTuple = (String, usize, usize, f64);

#[pyclass(name = "Run", frozen)]
struct PyRun {
    inner: harness::Run,
}

#[pymethods]
impl PyRun {
    #[getter]
    fn records(&self) -> Vec<PyRunRecord> {
        self.inner.records.iter().map(PyRunRecord::from).collect()
    }

    #[getter]
    fn optimal_values(&self) -> Vec<f64> {
        self.inner.optimal_values.clone()
    }

    fn pseudo_regret(&self) -> PyResult<f64> {
        harness::pseudo_regret(&self.inner.records).map_err(err)
    }

    fn expected_regret(&self) -> PyResult<f64> {
        harness::expected_regret(&self.inner.records).map_err(err)
    }

    /// Cached `π^stage_context` as `[state][action]`.
    fn policy(&self, context: usize, stage: usize) -> PyResult<Vec<Vec<f64>>> {
        let policies = self
            .inner
            .agent
            .cache()
            .policies(context.min(self.inner.agent.cache().num_contexts().saturating_sub(1)));
        match stage.checked_sub(1).and_then(|i| policies.get(i)) {
            Some(p) if context < self.inner.agent.cache().num_contexts() => Ok(rows(p.as_slice(), p.num_actions())),
            _ => Err(PyValueError::new_err("no cached policy for that context and stage")),
        }
    }

    fn lemma_suite(&self) -> PyResult<Vec<ReportTuple>> {
        let suite = harness::lemma_suite(&self.inner).map_err(err)?;
        Ok(suite
            .reports()
            .iter()
            .map(|r| (r.name.clone(), r.checks, r.violations, r.worst_slack))
            .collect())
    }

    /// `(holds, max_sq_err, sq_err_bound, max_hellinger, hellinger_bound)`.
    fn concentration(&self) -> PyResult<(bool, f64, f64, f64, f64)> {
        let c = harness::concentration_check(&self.inner.config, &self.inner.records).map_err(err)?;
        Ok((c.holds(), c.max_sq_err, c.sq_err_bound, c.max_hellinger, c.hellinger_bound))
    }

    /// `(holds, gap, bound)`.
    fn azuma(&self) -> PyResult<(bool, f64, f64)> {
        let a = harness::azuma_gap_check(&self.inner.records, self.inner.config.horizon, self.inner.config.delta)
            .map_err(err)?;
        Ok((a.holds(), a.gap, a.bound))
    }

    fn loglog_slope(&self) -> Option<f64> {
        let cumulative: Vec<f64> = self.inner.records.iter().map(|r| r.cum_regret).collect();
        harness::loglog_slope(&cumulative)
    }
}

#[pyfunction]
fn run_experiment(py: Python<'_>, config: &PyExperimentConfig) -> PyResult<PyRun> {
    let inner = config.inner.clone();
    let run = py.detach(move || harness::run_experiment(&inner)).map_err(err)?;
    Ok(PyRun { inner: run })
}

#[pyfunction]
fn baseline_uniform(config: &PyExperimentConfig) -> PyResult<Vec<PyRunRecord>> {
    let records = harness::baseline_uniform(&config.inner).map_err(err)?;
    Ok(records.iter().map(PyRunRecord::from).collect())
}

#[pyfunction]
fn baseline_known_model(config: &PyExperimentConfig) -> PyResult<Vec<PyRunRecord>> {
    let records = harness::baseline_known_model(&config.inner).map_err(err)?;
    Ok(records.iter().map(PyRunRecord::from).collect())
}

#[pyfunction]
fn regret_bound(config: &PyExperimentConfig) -> PyResult<f64> {
    harness::regret_bound(&config.inner).map_err(err)
}

#[pyfunction]
fn log_sum_check(xs: Vec<f64>, lam: f64) -> PyResult<(f64, f64)> {
    let c = harness::log_sum_check(&xs, lam).map_err(err)?;
    Ok((c.lhs, c.rhs))
}

#[pymodule]
#[pyo3(name = "opo_cmdp")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAlgoParams>()?;
    m.add_class::<PyExperimentConfig>()?;
    m.add_class::<PyRunRecord>()?;
    m.add_class::<PyRun>()?;
    m.add_function(wrap_pyfunction!(hellinger_sq, m)?)?;
    m.add_function(wrap_pyfunction!(tv_distance, m)?)?;
    m.add_function(wrap_pyfunction!(exploration_bonus, m)?)?;
    m.add_function(wrap_pyfunction!(combined_bonus, m)?)?;
    m.add_function(wrap_pyfunction!(value_backup, m)?)?;
    m.add_function(wrap_pyfunction!(occupancy_measures, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_policy, m)?)?;
    m.add_function(wrap_pyfunction!(default_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(baseline_uniform, m)?)?;
    m.add_function(wrap_pyfunction!(baseline_known_model, m)?)?;
    m.add_function(wrap_pyfunction!(regret_bound, m)?)?;
    m.add_function(wrap_pyfunction!(log_sum_check, m)?)?;
    Ok(())
}
