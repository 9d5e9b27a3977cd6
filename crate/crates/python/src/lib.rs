//! Python bindings: domains, the exhaustive oracle, synthetic and learned
//! policies, the three search algorithms, policy unrolling, and the MLP
//! container, wrapped thinly over the core crate.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use focal_search::bench::AlgorithmSpec;
use focal_search::domains::make_domain;
use focal_search::neural::{Activation, Layer, MlpModel as CoreMlp, MlpTilePolicy};
use focal_search::policy::{
    build_opt_table, measure_accuracy as core_measure_accuracy, synthesize_policy,
    StochasticPolicy, SyntheticPolicyTable, UnrollMode,
};
use focal_search::search::{
    focal_search as core_focal_search, preferred_astar, reverse_dijkstra, weighted_astar,
    CostTable as CoreCostTable, SearchLimits,
};
use focal_search::{DomainAdapter, FocalConfig, StateKey};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn io_err(e: impl std::fmt::Display) -> PyErr {
    PyIOError::new_err(e.to_string())
}

/// A search graph with its admissible heuristic.
#[pyclass]
struct Domain {
    inner: Arc<dyn DomainAdapter>,
}

#[pymethods]
impl Domain {
    /// Build by id: "tile8", "tile15", "pancake<N>", "blocks<B>".
    #[new]
    fn new(id: &str) -> PyResult<Self> {
        Ok(Domain {
            inner: make_domain(id).map_err(value_err)?,
        })
    }

    fn id(&self) -> String {
        self.inner.id().to_string()
    }

    fn action_count(&self) -> usize {
        self.inner.action_count()
    }

    fn goal(&self) -> StateKey {
        self.inner.goal()
    }

    fn is_goal(&self, state: StateKey) -> bool {
        state == self.inner.goal()
    }

    fn heuristic(&self, state: StateKey) -> f64 {
        self.inner.heuristic(state)
    }

    fn applicable_actions(&self, state: StateKey) -> Vec<usize> {
        self.inner.applicable_actions(state)
    }

    fn successor(&self, state: StateKey, action: usize) -> Option<StateKey> {
        self.inner.successor(state, action)
    }

    fn parse(&self, text: &str) -> PyResult<StateKey> {
        self.inner.parse_state(text).map_err(value_err)
    }

    fn format(&self, state: StateKey) -> String {
        self.inner.format_state(state)
    }

    fn __repr__(&self) -> String {
        format!(
            "Domain(id={:?}, actions={})",
            self.inner.id(),
            self.inner.action_count()
        )
    }
}

/// Exact cost-to-go for every state that can reach the goal.
#[pyclass]
struct CostTable {
    inner: Arc<CoreCostTable>,
}

#[pymethods]
impl CostTable {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(CostTable {
            inner: Arc::new(CoreCostTable::load(path).map_err(io_err)?),
        })
    }

    fn domain_id(&self) -> String {
        self.inner.domain_id().to_string()
    }

    fn get(&self, state: StateKey) -> Option<f64> {
        self.inner.get(state)
    }

    fn keys(&self) -> Vec<StateKey> {
        self.inner.keys().to_vec()
    }

    fn max_cost(&self) -> f64 {
        self.inner.max_cost()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(io_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "CostTable(domain={:?}, states={})",
            self.inner.domain_id(),
            self.inner.len()
        )
    }
}

/// Solve the whole space backwards from the goal.
#[pyfunction]
#[pyo3(signature = (domain, max_states = 50_000_000))]
fn build_oracle(domain: &Domain, max_states: usize) -> PyResult<CostTable> {
    Ok(CostTable {
        inner: Arc::new(
            reverse_dijkstra(domain.inner.as_ref(), max_states).map_err(value_err)?,
        ),
    })
}

enum PolicyImpl {
    Synthetic(Arc<SyntheticPolicyTable>),
    Mlp(Arc<MlpTilePolicy>),
}

/// A stochastic policy: either a synthetic score table or a loaded network.
#[pyclass]
struct Policy {
    inner: PolicyImpl,
    accuracy: f64,
}

impl Policy {
    fn as_dyn(&self) -> &dyn StochasticPolicy {
        match &self.inner {
            PolicyImpl::Synthetic(t) => t.as_ref(),
            PolicyImpl::Mlp(m) => m.as_ref(),
        }
    }
}

#[pymethods]
impl Policy {
    /// Load a synthetic policy table ("SPT1" container).
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let table = SyntheticPolicyTable::load(path).map_err(io_err)?;
        Ok(Policy {
            accuracy: table.measured_acc,
            inner: PolicyImpl::Synthetic(Arc::new(table)),
        })
    }

    /// Wrap an "MLP1" network as a tile15 policy; `accuracy` drives disc1.
    #[staticmethod]
    #[pyo3(signature = (path, accuracy = 0.875))]
    fn from_model(path: PathBuf, accuracy: f64) -> PyResult<Self> {
        let model = CoreMlp::load(path).map_err(io_err)?;
        Ok(Policy {
            accuracy,
            inner: PolicyImpl::Mlp(Arc::new(MlpTilePolicy::new(model).map_err(value_err)?)),
        })
    }

    fn action_count(&self) -> usize {
        self.as_dyn().action_count()
    }

    fn scores(&self, state: StateKey) -> Vec<f64> {
        self.as_dyn().scores(state)
    }

    fn best_action(&self, state: StateKey) -> usize {
        focal_search::deterministic_action(self.as_dyn(), state)
    }

    fn accuracy(&self) -> f64 {
        self.accuracy
    }

    fn target_acc(&self) -> Option<f64> {
        match &self.inner {
            PolicyImpl::Synthetic(t) => Some(t.target_acc),
            PolicyImpl::Mlp(_) => None,
        }
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        match &self.inner {
            PolicyImpl::Synthetic(t) => t.save(path).map_err(io_err),
            PolicyImpl::Mlp(_) => Err(value_err("model policies are saved as MLP1 files")),
        }
    }

    fn __repr__(&self) -> String {
        match &self.inner {
            PolicyImpl::Synthetic(t) => format!(
                "Policy(synthetic, domain={:?}, measured_acc={:.4})",
                t.domain_id(),
                t.measured_acc
            ),
            PolicyImpl::Mlp(_) => format!("Policy(mlp, accuracy={:.4})", self.accuracy),
        }
    }
}

/// Build a synthetic policy with the given target accuracy.
#[pyfunction]
#[pyo3(signature = (domain, oracle, target_acc, seed = 0))]
fn make_policy(
    domain: &Domain,
    oracle: &CostTable,
    target_acc: f64,
    seed: u64,
) -> PyResult<Policy> {
    let opt = build_opt_table(domain.inner.as_ref(), &oracle.inner, seed).map_err(value_err)?;
    let table =
        synthesize_policy(&opt, domain.inner.as_ref(), target_acc, seed).map_err(value_err)?;
    Ok(Policy {
        accuracy: table.measured_acc,
        inner: PolicyImpl::Synthetic(Arc::new(table)),
    })
}

/// Fraction of states whose best action starts an optimal path.
#[pyfunction]
#[pyo3(signature = (domain, oracle, policy, sample = None, seed = 0))]
fn measure_accuracy(
    domain: &Domain,
    oracle: &CostTable,
    policy: &Policy,
    sample: Option<usize>,
    seed: u64,
) -> PyResult<f64> {
    let opt = build_opt_table(domain.inner.as_ref(), &oracle.inner, seed).map_err(value_err)?;
    let subset: Option<Vec<StateKey>> = match sample {
        None => None,
        Some(n) => {
            use rand::prelude::*;
            let scored = opt.scored_keys();
            if n == 0 || n > scored.len() {
                return Err(value_err(format!("sample {n} out of range 1..={}", scored.len())));
            }
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            Some(
                rand::seq::index::sample(&mut rng, scored.len(), n)
                    .into_iter()
                    .map(|i| scored[i])
                    .collect(),
            )
        }
    };
    core_measure_accuracy(policy.as_dyn(), &opt, subset.as_deref()).map_err(value_err)
}

/// Outcome of one search run.
#[pyclass]
struct SearchResult {
    #[pyo3(get)]
    status: String,
    #[pyo3(get)]
    cost: Option<f64>,
    #[pyo3(get)]
    states: Vec<StateKey>,
    #[pyo3(get)]
    actions: Vec<usize>,
    #[pyo3(get)]
    expansions: u64,
    #[pyo3(get)]
    generations: u64,
    #[pyo3(get)]
    wall_seconds: f64,
    #[pyo3(get)]
    bound_w: f64,
    #[pyo3(get)]
    f_min: f64,
}

#[pymethods]
impl SearchResult {
    fn solved(&self) -> bool {
        self.status == "solved"
    }

    fn __repr__(&self) -> String {
        format!(
            "SearchResult(status={:?}, cost={:?}, expansions={})",
            self.status, self.cost, self.expansions
        )
    }
}

/// Run one of: "wastar", "prefastar", "focal:<kind>" on a single instance.
#[pyfunction]
#[pyo3(signature = (domain, start, algo, w = 1.5, policy = None,
                    max_expansions = 10_000_000, wall_cap_s = 300.0,
                    disc3_last_edge_only = false))]
#[allow(clippy::too_many_arguments)]
fn solve(
    domain: &Domain,
    start: StateKey,
    algo: &str,
    w: f64,
    policy: Option<&Policy>,
    max_expansions: u64,
    wall_cap_s: f64,
    disc3_last_edge_only: bool,
) -> PyResult<SearchResult> {
    let algo = AlgorithmSpec::parse(algo).map_err(value_err)?;
    let limits = SearchLimits {
        max_expansions,
        wall_cap_seconds: wall_cap_s,
        audit: false,
    };
    if algo.uses_bounds() && w < 1.0 {
        return Err(value_err(format!("bound {w} must be >= 1")));
    }
    let d = domain.inner.as_ref();
    let result = match algo {
        AlgorithmSpec::Wastar => weighted_astar(d, start, w, &limits),
        AlgorithmSpec::Prefastar => {
            let policy = policy.ok_or_else(|| value_err("prefastar needs a policy"))?;
            preferred_astar(d, start, policy.as_dyn(), &limits)
        }
        AlgorithmSpec::Focal(kind) => {
            let policy = policy.ok_or_else(|| value_err("focal search needs a policy"))?;
            let config = FocalConfig::new(kind, policy.accuracy, d.action_count())
                .with_disc3_last_edge_only(disc3_last_edge_only);
            core_focal_search(d, start, w, policy.as_dyn(), &config, &limits)
        }
    };
    let (states, actions) = result
        .path
        .map(|p| (p.states, p.actions))
        .unwrap_or_default();
    Ok(SearchResult {
        status: result.status.to_string(),
        cost: result.cost,
        states,
        actions,
        expansions: result.expansions,
        generations: result.generations,
        wall_seconds: result.wall_seconds,
        bound_w: result.bound_w,
        f_min: result.f_min_at_termination,
    })
}

/// Outcome of unrolling a policy.
#[pyclass]
struct UnrollResult {
    #[pyo3(get)]
    reached_goal: bool,
    #[pyo3(get)]
    states: Vec<StateKey>,
    #[pyo3(get)]
    actions: Vec<usize>,
    /// `(state, action)` of the inapplicable choice, when the unroll failed.
    #[pyo3(get)]
    failure: Option<(StateKey, usize)>,
}

#[pymethods]
impl UnrollResult {
    fn steps(&self) -> usize {
        self.actions.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "UnrollResult(reached_goal={}, steps={}, failed={})",
            self.reached_goal,
            self.actions.len(),
            self.failure.is_some()
        )
    }
}

/// Apply the policy for up to `k` steps ("greedy" or "sample" mode).
#[pyfunction]
#[pyo3(signature = (domain, policy, start, k, mode = "greedy", seed = 0))]
fn unroll(
    domain: &Domain,
    policy: &Policy,
    start: StateKey,
    k: usize,
    mode: &str,
    seed: u64,
) -> PyResult<UnrollResult> {
    let mode = match mode {
        "greedy" => UnrollMode::Greedy,
        "sample" => UnrollMode::Sample,
        other => return Err(value_err(format!("unknown mode {other:?}"))),
    };
    match focal_search::unroll(policy.as_dyn(), domain.inner.as_ref(), start, k, mode, seed) {
        Ok(u) => Ok(UnrollResult {
            reached_goal: u.reached_goal,
            states: u.states,
            actions: u.actions,
            failure: None,
        }),
        Err(e) => Ok(UnrollResult {
            reached_goal: false,
            states: Vec::new(),
            actions: Vec::new(),
            failure: Some((e.state, e.action)),
        }),
    }
}

/// One focal ordering key; lower is extracted first.
#[pyfunction]
#[pyo3(signature = (kind, acc, action_count, log_likelihood, last_edge_prob,
                    n_pref, n_nonpref, rank_sum, last_rank, f))]
#[allow(clippy::too_many_arguments)]
fn focal_key(
    kind: &str,
    acc: f64,
    action_count: usize,
    log_likelihood: f64,
    last_edge_prob: f64,
    n_pref: u32,
    n_nonpref: u32,
    rank_sum: u64,
    last_rank: u32,
    f: f64,
) -> PyResult<f64> {
    let kind = focal_search::FocalKind::parse(kind)
        .ok_or_else(|| value_err(format!("unknown focal kind {kind:?}")))?;
    let config = FocalConfig::new(kind, acc, action_count);
    let annotation = focal_search::FocalAnnotation {
        log_likelihood,
        last_edge_prob,
        preferred_edges: n_pref,
        nonpreferred_edges: n_nonpref,
        rank_sum,
        last_rank,
    };
    Ok(focal_search::focal_key(&config, &annotation, f))
}

/// `acc^n_pref * ((1 - acc) / alpha)^n_nonpref`.
#[pyfunction]
fn prefix_probability(n_pref: u32, n_nonpref: u32, acc: f64, alpha: usize) -> f64 {
    let annotation = focal_search::FocalAnnotation {
        log_likelihood: 0.0,
        last_edge_prob: 1.0,
        preferred_edges: n_pref,
        nonpreferred_edges: n_nonpref,
        rank_sum: 0,
        last_rank: 0,
    };
    focal_search::prefix_probability(&annotation, acc, alpha)
}

#[pyfunction]
fn disc1_coefficient(acc: f64, alpha: usize) -> f64 {
    focal_search::disc1_coefficient(acc, alpha)
}

#[pyfunction]
fn focal_kinds() -> Vec<&'static str> {
    focal_search::FocalKind::ALL.iter().map(|k| k.name()).collect()
}

/// Feedforward network in the "MLP1" container.
#[pyclass]
struct MlpModel {
    inner: CoreMlp,
}

#[pymethods]
impl MlpModel {
    /// Build from `(weights_2d, bias, activation)` triples; activation is
    /// "identity" or "relu". The final layer output is softmaxed at
    /// inference time.
    #[staticmethod]
    fn from_layers(layers: Vec<(Vec<Vec<f64>>, Vec<f64>, String)>) -> PyResult<Self> {
        let mut built = Vec::with_capacity(layers.len());
        for (weights, bias, activation) in layers {
            let rows = weights.len();
            let cols = weights.first().map_or(0, |r| r.len());
            if weights.iter().any(|r| r.len() != cols) {
                return Err(value_err("ragged weight matrix"));
            }
            let activation = match activation.as_str() {
                "identity" => Activation::Identity,
                "relu" => Activation::Relu,
                other => return Err(value_err(format!("unknown activation {other:?}"))),
            };
            built.push(Layer {
                weights: weights.into_iter().flatten().collect(),
                bias,
                rows,
                cols,
                activation,
            });
        }
        Ok(MlpModel {
            inner: CoreMlp::new(built).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(MlpModel {
            inner: CoreMlp::load(path).map_err(io_err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(io_err)
    }

    fn infer(&self, input: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.infer(&input).map_err(value_err)
    }

    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }

    fn parameter_count(&self) -> usize {
        self.inner.parameter_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "MlpModel(input={}, output={}, parameters={})",
            self.inner.input_dim(),
            self.inner.output_dim(),
            self.inner.parameter_count()
        )
    }
}

#[pymodule]
fn focalsearch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Domain>()?;
    m.add_class::<CostTable>()?;
    m.add_class::<Policy>()?;
    m.add_class::<SearchResult>()?;
    m.add_class::<UnrollResult>()?;
    m.add_class::<MlpModel>()?;
    m.add_function(wrap_pyfunction!(build_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(make_policy, m)?)?;
    m.add_function(wrap_pyfunction!(measure_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(unroll, m)?)?;
    m.add_function(wrap_pyfunction!(focal_key, m)?)?;
    m.add_function(wrap_pyfunction!(prefix_probability, m)?)?;
    m.add_function(wrap_pyfunction!(disc1_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(focal_kinds, m)?)?;
    Ok(())
}
