//! Stochastic policies over the global action index set, the optimal-action
//! table derived from an exhaustive cost table, accuracy measurement, and
//! policy unrolling.

mod opt_table;
mod spt_file;
mod synthetic;

pub use opt_table::{build_opt_table, OptTable};
pub use spt_file::PolicyFileError;
pub use synthetic::{synthesize_policy, SyntheticPolicyTable};

use std::collections::HashMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::domain::{DomainAdapter, StateKey};

/// A per-state probability distribution over the whole action index set.
///
/// Rows are non-negative and sum to 1 within 1e-6. The policy is not
/// required to be well-defined: it may put mass on inapplicable actions.
pub trait StochasticPolicy: Send + Sync {
    fn action_count(&self) -> usize;

    /// Clear `out` and fill it with the `action_count()` scores for `state`.
    fn scores_into(&self, state: StateKey, out: &mut Vec<f64>);

    fn scores(&self, state: StateKey) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.action_count());
        self.scores_into(state, &mut out);
        out
    }
}

impl<P: StochasticPolicy + ?Sized> StochasticPolicy for &P {
    fn action_count(&self) -> usize {
        (**self).action_count()
    }
    fn scores_into(&self, state: StateKey, out: &mut Vec<f64>) {
        (**self).scores_into(state, out)
    }
}

/// Argmax action; ties broken by the lowest action index.
pub fn deterministic_action(policy: &dyn StochasticPolicy, state: StateKey) -> usize {
    let scores = policy.scores(state);
    argmax(&scores)
}

pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("state {0:#018x} has positive cost-to-go but no optimal action; cost table is inconsistent")]
    BellmanViolation(StateKey),
    #[error("accuracy sample is empty")]
    EmptySample,
    #[error("sample state {0:#018x} carries no optimal-action set")]
    InvalidSample(StateKey),
    #[error("policy synthesis needs at least two actions, domain exposes {0}")]
    UnsupportedDomain(usize),
    #[error("cost table domain {table:?} does not match domain {domain:?}")]
    DomainMismatch { table: String, domain: String },
}

/// Fraction of scored states where the argmax action belongs to the
/// optimal-action *set* (not merely the stored representative).
pub fn measure_accuracy(
    policy: &dyn StochasticPolicy,
    opt: &OptTable,
    sample: Option<&[StateKey]>,
) -> Result<f64, PolicyError> {
    let mut hits = 0usize;
    let mut total = 0usize;
    let mut check = |key: StateKey| -> Result<(), PolicyError> {
        let set = opt.opt_set(key).ok_or(PolicyError::InvalidSample(key))?;
        if set == 0 {
            return Err(PolicyError::InvalidSample(key));
        }
        let chosen = deterministic_action(policy, key);
        if set & (1u128 << chosen) != 0 {
            hits += 1;
        }
        total += 1;
        Ok(())
    };
    match sample {
        Some(keys) => {
            for &key in keys {
                check(key)?;
            }
        }
        None => {
            for &key in opt.scored_keys() {
                check(key)?;
            }
        }
    }
    if total == 0 {
        return Err(PolicyError::EmptySample);
    }
    Ok(hits as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnrollMode {
    /// Apply the argmax action at every step.
    Greedy,
    /// Draw each step's action from the policy distribution.
    Sample,
}

#[derive(Debug, Clone)]
pub struct Unroll {
    pub states: Vec<StateKey>,
    pub actions: Vec<usize>,
    pub reached_goal: bool,
}

impl Unroll {
    pub fn steps(&self) -> usize {
        self.actions.len()
    }
}

#[derive(Debug, Error)]
#[error("policy chose inapplicable action {action} in state {state:#018x}")]
pub struct UnrollError {
    pub state: StateKey,
    pub action: usize,
}

/// Repeatedly choose and apply policy actions for up to `k` steps, stopping
/// early on the goal and failing on an inapplicable choice.
pub fn unroll(
    policy: &dyn StochasticPolicy,
    domain: &dyn DomainAdapter,
    start: StateKey,
    k: usize,
    mode: UnrollMode,
    seed: u64,
) -> Result<Unroll, UnrollError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![start];
    let mut actions = Vec::new();
    let mut current = start;
    let mut scores = Vec::new();
    for _ in 0..k {
        if current == domain.goal() {
            break;
        }
        policy.scores_into(current, &mut scores);
        let action = match mode {
            UnrollMode::Greedy => argmax(&scores),
            UnrollMode::Sample => sample_index(&scores, &mut rng),
        };
        let next = domain
            .successor(current, action)
            .ok_or(UnrollError { state: current, action })?;
        actions.push(action);
        states.push(next);
        current = next;
    }
    Ok(Unroll {
        reached_goal: current == domain.goal(),
        states,
        actions,
    })
}

fn sample_index(scores: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = scores.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &s) in scores.iter().enumerate() {
        u -= s;
        if u <= 0.0 {
            return i;
        }
    }
    scores.len() - 1
}

/// A literal score-table policy, mostly for tests and hand-built graphs:
/// per-state rows with an optional default row for unlisted states.
#[derive(Debug, Clone)]
pub struct FixedPolicy {
    action_count: usize,
    rows: HashMap<StateKey, Vec<f64>>,
    default_row: Option<Vec<f64>>,
}

impl FixedPolicy {
    pub fn new(action_count: usize) -> Self {
        FixedPolicy {
            action_count,
            rows: HashMap::new(),
            default_row: None,
        }
    }

    /// The same distribution in every state.
    pub fn constant(row: Vec<f64>) -> Self {
        Self::validate(&row);
        FixedPolicy {
            action_count: row.len(),
            rows: HashMap::new(),
            default_row: Some(row),
        }
    }

    pub fn set_row(&mut self, state: StateKey, row: Vec<f64>) {
        assert_eq!(row.len(), self.action_count);
        Self::validate(&row);
        self.rows.insert(state, row);
    }

    fn validate(row: &[f64]) {
        assert!(row.iter().all(|&p| p >= 0.0), "negative score");
        let sum: f64 = row.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-6, "row sums to {sum}, not 1");
    }
}

impl StochasticPolicy for FixedPolicy {
    fn action_count(&self) -> usize {
        self.action_count
    }

    fn scores_into(&self, state: StateKey, out: &mut Vec<f64>) {
        out.clear();
        let row = self
            .rows
            .get(&state)
            .or(self.default_row.as_ref())
            .unwrap_or_else(|| panic!("fixed policy has no row for state {state:#018x}"));
        out.extend_from_slice(row);
    }
}
