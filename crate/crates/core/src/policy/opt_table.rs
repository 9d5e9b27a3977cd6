//! Optimal-action bookkeeping over an exhaustively solved state space.

use std::collections::HashMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::domain::{DomainAdapter, StateKey};
use crate::policy::PolicyError;
use crate::search::CostTable;

const COST_EPS: f64 = 1e-9;

/// For every reachable state: the set of actions that start an optimal path
/// to the goal (as a bitmask over the action index set) plus one stored
/// representative. The goal carries an empty set and no representative; it
/// is excluded from accuracy denominators.
#[derive(Debug)]
pub struct OptTable {
    sets: HashMap<StateKey, u128>,
    choices: HashMap<StateKey, u8>,
    keys: Vec<StateKey>,
    scored_keys: Vec<StateKey>,
}

impl OptTable {
    /// Bitmask of optimal actions, `Some(0)` for the goal.
    pub fn opt_set(&self, state: StateKey) -> Option<u128> {
        self.sets.get(&state).copied()
    }

    /// The stored representative optimal action.
    pub fn opt_choice(&self, state: StateKey) -> Option<usize> {
        self.choices.get(&state).map(|&a| a as usize)
    }

    /// All covered states, ascending.
    pub fn keys(&self) -> &[StateKey] {
        &self.keys
    }

    /// States with a non-empty optimal-action set, ascending.
    pub fn scored_keys(&self) -> &[StateKey] {
        &self.scored_keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// Derive the optimal-action table from an exhaustive cost table via the
/// one-step test `h*(s) = c(s, a) + h*(succ(s, a))`. The representative is
/// drawn uniformly from the set under `seed`.
pub fn build_opt_table(
    domain: &dyn DomainAdapter,
    costs: &CostTable,
    seed: u64,
) -> Result<OptTable, PolicyError> {
    if domain.action_count() > 128 {
        return Err(PolicyError::UnsupportedDomain(domain.action_count()));
    }
    if costs.domain_id() != domain.id() {
        return Err(PolicyError::DomainMismatch {
            table: costs.domain_id().to_string(),
            domain: domain.id().to_string(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys: Vec<StateKey> = costs.keys().to_vec();
    let mut sets = HashMap::with_capacity(keys.len());
    let mut choices = HashMap::with_capacity(keys.len());
    let mut scored_keys = Vec::with_capacity(keys.len());
    for &key in &keys {
        let h_star = costs.get(key).expect("key from the table");
        if key == domain.goal() {
            sets.insert(key, 0u128);
            continue;
        }
        let mut mask = 0u128;
        for a in domain.applicable_actions(key) {
            let succ = domain.successor(key, a).expect("applicable action");
            if let Some(h_succ) = costs.get(succ) {
                if (h_star - (domain.edge_cost(key, a) + h_succ)).abs() <= COST_EPS {
                    mask |= 1u128 << a;
                }
            }
        }
        if mask == 0 {
            return Err(PolicyError::BellmanViolation(key));
        }
        let pick = {
            let members: Vec<u32> = (0..128).filter(|&a| mask & (1u128 << a) != 0).collect();
            members[rng.random_range(0..members.len())]
        };
        sets.insert(key, mask);
        choices.insert(key, pick as u8);
        scored_keys.push(key);
    }
    Ok(OptTable {
        sets,
        choices,
        keys,
        scored_keys,
    })
}
