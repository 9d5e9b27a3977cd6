//! Synthetic stochastic policies with a controllable target accuracy.
//!
//! For every state we draw `|A|` standard normals, softmax them, and sort
//! the resulting scores descending into `y_1 >= y_2 >= ... >= y_|A|`. With
//! probability `acc` the stored optimal action receives `y_1`; otherwise it
//! receives `y_j` (j >= 2) with probability proportional to `y_j`, the top
//! score goes to an action outside the optimal set, and everything else is
//! permuted uniformly at random. Scores may land on inapplicable actions by
//! design.
//!
//! Forcing the top score off the optimal *set* in the miss branch is what
//! pins the measured accuracy to the target: states often have several
//! optimal actions, and a uniformly placed top score would push measured
//! accuracy above the target by the chance of hitting one of them.

use std::collections::HashMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::domain::{DomainAdapter, StateKey};
use crate::policy::{argmax, OptTable, PolicyError, StochasticPolicy};

/// Dense per-state score rows over the action index set, in state-key order.
#[derive(Debug, Clone)]
pub struct SyntheticPolicyTable {
    domain_id: String,
    action_count: usize,
    keys: Vec<StateKey>,
    index: HashMap<StateKey, u32>,
    rows: Vec<f32>,
    pub seed: u64,
    pub target_acc: f64,
    pub measured_acc: f64,
}

impl SyntheticPolicyTable {
    pub(crate) fn from_parts(
        domain_id: String,
        action_count: usize,
        keys: Vec<StateKey>,
        rows: Vec<f32>,
        seed: u64,
        target_acc: f64,
        measured_acc: f64,
    ) -> Self {
        debug_assert_eq!(rows.len(), keys.len() * action_count);
        let index = keys
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, i as u32))
            .collect();
        SyntheticPolicyTable {
            domain_id,
            action_count,
            keys,
            index,
            rows,
            seed,
            target_acc,
            measured_acc,
        }
    }

    pub fn domain_id(&self) -> &str {
        &self.domain_id
    }

    pub fn state_count(&self) -> usize {
        self.keys.len()
    }

    /// Covered states, ascending.
    pub fn keys(&self) -> &[StateKey] {
        &self.keys
    }

    pub fn row(&self, state: StateKey) -> Option<&[f32]> {
        self.index.get(&state).map(|&i| {
            let start = i as usize * self.action_count;
            &self.rows[start..start + self.action_count]
        })
    }

    pub(crate) fn raw_rows(&self) -> &[f32] {
        &self.rows
    }

    /// `|A| - 1`, the disc1 spread parameter this table implies.
    pub fn alpha(&self) -> usize {
        self.action_count - 1
    }
}

impl StochasticPolicy for SyntheticPolicyTable {
    fn action_count(&self) -> usize {
        self.action_count
    }

    fn scores_into(&self, state: StateKey, out: &mut Vec<f64>) {
        let row = self
            .row(state)
            .unwrap_or_else(|| panic!("policy table {} has no row for state {state:#018x}", self.domain_id));
        out.clear();
        out.extend(row.iter().map(|&v| v as f64));
    }
}

/// Generate a synthetic policy over every state of `opt`, aiming at
/// `target_acc`, fully determined by `seed`. The stored `measured_acc` is
/// recomputed from the finished rows, not assumed.
pub fn synthesize_policy(
    opt: &OptTable,
    domain: &dyn DomainAdapter,
    target_acc: f64,
    seed: u64,
) -> Result<SyntheticPolicyTable, PolicyError> {
    let a = domain.action_count();
    if a < 2 {
        return Err(PolicyError::UnsupportedDomain(a));
    }
    assert!((0.0..=1.0).contains(&target_acc), "target accuracy out of [0,1]");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys: Vec<StateKey> = opt.keys().to_vec();
    let mut rows: Vec<f32> = vec![0.0; keys.len() * a];
    let mut logits = vec![0.0f64; a];
    let mut ys = vec![0.0f64; a];
    let mut leftover_scores: Vec<f64> = Vec::with_capacity(a);
    let mut leftover_actions: Vec<usize> = Vec::with_capacity(a);

    for (row_idx, &key) in keys.iter().enumerate() {
        for logit in logits.iter_mut() {
            *logit = rng.sample(StandardNormal);
        }
        softmax_into(&logits, &mut ys);
        ys.sort_by(|x, y| y.total_cmp(x));

        let out = &mut rows[row_idx * a..(row_idx + 1) * a];
        let mask = opt.opt_set(key).expect("key from the table");
        leftover_scores.clear();
        leftover_actions.clear();

        if mask == 0 {
            // Goal row: no optimal action exists, assign everything randomly.
            leftover_scores.extend_from_slice(&ys);
            leftover_actions.extend(0..a);
        } else {
            let a_opt = opt.opt_choice(key).expect("non-goal state");
            let correct = rng.random::<f64>() < target_acc;
            if correct {
                out[a_opt] = ys[0] as f32;
                leftover_scores.extend_from_slice(&ys[1..]);
                leftover_actions.extend((0..a).filter(|&x| x != a_opt));
            } else {
                // Give the optimal action y_j with probability y_j over the
                // tail, so lower ranks become geometrically less likely.
                let j = weighted_tail_pick(&ys, &mut rng);
                out[a_opt] = ys[j] as f32;
                let non_optimal: Vec<usize> =
                    (0..a).filter(|&x| mask & (1u128 << x) == 0).collect();
                if non_optimal.is_empty() {
                    // Every action is optimal; the state cannot be missed.
                    leftover_scores.extend(
                        ys.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &y)| y),
                    );
                    leftover_actions.extend((0..a).filter(|&x| x != a_opt));
                } else {
                    let top = non_optimal[rng.random_range(0..non_optimal.len())];
                    out[top] = ys[0] as f32;
                    leftover_scores.extend(
                        ys.iter()
                            .enumerate()
                            .filter(|&(i, _)| i != 0 && i != j)
                            .map(|(_, &y)| y),
                    );
                    leftover_actions.extend((0..a).filter(|&x| x != a_opt && x != top));
                }
            }
        }
        leftover_scores.shuffle(&mut rng);
        for (&action, &score) in leftover_actions.iter().zip(leftover_scores.iter()) {
            out[action] = score as f32;
        }
        debug_assert!({
            let sum: f64 = out.iter().map(|&v| v as f64).sum();
            (sum - 1.0).abs() <= 1e-6
        });
    }

    // Measure rather than trust the construction.
    let mut hits = 0usize;
    let mut scored = 0usize;
    for (row_idx, &key) in keys.iter().enumerate() {
        let mask = opt.opt_set(key).expect("key from the table");
        if mask == 0 {
            continue;
        }
        let row = &rows[row_idx * a..(row_idx + 1) * a];
        let row_f64: Vec<f64> = row.iter().map(|&v| v as f64).collect();
        if mask & (1u128 << argmax(&row_f64)) != 0 {
            hits += 1;
        }
        scored += 1;
    }
    let measured_acc = hits as f64 / scored.max(1) as f64;

    Ok(SyntheticPolicyTable::from_parts(
        domain.id().to_string(),
        a,
        keys,
        rows,
        seed,
        target_acc,
        measured_acc,
    ))
}

fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Pick an index in `1..len` with probability proportional to `ys[j]`.
fn weighted_tail_pick(ys: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let tail_sum: f64 = ys[1..].iter().sum();
    let mut u = rng.random::<f64>() * tail_sum;
    for (j, &y) in ys.iter().enumerate().skip(1) {
        u -= y;
        if u <= 0.0 {
            return j;
        }
    }
    ys.len() - 1
}
