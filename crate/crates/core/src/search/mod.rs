//! Search algorithms over [`DomainAdapter`] graphs: weighted A*, focal
//! search with dual queue maintenance, preferred-operator A*, and the
//! exhaustive reverse Dijkstra used as the optimality oracle.

mod dijkstra;
mod focal;
mod prefastar;
pub mod queue;
mod wastar;

pub use dijkstra::{reverse_dijkstra, CostTable, OracleError};
pub use focal::focal_search;
pub use prefastar::preferred_astar;
pub use wastar::weighted_astar;

use std::collections::HashMap;

use thiserror::Error;

use crate::domain::{DomainAdapter, StateKey};
use crate::focal_heuristics::FocalAnnotation;

/// Absolute tolerance for every bound comparison. Costs in the bundled
/// domains are small integers; the tolerance only guards float noise from
/// derived quantities.
pub const BOUND_EPS: f64 = 1e-9;

/// Resource caps for one run, plus an opt-in validation mode that
/// cross-checks queue invariants at every extraction (slow; for tests).
#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    pub max_expansions: u64,
    pub wall_cap_seconds: f64,
    pub audit: bool,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_expansions: 10_000_000,
            wall_cap_seconds: 300.0,
            audit: false,
        }
    }
}

impl SearchLimits {
    pub fn with_expansions(max_expansions: u64) -> Self {
        SearchLimits {
            max_expansions,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Solved,
    Exhausted,
    Timeout,
    ExpansionLimit,
}

impl std::fmt::Display for SearchStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SearchStatus::Solved => "solved",
            SearchStatus::Exhausted => "exhausted",
            SearchStatus::Timeout => "timeout",
            SearchStatus::ExpansionLimit => "expansion-limit",
        })
    }
}

/// A concrete state/action walk; `actions[i]` leads from `states[i]` to
/// `states[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub states: Vec<StateKey>,
    pub actions: Vec<usize>,
}

impl Path {
    pub fn edge_count(&self) -> usize {
        self.actions.len()
    }

    /// Re-derive the path cost by replaying it through the domain.
    pub fn replay_cost(&self, domain: &dyn DomainAdapter) -> Option<f64> {
        let mut cost = 0.0;
        for (i, &a) in self.actions.iter().enumerate() {
            let next = domain.successor(self.states[i], a)?;
            if next != self.states[i + 1] {
                return None;
            }
            cost += domain.edge_cost(self.states[i], a);
        }
        Some(cost)
    }
}

/// Per-state search bookkeeping. `f` is the open-queue key (`g + h` for
/// focal search and plain A*, `g + w*h` for weighted A*); `h` is cached so
/// reopened nodes never re-evaluate the heuristic.
#[derive(Debug, Clone, Copy)]
pub struct NodeRecord {
    pub g: f64,
    pub h: f64,
    pub f: f64,
    pub parent: Option<StateKey>,
    pub action_in: Option<usize>,
    pub annotation: FocalAnnotation,
}

pub type NodeTable = HashMap<StateKey, NodeRecord>;

#[derive(Debug, Error)]
pub enum CorruptionError {
    #[error("broken parent chain: state {0:#018x} has no node record")]
    MissingRecord(StateKey),
    #[error("parent chain does not terminate (cycle through {0:#018x})")]
    CyclicParents(StateKey),
}

/// Walk recorded parent links back from `terminal` and return the root-to-
/// terminal path.
pub fn reconstruct_path(nodes: &NodeTable, terminal: StateKey) -> Result<Path, CorruptionError> {
    let mut states = vec![terminal];
    let mut actions = Vec::new();
    let mut cursor = terminal;
    loop {
        let record = nodes
            .get(&cursor)
            .ok_or(CorruptionError::MissingRecord(cursor))?;
        match (record.parent, record.action_in) {
            (Some(parent), Some(action)) => {
                // A loop-free chain has at most nodes.len() - 1 edges.
                if actions.len() >= nodes.len() {
                    return Err(CorruptionError::CyclicParents(cursor));
                }
                actions.push(action);
                states.push(parent);
                cursor = parent;
            }
            _ => break,
        }
    }
    states.reverse();
    actions.reverse();
    Ok(Path { states, actions })
}

/// Outcome of one search run.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub status: SearchStatus,
    pub path: Option<Path>,
    pub cost: Option<f64>,
    pub expansions: u64,
    pub generations: u64,
    pub wall_seconds: f64,
    /// The suboptimality guarantee the run carries; infinity for algorithms
    /// without one.
    pub bound_w: f64,
    pub f_min_at_termination: f64,
    /// Stale entries discarded while extracting from the primary queue.
    pub stale_pops: u64,
    /// Number of times an already-known state was reached more cheaply.
    pub g_improvements: u64,
    /// Path statistics of the solved node (focal search only).
    pub solution_annotation: Option<FocalAnnotation>,
    /// Loop-head f-min samples; recorded only under `SearchLimits::audit`.
    pub f_min_trace: Vec<f64>,
}

impl SearchResult {
    pub fn solved(&self) -> bool {
        self.status == SearchStatus::Solved
    }
}
