//! The pluggable search-graph interface shared by every search algorithm.
//!
//! A domain is a labeled graph: every state has an ordered set of applicable
//! actions drawn from a fixed global index set `0..action_count()`, and each
//! applicable action leads to exactly one successor. States are carried
//! around as compact 64-bit keys produced by the domain's own codec, which
//! keeps node tables, cost tables and policy tables uniform across domains.

use std::fmt;

use thiserror::Error;

/// Compact encoded state. Each domain packs its state into 64 bits.
pub type StateKey = u64;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("instance rejected: {0}")]
    Unsolvable(String),
}

impl ParseError {
    pub fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}

/// A search graph with a distinguished goal state and an admissible heuristic.
///
/// Contract:
/// - for a fixed `(state, action)` pair the successor is unique, and distinct
///   applicable actions of a state lead to distinct successors;
/// - `heuristic(goal()) == 0` and `heuristic(s) <= h*(s)` wherever `h*` is
///   finite;
/// - `edge_cost >= 0`;
/// - `predecessors` is only required by the exhaustive reverse search and
///   must enumerate exactly the `(p, a)` pairs with `successor(p, a) == s`.
pub trait DomainAdapter: Send + Sync {
    /// Short identifier, e.g. `"tile8"`, `"pancake9"`, `"blocks8"`.
    fn id(&self) -> &str;

    /// Size of the global action index set `|A|`.
    fn action_count(&self) -> usize;

    fn goal(&self) -> StateKey;

    /// Applicable action indices in ascending order.
    fn applicable_actions(&self, state: StateKey) -> Vec<usize>;

    /// `None` when the action is inapplicable in `state`.
    fn successor(&self, state: StateKey, action: usize) -> Option<StateKey>;

    fn edge_cost(&self, _state: StateKey, _action: usize) -> f64 {
        1.0
    }

    /// All `(p, a)` with `successor(p, a) == state`.
    fn predecessors(&self, state: StateKey) -> Vec<(StateKey, usize)>;

    fn heuristic(&self, state: StateKey) -> f64;

    fn parse_state(&self, text: &str) -> Result<StateKey, ParseError>;

    fn format_state(&self, state: StateKey) -> String;
}

/// Wrapper so `StateKey`s print in a stable, greppable form.
pub struct DisplayKey(pub StateKey);

impl fmt::Display for DisplayKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#018x}", self.0)
    }
}
