//! A small adjacency-list domain for custom graphs.
//!
//! Useful for wiring up hand-built graphs in tests and experiments: states
//! are plain integers, edges carry explicit costs, and the heuristic is a
//! lookup table (zero where absent, which is trivially admissible).

use std::collections::HashMap;

use crate::domain::{DomainAdapter, ParseError, StateKey};

#[derive(Debug, Default)]
pub struct ExplicitGraph {
    id: String,
    action_count: usize,
    edges: HashMap<StateKey, Vec<(usize, StateKey, f64)>>,
    reverse: HashMap<StateKey, Vec<(StateKey, usize)>>,
    heuristic: HashMap<StateKey, f64>,
    goal: StateKey,
}

impl ExplicitGraph {
    pub fn new(id: impl Into<String>, action_count: usize, goal: StateKey) -> Self {
        ExplicitGraph {
            id: id.into(),
            action_count,
            goal,
            ..Default::default()
        }
    }

    /// Add edge `from --action/cost--> to`. Actions must be unique per state.
    pub fn add_edge(&mut self, from: StateKey, action: usize, to: StateKey, cost: f64) {
        assert!(action < self.action_count, "action index out of range");
        assert!(cost >= 0.0, "negative edge cost");
        let out = self.edges.entry(from).or_default();
        assert!(
            out.iter().all(|&(a, _, _)| a != action),
            "duplicate action {action} on state {from}"
        );
        out.push((action, to, cost));
        out.sort_by_key(|&(a, _, _)| a);
        self.reverse.entry(to).or_default().push((from, action));
    }

    pub fn set_heuristic(&mut self, state: StateKey, h: f64) {
        self.heuristic.insert(state, h);
    }

    /// A unit-cost line `0 -> 1 -> ... -> length` where action 0 advances.
    /// Remaining action indices are never applicable anywhere.
    pub fn chain(length: usize, action_count: usize) -> Self {
        let mut g = ExplicitGraph::new(format!("chain{length}"), action_count, length as StateKey);
        for s in 0..length as StateKey {
            g.add_edge(s, 0, s + 1, 1.0);
        }
        for s in 0..=length as StateKey {
            g.set_heuristic(s, (length as f64) - s as f64);
        }
        g
    }
}

impl DomainAdapter for ExplicitGraph {
    fn id(&self) -> &str {
        &self.id
    }

    fn action_count(&self) -> usize {
        self.action_count
    }

    fn goal(&self) -> StateKey {
        self.goal
    }

    fn applicable_actions(&self, state: StateKey) -> Vec<usize> {
        self.edges
            .get(&state)
            .map(|out| out.iter().map(|&(a, _, _)| a).collect())
            .unwrap_or_default()
    }

    fn successor(&self, state: StateKey, action: usize) -> Option<StateKey> {
        self.edges
            .get(&state)?
            .iter()
            .find(|&&(a, _, _)| a == action)
            .map(|&(_, to, _)| to)
    }

    fn edge_cost(&self, state: StateKey, action: usize) -> f64 {
        self.edges
            .get(&state)
            .and_then(|out| out.iter().find(|&&(a, _, _)| a == action))
            .map(|&(_, _, c)| c)
            .unwrap_or(f64::INFINITY)
    }

    fn predecessors(&self, state: StateKey) -> Vec<(StateKey, usize)> {
        self.reverse.get(&state).cloned().unwrap_or_default()
    }

    fn heuristic(&self, state: StateKey) -> f64 {
        self.heuristic.get(&state).copied().unwrap_or(0.0)
    }

    fn parse_state(&self, text: &str) -> Result<StateKey, ParseError> {
        text.trim()
            .parse()
            .map_err(|_| ParseError::syntax(1, 1, format!("expected integer state, got {text:?}")))
    }

    fn format_state(&self, state: StateKey) -> String {
        state.to_string()
    }
}
