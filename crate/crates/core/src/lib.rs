//! Bounded-suboptimal search guided by stochastic policies.
//!
//! The crate bundles:
//!
//! - a pluggable search-graph interface ([`domain::DomainAdapter`]) with
//!   three built-in benchmark domains (sliding tile with linear conflicts,
//!   pancake sorting with the gap heuristic, blocks world with h_max);
//! - weighted A*, focal search with seven policy-derived focal orderings,
//!   preferred-operator A*, and the exhaustive reverse Dijkstra oracle;
//! - synthetic stochastic policies generated to a target accuracy, plus a
//!   small feedforward-network loader for externally trained policies;
//! - a sweep harness and CLI that reproduce the benchmark protocol and
//!   emit deterministic CSV.

pub mod bench;
pub mod cli;
pub mod domain;
pub mod domains;
pub mod focal_heuristics;
pub mod neural;
pub mod policy;
pub mod search;

pub use domain::{DomainAdapter, ParseError, StateKey};
pub use focal_heuristics::{
    annotate_child, disc1_coefficient, focal_key, prefix_probability, FocalAnnotation,
    FocalConfig, FocalKind,
};
pub use policy::{
    build_opt_table, deterministic_action, measure_accuracy, synthesize_policy, unroll,
    FixedPolicy, OptTable, StochasticPolicy, SyntheticPolicyTable, Unroll, UnrollMode,
};
pub use search::{
    focal_search, preferred_astar, reconstruct_path, reverse_dijkstra, weighted_astar, CostTable,
    Path, SearchLimits, SearchResult, SearchStatus,
};
