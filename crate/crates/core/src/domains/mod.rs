//! Built-in domains and the string-id factory used by the CLI, the bench
//! harness, and the Python bindings.

pub mod blocks;
pub mod explicit;
pub mod pancake;
pub mod tile;

use std::sync::Arc;

use thiserror::Error;

use crate::domain::DomainAdapter;

pub use blocks::BlocksDomain;
pub use explicit::ExplicitGraph;
pub use pancake::PancakeDomain;
pub use tile::TileDomain;

#[derive(Debug, Error)]
#[error("unknown domain {0:?}; valid: tile8, tile15, pancake<2..=15> (e.g. pancake9), blocks<2..=13> (e.g. blocks8)")]
pub struct UnknownDomain(pub String);

/// Build a domain from its CLI-facing identifier.
pub fn make_domain(id: &str) -> Result<Arc<dyn DomainAdapter>, UnknownDomain> {
    match id {
        "tile8" => return Ok(Arc::new(TileDomain::new(3))),
        "tile15" => return Ok(Arc::new(TileDomain::new(4))),
        _ => {}
    }
    if let Some(n) = id.strip_prefix("pancake").and_then(|s| s.parse::<usize>().ok()) {
        if (2..=15).contains(&n) {
            return Ok(Arc::new(PancakeDomain::new(n)));
        }
    }
    if let Some(b) = id.strip_prefix("blocks").and_then(|s| s.parse::<usize>().ok()) {
        if (2..=13).contains(&b) {
            return Ok(Arc::new(BlocksDomain::new(b)));
        }
    }
    Err(UnknownDomain(id.to_string()))
}

/// The bundled 100 classic 15-puzzle benchmark permutations.
pub fn korf_instances() -> Vec<&'static str> {
    include_str!("../../data/korf100.txt")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .collect()
}

/// Published optimal costs for the bundled instances, used only for
/// suboptimality reporting, never as search input.
pub fn korf_optimal_costs() -> Vec<u32> {
    include_str!("../../data/korf100_opt.txt")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse().expect("korf100_opt.txt: malformed cost"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factory_knows_the_benchmark_domains() {
        for id in ["tile8", "tile15", "pancake9", "blocks8"] {
            assert_eq!(make_domain(id).unwrap().id(), id);
        }
        assert!(make_domain("sokoban").is_err());
        assert!(make_domain("pancake1").is_err());
    }

    #[test]
    fn korf_data_is_complete_and_solvable() {
        let instances = korf_instances();
        let costs = korf_optimal_costs();
        assert_eq!(instances.len(), 100);
        assert_eq!(costs.len(), 100);
        let d = TileDomain::new(4);
        for (i, text) in instances.iter().enumerate() {
            let key = d
                .parse_state(text)
                .unwrap_or_else(|e| panic!("instance {}: {e}", i + 1));
            // The admissible heuristic can never exceed the published cost.
            assert!(
                d.heuristic(key) <= costs[i] as f64,
                "instance {}: h = {} > published {}",
                i + 1,
                d.heuristic(key),
                costs[i]
            );
        }
    }
}
