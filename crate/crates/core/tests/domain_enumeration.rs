//! Exhaustive structural checks over the three benchmark domains.

use std::collections::{HashSet, VecDeque};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use focal_search::domains::{BlocksDomain, PancakeDomain, TileDomain};
use focal_search::search::reverse_dijkstra;
use focal_search::{DomainAdapter, StateKey};

fn forward_component(domain: &dyn DomainAdapter, from: StateKey) -> HashSet<StateKey> {
    let mut seen = HashSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(s) = queue.pop_front() {
        for a in domain.applicable_actions(s) {
            let t = domain.successor(s, a).unwrap();
            if seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    seen
}

#[test]
fn blocksworld_reverse_enumeration_matches_forward() {
    let d = BlocksDomain::new(8);
    let reverse = reverse_dijkstra(&d, usize::MAX).unwrap();
    assert_eq!(reverse.len(), 695_417);
    let forward = forward_component(&d, d.goal());
    assert_eq!(forward.len(), reverse.len());
    for &k in reverse.keys() {
        assert!(forward.contains(&k));
    }
}

#[test]
fn blocksworld_involution_audit_over_sampled_states() {
    let d = BlocksDomain::new(8);
    let table = reverse_dijkstra(&d, usize::MAX).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let keys = table.keys();
    for i in rand::seq::index::sample(&mut rng, keys.len(), 10_000) {
        let s = keys[i];
        for a in d.applicable_actions(s) {
            let t = d.successor(s, a).unwrap();
            // Every blocks action has a grounded inverse: pick-up <->
            // put-down, stack <-> unstack.
            let b = 8;
            let inverse = if a < b {
                b + a
            } else if a < 2 * b {
                a - b
            } else if a < 2 * b + b * (b - 1) {
                a + b * (b - 1)
            } else {
                a - b * (b - 1)
            };
            assert_eq!(d.successor(t, inverse), Some(s));
        }
    }
}

#[test]
fn tile_heuristic_is_consistent_across_all_edges() {
    let d = TileDomain::new(3);
    let table = reverse_dijkstra(&d, usize::MAX).unwrap();
    for &s in table.keys() {
        let hs = d.heuristic(s);
        for a in d.applicable_actions(s) {
            let t = d.successor(s, a).unwrap();
            assert!(
                (hs - d.heuristic(t)).abs() <= 1.0 + 1e-9,
                "inconsistent edge {s:#x} -> {t:#x}"
            );
        }
    }
}

#[test]
fn gap_heuristic_is_consistent_across_all_edges() {
    let d = PancakeDomain::new(8);
    let table = reverse_dijkstra(&d, usize::MAX).unwrap();
    for &s in table.keys() {
        let hs = d.heuristic(s);
        for a in d.applicable_actions(s) {
            let t = d.successor(s, a).unwrap();
            assert!((hs - d.heuristic(t)).abs() <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn tiny_pancake_admissibility_by_brute_force() {
    // All 3! states: the gap count never exceeds the true distance.
    let d = PancakeDomain::new(3);
    let table = reverse_dijkstra(&d, usize::MAX).unwrap();
    assert_eq!(table.len(), 6);
    for &s in table.keys() {
        assert!(d.heuristic(s) <= table.get(s).unwrap());
    }
}

#[test]
fn successor_enumeration_is_stable() {
    let d = BlocksDomain::new(8);
    let table = reverse_dijkstra(&d, usize::MAX).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in rand::seq::index::sample(&mut rng, table.len(), 2_000) {
        let s = table.keys()[i];
        let first = d.applicable_actions(s);
        assert!(first.windows(2).all(|w| w[0] < w[1]), "ascending action order");
        assert_eq!(first, d.applicable_actions(s), "stable across calls");
        // Distinct applicable actions must reach distinct successors.
        let succs: HashSet<StateKey> = first.iter().map(|&a| d.successor(s, a).unwrap()).collect();
        assert_eq!(succs.len(), first.len());
    }
}

#[test]
fn tile15_korf_instances_parse_against_the_bundled_costs() {
    let d = TileDomain::new(4);
    let instances = focal_search::domains::korf_instances();
    let costs = focal_search::domains::korf_optimal_costs();
    // Heuristic sanity on the first bundled instance: admissible and
    // nontrivial for a 57-cost start.
    let first = d.parse_state(instances[0]).unwrap();
    let h = d.heuristic(first);
    assert!(h <= costs[0] as f64);
    assert!(h >= 30.0, "linear conflicts should see most of the distance");
}
