//! Preferred-operator A*: two open lists both ordered by f = g + h. The
//! successor reached through the policy's argmax action goes to the
//! preferred list, all others to the regular one, and extraction always
//! drains preferred first. Complete, but carries no suboptimality bound.

use std::time::Instant;

use crate::domain::{DomainAdapter, StateKey};
use crate::focal_heuristics::FocalAnnotation;
use crate::policy::{argmax, StochasticPolicy};

use super::queue::DualOpenList;
use super::{
    reconstruct_path, NodeRecord, NodeTable, SearchLimits, SearchResult, SearchStatus,
};

pub fn preferred_astar(
    domain: &dyn DomainAdapter,
    start: StateKey,
    policy: &dyn StochasticPolicy,
    limits: &SearchLimits,
) -> SearchResult {
    assert_eq!(
        policy.action_count(),
        domain.action_count(),
        "policy and domain disagree on the action set"
    );
    let started = Instant::now();
    let goal = domain.goal();

    let mut nodes = NodeTable::new();
    let mut open = DualOpenList::new();
    let h0 = domain.heuristic(start);
    nodes.insert(
        start,
        NodeRecord {
            g: 0.0,
            h: h0,
            f: h0,
            parent: None,
            action_in: None,
            annotation: FocalAnnotation::root(),
        },
    );
    open.upsert(start, h0, 0.0, false);

    let mut expansions = 0u64;
    let mut generations = 0u64;
    let mut g_improvements = 0u64;
    let mut f_last = h0;
    let mut scores: Vec<f64> = Vec::new();

    let (status, cost, path) = loop {
        if expansions >= limits.max_expansions {
            break (SearchStatus::ExpansionLimit, None, None);
        }
        if started.elapsed().as_secs_f64() > limits.wall_cap_seconds {
            break (SearchStatus::Timeout, None, None);
        }
        let Some((key, f)) = open.pop() else {
            break (SearchStatus::Exhausted, None, None);
        };
        f_last = f;
        expansions += 1;
        if key == goal {
            let path = reconstruct_path(&nodes, key).expect("parent chain intact");
            let cost = path.replay_cost(domain).expect("recorded edges are valid");
            debug_assert!(cost <= nodes[&key].g + super::BOUND_EPS);
            break (SearchStatus::Solved, Some(cost), Some(path));
        }
        let parent_g = nodes[&key].g;
        policy.scores_into(key, &mut scores);
        let preferred_action = argmax(&scores);
        for action in domain.applicable_actions(key) {
            let child = domain.successor(key, action).expect("applicable action");
            generations += 1;
            let cost_child = parent_g + domain.edge_cost(key, action);
            let h = match nodes.get(&child) {
                Some(existing) => {
                    if cost_child >= existing.g {
                        continue;
                    }
                    g_improvements += 1;
                    existing.h
                }
                None => domain.heuristic(child),
            };
            let f_child = cost_child + h;
            nodes.insert(
                child,
                NodeRecord {
                    g: cost_child,
                    h,
                    f: f_child,
                    parent: Some(key),
                    action_in: Some(action),
                    annotation: FocalAnnotation::root(),
                },
            );
            open.upsert(child, f_child, cost_child, action == preferred_action);
        }
    };

    SearchResult {
        status,
        path,
        cost,
        expansions,
        generations,
        wall_seconds: started.elapsed().as_secs_f64(),
        // No suboptimality guarantee.
        bound_w: f64::INFINITY,
        f_min_at_termination: f_last,
        stale_pops: open.stale_pops,
        g_improvements,
        solution_annotation: None,
        f_min_trace: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::PancakeDomain;
    use crate::policy::FixedPolicy;

    #[test]
    fn identity_instance_costs_zero() {
        let d = PancakeDomain::new(5);
        let p = FixedPolicy::constant(vec![0.25; 4]);
        let r = preferred_astar(&d, d.goal(), &p, &SearchLimits::default());
        assert_eq!(r.status, SearchStatus::Solved);
        assert_eq!(r.cost, Some(0.0));
        assert_eq!(r.expansions, 1);
        assert!(r.bound_w.is_infinite());
    }

    #[test]
    fn misleading_policy_still_terminates_with_the_goal() {
        // Mass concentrated on the longest flip everywhere: the preferred
        // list keeps recycling, completeness comes from the regular list.
        let d = PancakeDomain::new(4);
        let mut row = vec![0.05; 3];
        row[2] = 0.9;
        let p = FixedPolicy::constant(row);
        let s = d.parse_state("2 4 1 3").unwrap();
        let r = preferred_astar(&d, s, &p, &SearchLimits::default());
        assert_eq!(r.status, SearchStatus::Solved);
        assert!(r.cost.unwrap() >= 1.0);
    }
}
