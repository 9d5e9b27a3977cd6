//! Cross-module search behaviors checked against the exhaustive oracle.

use std::sync::{Arc, LazyLock};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use focal_search::domains::{PancakeDomain, TileDomain};
use focal_search::policy::{build_opt_table, synthesize_policy, OptTable, SyntheticPolicyTable};
use focal_search::search::{
    focal_search, preferred_astar, reverse_dijkstra, weighted_astar, CostTable, SearchLimits,
    SearchStatus, BOUND_EPS,
};
use focal_search::{
    deterministic_action, unroll, DomainAdapter, FocalConfig, FocalKind, StateKey, UnrollMode,
};

struct Fixture {
    tile: Arc<TileDomain>,
    tile_oracle: CostTable,
    tile_opt: OptTable,
    pancake: Arc<PancakeDomain>,
    pancake_oracle: CostTable,
}

static FIX: LazyLock<Fixture> = LazyLock::new(|| {
    let tile = Arc::new(TileDomain::new(3));
    let tile_oracle = reverse_dijkstra(tile.as_ref(), usize::MAX).unwrap();
    let tile_opt = build_opt_table(tile.as_ref(), &tile_oracle, 1).unwrap();
    let pancake = Arc::new(PancakeDomain::new(7));
    let pancake_oracle = reverse_dijkstra(pancake.as_ref(), usize::MAX).unwrap();
    Fixture {
        tile,
        tile_oracle,
        tile_opt,
        pancake,
        pancake_oracle,
    }
});

fn sample_starts(oracle: &CostTable, goal: StateKey, n: usize, seed: u64) -> Vec<StateKey> {
    let pool: Vec<StateKey> = oracle.keys().iter().copied().filter(|&k| k != goal).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, pool.len(), n)
        .into_iter()
        .map(|i| pool[i])
        .collect()
}

#[test]
fn wastar_reproduces_a_known_oracle_cost() {
    let fix = &*FIX;
    // First state (in key order) whose exact cost-to-go is 14.
    let start = fix
        .tile_oracle
        .keys()
        .iter()
        .copied()
        .find(|&k| fix.tile_oracle.get(k) == Some(14.0))
        .expect("costs up to 31 exist");
    let r = weighted_astar(fix.tile.as_ref(), start, 1.0, &SearchLimits::default());
    assert_eq!(r.status, SearchStatus::Solved);
    assert_eq!(r.cost, Some(14.0));
}

#[test]
fn wastar_respects_its_bound_on_seeded_starts() {
    let fix = &*FIX;
    for &start in &sample_starts(&fix.tile_oracle, fix.tile.goal(), 100, 41) {
        let opt = fix.tile_oracle.get(start).unwrap();
        let r = weighted_astar(fix.tile.as_ref(), start, 1.5, &SearchLimits::default());
        assert_eq!(r.status, SearchStatus::Solved);
        assert!(r.cost.unwrap() <= 1.5 * opt + BOUND_EPS);
        assert!(r.cost.unwrap() >= opt - BOUND_EPS);
    }
}

#[test]
fn perfect_policy_focal_disc2_returns_the_zero_discrepancy_optimum() {
    let fix = &*FIX;
    let policy = synthesize_policy(&fix.tile_opt, fix.tile.as_ref(), 1.0, 5).unwrap();
    let config = FocalConfig::new(FocalKind::Disc2, policy.measured_acc, 4);
    for &start in &sample_starts(&fix.tile_oracle, fix.tile.goal(), 50, 42) {
        let opt = fix.tile_oracle.get(start).unwrap();
        let r = focal_search(
            fix.tile.as_ref(),
            start,
            1.5,
            &policy,
            &config,
            &SearchLimits::default(),
        );
        assert_eq!(r.status, SearchStatus::Solved);
        assert_eq!(r.cost, Some(opt), "perfect policy must reach the optimum");
        let annotation = r.solution_annotation.unwrap();
        assert_eq!(annotation.nonpreferred_edges, 0, "no discrepancies expected");
        // Recount discrepancies directly along the returned path.
        let path = r.path.unwrap();
        for (i, &action) in path.actions.iter().enumerate() {
            assert_eq!(
                action,
                deterministic_action(&policy, path.states[i]),
                "every edge must follow the policy"
            );
        }
    }
}

#[test]
fn focal_kinds_all_meet_the_pancake_bound() {
    let fix = &*FIX;
    let oracle = &fix.pancake_oracle;
    let opt_table = build_opt_table(fix.pancake.as_ref(), oracle, 2).unwrap();
    let policy = synthesize_policy(&opt_table, fix.pancake.as_ref(), 0.8, 9).unwrap();
    let starts = sample_starts(oracle, fix.pancake.goal(), 100, 43);
    for kind in FocalKind::ALL {
        let config = FocalConfig::new(kind, policy.measured_acc, fix.pancake.action_count());
        for &start in &starts {
            let opt = oracle.get(start).unwrap();
            let r = focal_search(
                fix.pancake.as_ref(),
                start,
                1.2,
                &policy,
                &config,
                &SearchLimits::default(),
            );
            assert_eq!(r.status, SearchStatus::Solved, "{kind}");
            assert!(
                r.cost.unwrap() <= 1.2 * opt + BOUND_EPS,
                "{kind} exceeded the bound: cost {} opt {opt}",
                r.cost.unwrap()
            );
        }
    }
}

#[test]
fn perfect_policy_prefastar_chases_straight_to_the_goal() {
    let fix = &*FIX;
    let policy = synthesize_policy(&fix.tile_opt, fix.tile.as_ref(), 1.0, 6).unwrap();
    for &start in &sample_starts(&fix.tile_oracle, fix.tile.goal(), 50, 44) {
        let opt = fix.tile_oracle.get(start).unwrap();
        let r = preferred_astar(fix.tile.as_ref(), start, &policy, &SearchLimits::default());
        assert_eq!(r.status, SearchStatus::Solved);
        assert_eq!(r.cost, Some(opt));
        assert_eq!(r.expansions, opt as u64 + 1, "one expansion per path node");
    }
}

// With an accurate policy the unbounded chase reaches the goal along the
// policy's (suboptimal) line while disc2 stays inside the bound; with an
// inaccurate one the preferred list keeps emptying and the search
// degenerates to plain A*, optimal but expansion-hungry. Both regimes are
// pinned by paired runs against the oracle.
#[test]
fn prefastar_trades_quality_for_speed_as_accuracy_grows() {
    let fix = &*FIX;
    let starts = sample_starts(&fix.tile_oracle, fix.tile.goal(), 100, 45);
    let paired = |acc: f64| {
        let policy = synthesize_policy(&fix.tile_opt, fix.tile.as_ref(), acc, 7).unwrap();
        let disc2 = FocalConfig::new(FocalKind::Disc2, policy.measured_acc, 4);
        let (mut pref_ratio, mut focal_ratio) = (0.0, 0.0);
        let (mut pref_exp, mut focal_exp) = (0u64, 0u64);
        for &start in &starts {
            let opt = fix.tile_oracle.get(start).unwrap();
            let pref =
                preferred_astar(fix.tile.as_ref(), start, &policy, &SearchLimits::default());
            let fs = focal_search(
                fix.tile.as_ref(),
                start,
                1.5,
                &policy,
                &disc2,
                &SearchLimits::default(),
            );
            assert_eq!(pref.status, SearchStatus::Solved);
            assert_eq!(fs.status, SearchStatus::Solved);
            assert!(fs.cost.unwrap() <= 1.5 * opt + BOUND_EPS);
            pref_ratio += pref.cost.unwrap() / opt;
            focal_ratio += fs.cost.unwrap() / opt;
            pref_exp += pref.expansions;
            focal_exp += fs.expansions;
        }
        (pref_ratio, focal_ratio, pref_exp, focal_exp)
    };
    let (pref_ratio, focal_ratio, pref_exp, focal_exp) = paired(0.9);
    assert!(
        pref_ratio > focal_ratio,
        "at 90% accuracy the chase returns worse solutions: {pref_ratio} vs {focal_ratio}"
    );
    assert!(pref_exp > focal_exp);
    let (pref_ratio, _, pref_exp, _) = paired(0.7);
    let mean = pref_ratio / starts.len() as f64;
    assert!(
        mean < 1.01,
        "at 70% the preferred list keeps draining and A* ordering wins out; mean was {mean}"
    );
    assert!(pref_exp > 10_000, "the A*-like regime pays in expansions");
}

#[test]
fn solved_paths_replay_through_the_domain() {
    let fix = &*FIX;
    let opt_table = build_opt_table(fix.pancake.as_ref(), &fix.pancake_oracle, 3).unwrap();
    let policy = synthesize_policy(&opt_table, fix.pancake.as_ref(), 0.9, 10).unwrap();
    let config = FocalConfig::new(FocalKind::Score2, policy.measured_acc, 6);
    for &start in &sample_starts(&fix.pancake_oracle, fix.pancake.goal(), 40, 46) {
        let r = focal_search(
            fix.pancake.as_ref(),
            start,
            1.5,
            &policy,
            &config,
            &SearchLimits::default(),
        );
        let path = r.path.expect("solved");
        assert_eq!(path.states.first(), Some(&start));
        assert_eq!(path.states.last(), Some(&fix.pancake.goal()));
        let replayed = path.replay_cost(fix.pancake.as_ref()).expect("valid actions");
        assert!((replayed - r.cost.unwrap()).abs() < 1e-9);
    }
}

#[test]
fn stale_extractions_never_exceed_g_improvements() {
    let fix = &*FIX;
    let opt_table = build_opt_table(fix.pancake.as_ref(), &fix.pancake_oracle, 4).unwrap();
    let policy = synthesize_policy(&opt_table, fix.pancake.as_ref(), 0.7, 11).unwrap();
    let config = FocalConfig::new(FocalKind::Disc1, policy.measured_acc, 6);
    for &start in &sample_starts(&fix.pancake_oracle, fix.pancake.goal(), 50, 47) {
        let r = focal_search(
            fix.pancake.as_ref(),
            start,
            1.5,
            &policy,
            &config,
            &SearchLimits::default(),
        );
        assert!(
            r.stale_pops <= r.g_improvements,
            "focal stale pops {} exceed g improvements {}",
            r.stale_pops,
            r.g_improvements
        );
        let w = weighted_astar(fix.pancake.as_ref(), start, 1.5, &SearchLimits::default());
        assert!(w.stale_pops <= w.g_improvements);
    }
}

#[test]
fn audited_tile_runs_hold_the_focal_invariant_and_monotone_f_min() {
    let fix = &*FIX;
    let policy = synthesize_policy(&fix.tile_opt, fix.tile.as_ref(), 0.8, 12).unwrap();
    let config = FocalConfig::new(FocalKind::Disc3, policy.measured_acc, 4);
    let limits = SearchLimits {
        audit: true,
        ..Default::default()
    };
    for &start in &sample_starts(&fix.tile_oracle, fix.tile.goal(), 10, 48) {
        let r = focal_search(fix.tile.as_ref(), start, 1.2, &policy, &config, &limits);
        assert_eq!(r.status, SearchStatus::Solved);
        // Linear conflicts is consistent, so f_min never decreases.
        for pair in r.f_min_trace.windows(2) {
            assert!(pair[0] <= pair[1] + BOUND_EPS);
        }
    }
}

#[test]
fn perfect_greedy_unroll_matches_the_oracle_distance() {
    let fix = &*FIX;
    let policy = synthesize_policy(&fix.tile_opt, fix.tile.as_ref(), 1.0, 13).unwrap();
    for &start in &sample_starts(&fix.tile_oracle, fix.tile.goal(), 25, 49) {
        let opt = fix.tile_oracle.get(start).unwrap() as usize;
        let u = unroll(
            &policy,
            fix.tile.as_ref(),
            start,
            opt,
            UnrollMode::Greedy,
            0,
        )
        .unwrap();
        assert!(u.reached_goal);
        assert_eq!(u.steps(), opt);
    }
}

#[test]
fn policy_file_round_trip_preserves_search_behavior() {
    let fix = &*FIX;
    let opt_table = build_opt_table(fix.pancake.as_ref(), &fix.pancake_oracle, 5).unwrap();
    let policy = synthesize_policy(&opt_table, fix.pancake.as_ref(), 0.9, 14).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.spt");
    policy.save(&path).unwrap();
    let loaded = SyntheticPolicyTable::load(&path).unwrap();
    let config = FocalConfig::new(FocalKind::Disc2, policy.measured_acc, 6);
    for &start in &sample_starts(&fix.pancake_oracle, fix.pancake.goal(), 20, 50) {
        let a = focal_search(
            fix.pancake.as_ref(),
            start,
            1.2,
            &policy,
            &config,
            &SearchLimits::default(),
        );
        let b = focal_search(
            fix.pancake.as_ref(),
            start,
            1.2,
            &loaded,
            &config,
            &SearchLimits::default(),
        );
        assert_eq!(a.cost, b.cost);
        assert_eq!(a.expansions, b.expansions);
    }
}
