//! Property tests over randomly drawn inputs.

use proptest::prelude::*;

use focal_search::domains::PancakeDomain;
use focal_search::policy::{build_opt_table, synthesize_policy};
use focal_search::search::reverse_dijkstra;
use focal_search::{
    focal_key, prefix_probability, DomainAdapter, FocalAnnotation, FocalConfig, FocalKind,
    StochasticPolicy,
};

fn annotation(pref: u32, nonpref: u32) -> FocalAnnotation {
    FocalAnnotation {
        log_likelihood: 0.0,
        last_edge_prob: 1.0,
        preferred_edges: pref,
        nonpreferred_edges: nonpref,
        rank_sum: 0,
        last_rank: 0,
    }
}

proptest! {
    /// Lower disc1 key always means higher modeled prefix probability,
    /// whatever the accuracy and branching.
    #[test]
    fn disc1_duality_holds_for_random_parameters(
        acc in 0.01f64..0.99,
        alpha in 1usize..200,
        a_pref in 0u32..60, a_nonpref in 0u32..60,
        b_pref in 0u32..60, b_nonpref in 0u32..60,
    ) {
        let config = FocalConfig::new(FocalKind::Disc1, acc, alpha + 1);
        let a = annotation(a_pref, a_nonpref);
        let b = annotation(b_pref, b_nonpref);
        let (ka, kb) = (focal_key(&config, &a, 1.0), focal_key(&config, &b, 1.0));
        let (pa, pb) = (
            prefix_probability(&a, acc, alpha),
            prefix_probability(&b, acc, alpha),
        );
        if ka < kb {
            prop_assert!(pa > pb, "key {ka} < {kb} but p {pa} <= {pb}");
        }
    }

    /// Prefix flips are involutions on arbitrary stacks.
    #[test]
    fn pancake_flips_are_involutions(
        n in 3usize..10,
        seed in 0u64..1000,
    ) {
        use rand::prelude::*;
        let d = PancakeDomain::new(n);
        let mut stack: Vec<u8> = (1..=n as u8).collect();
        stack.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let key = d.parse_state(
            &stack.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
        ).unwrap();
        for a in 0..d.action_count() {
            let t = d.successor(key, a).unwrap();
            prop_assert_eq!(d.successor(t, a), Some(key));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Every synthesized row is a distribution, for random targets/seeds.
    #[test]
    fn synthetic_rows_are_stochastic(
        target in 0.0f64..1.0,
        seed in 0u64..1_000_000,
    ) {
        let d = PancakeDomain::new(4);
        let costs = reverse_dijkstra(&d, usize::MAX).unwrap();
        let opt = build_opt_table(&d, &costs, seed).unwrap();
        let table = synthesize_policy(&opt, &d, target, seed).unwrap();
        for &key in table.keys() {
            let row = table.scores(key);
            prop_assert!(row.iter().all(|&p| p >= 0.0));
            let sum: f64 = row.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-6, "row sums to {}", sum);
        }
    }
}
