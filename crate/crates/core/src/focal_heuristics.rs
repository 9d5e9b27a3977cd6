//! Path-dependent policy statistics and the focal ordering keys built from
//! them.
//!
//! Every node carries a [`FocalAnnotation`] accumulated edge by edge along
//! its current parent chain. All seven keys are min-is-better: the focal
//! queue is uniformly a min-queue, so score-style keys (which prefer high
//! likelihood) are negated.

use crate::domain::StateKey;
use crate::policy::{deterministic_action, StochasticPolicy};

/// Probabilities are floored before entering the log domain so that
/// underflowing softmax outputs cannot produce infinite keys.
pub const PROB_FLOOR: f64 = 1e-30;

/// Guard for the f-normalized keys at the degenerate start-equals-goal node
/// where f = 0.
const F_FLOOR: f64 = 1e-12;

/// Statistics of the path by which a node was generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalAnnotation {
    /// Sum of `ln max(pi(a_i, s_i), floor)` over the path's edges; never
    /// positive.
    pub log_likelihood: f64,
    /// Probability the policy assigned to the final edge; 1 at the root.
    pub last_edge_prob: f64,
    /// Edges where the action taken was the policy's argmax choice.
    pub preferred_edges: u32,
    /// Edges where it was not.
    pub nonpreferred_edges: u32,
    /// Sum of per-edge score ranks (the argmax action has rank 0).
    pub rank_sum: u64,
    /// Rank of the final edge's action; 0 iff that edge was preferred.
    pub last_rank: u32,
}

impl FocalAnnotation {
    pub fn root() -> Self {
        FocalAnnotation {
            log_likelihood: 0.0,
            last_edge_prob: 1.0,
            preferred_edges: 0,
            nonpreferred_edges: 0,
            rank_sum: 0,
            last_rank: 0,
        }
    }

    pub fn edge_count(&self) -> u32 {
        self.preferred_edges + self.nonpreferred_edges
    }

    /// Extend this annotation by one edge given the parent's score vector.
    /// `rank` is the action's position in the score vector sorted descending
    /// (ties broken by ascending action index).
    pub fn extend(&self, edge_prob: f64, rank: u32) -> Self {
        let p = edge_prob.max(PROB_FLOOR);
        FocalAnnotation {
            log_likelihood: self.log_likelihood + p.ln(),
            last_edge_prob: p,
            preferred_edges: self.preferred_edges + u32::from(rank == 0),
            nonpreferred_edges: self.nonpreferred_edges + u32::from(rank != 0),
            rank_sum: self.rank_sum + rank as u64,
            last_rank: rank,
        }
    }
}

/// Rank of `action` in `scores` sorted descending, ties by ascending index.
/// The action with rank 0 is exactly `deterministic_action`'s pick.
pub fn score_rank(scores: &[f64], action: usize) -> u32 {
    let sa = scores[action];
    scores
        .iter()
        .enumerate()
        .filter(|&(b, &sb)| sb > sa || (sb == sa && b < action))
        .count() as u32
}

/// Annotate the child generated from `parent_state` via `action`.
pub fn annotate_child(
    parent: &FocalAnnotation,
    policy: &dyn StochasticPolicy,
    parent_state: StateKey,
    action: usize,
) -> FocalAnnotation {
    let scores = policy.scores(parent_state);
    debug_assert_eq!(
        score_rank(&scores, action) == 0,
        action == deterministic_action(policy, parent_state),
        "rank-0 must coincide with the deterministic policy choice"
    );
    parent.extend(scores[action], score_rank(&scores, action))
}

/// The seven focal orderings. The strings are the CLI-facing names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FocalKind {
    Score1,
    Score2,
    Score3,
    Score4,
    Disc1,
    Disc2,
    Disc3,
}

impl FocalKind {
    pub const ALL: [FocalKind; 7] = [
        FocalKind::Score1,
        FocalKind::Score2,
        FocalKind::Score3,
        FocalKind::Score4,
        FocalKind::Disc1,
        FocalKind::Disc2,
        FocalKind::Disc3,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FocalKind::Score1 => "score1",
            FocalKind::Score2 => "score2",
            FocalKind::Score3 => "score3",
            FocalKind::Score4 => "score4",
            FocalKind::Disc1 => "disc1",
            FocalKind::Disc2 => "disc2",
            FocalKind::Disc3 => "disc3",
        }
    }

    pub fn parse(name: &str) -> Option<FocalKind> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl std::fmt::Display for FocalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters of one focal ordering.
#[derive(Debug, Clone, Copy)]
pub struct FocalConfig {
    pub kind: FocalKind,
    /// Policy accuracy driving the disc1 trade-off coefficient.
    pub acc: f64,
    /// `|A| - 1`.
    pub alpha: usize,
    /// When set, disc3 scores only the final edge's rank instead of the
    /// cumulative rank sum.
    pub disc3_last_edge_only: bool,
    disc1_coef: f64,
}

impl FocalConfig {
    pub fn new(kind: FocalKind, acc: f64, action_count: usize) -> Self {
        assert!(action_count >= 2, "need at least two actions");
        let alpha = action_count - 1;
        FocalConfig {
            kind,
            acc,
            alpha,
            disc3_last_edge_only: false,
            disc1_coef: disc1_coefficient(acc, alpha),
        }
    }

    pub fn with_disc3_last_edge_only(mut self, flag: bool) -> Self {
        self.disc3_last_edge_only = flag;
        self
    }
}

fn clamp_acc(acc: f64) -> f64 {
    acc.clamp(1e-6, 1.0 - 1e-6)
}

/// `ln(acc) / ln((1 - acc) / alpha)`, the weight of a preferred edge in the
/// disc1 key. Both logarithms are negative, so the ratio is positive and
/// approaches 0 as the accuracy approaches 1.
pub fn disc1_coefficient(acc: f64, alpha: usize) -> f64 {
    let acc = clamp_acc(acc);
    acc.ln() / ((1.0 - acc) / alpha as f64).ln()
}

/// Compute the focal key for a node with annotation `annotation` and
/// f-value `f`. Lower keys are extracted first.
pub fn focal_key(config: &FocalConfig, annotation: &FocalAnnotation, f: f64) -> f64 {
    match config.kind {
        FocalKind::Score1 => -annotation.log_likelihood.exp(),
        FocalKind::Score2 => -annotation.log_likelihood.exp() / f.max(F_FLOOR),
        FocalKind::Score3 => -annotation.last_edge_prob,
        FocalKind::Score4 => -annotation.last_edge_prob / f.max(F_FLOOR),
        FocalKind::Disc1 => {
            config.disc1_coef * annotation.preferred_edges as f64
                + annotation.nonpreferred_edges as f64
        }
        FocalKind::Disc2 => annotation.nonpreferred_edges as f64,
        FocalKind::Disc3 => {
            if config.disc3_last_edge_only {
                annotation.last_rank as f64
            } else {
                annotation.rank_sum as f64
            }
        }
    }
}

/// Modeled probability that the node's generating path is a prefix of an
/// optimal path: `acc^preferred * ((1-acc)/alpha)^nonpreferred`, carried in
/// the log domain and exponentiated at the end.
pub fn prefix_probability(annotation: &FocalAnnotation, acc: f64, alpha: usize) -> f64 {
    let acc = clamp_acc(acc);
    let log_p = annotation.preferred_edges as f64 * acc.ln()
        + annotation.nonpreferred_edges as f64 * ((1.0 - acc) / alpha as f64).ln();
    log_p.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ann(pref: u32, nonpref: u32) -> FocalAnnotation {
        FocalAnnotation {
            log_likelihood: 0.0,
            last_edge_prob: 1.0,
            preferred_edges: pref,
            nonpreferred_edges: nonpref,
            rank_sum: nonpref as u64,
            last_rank: 0,
        }
    }

    #[test]
    fn root_plus_preferred_edge() {
        let a = FocalAnnotation::root().extend(0.9, 0);
        assert!((a.log_likelihood - 0.9f64.ln()).abs() < 1e-15);
        assert_eq!(a.preferred_edges, 1);
        assert_eq!(a.nonpreferred_edges, 0);
        assert_eq!(a.last_rank, 0);
        assert_eq!(a.last_edge_prob, 0.9);
    }

    #[test]
    fn fifty_edge_chain_likelihood() {
        let mut a = FocalAnnotation::root();
        for _ in 0..50 {
            a = a.extend(0.95, 0);
        }
        let direct = 0.95f64.powi(50);
        assert!((a.log_likelihood.exp() - direct).abs() / direct < 1e-12);
        // The headline number: a 95%-accurate chain of 50 steps succeeds
        // with probability about 0.077.
        assert!((a.log_likelihood.exp() - 0.077).abs() < 5e-4);
    }

    #[test]
    fn disc1_coefficient_reference_point() {
        // acc = 0.9 with alpha = 3 gives ln(0.9)/ln(0.1/3) = 0.0310.
        let c = disc1_coefficient(0.9, 3);
        assert!((c - 0.031).abs() < 5e-4, "coefficient was {c}");
        // With alpha = 4 the value drops to roughly 0.029.
        let c4 = disc1_coefficient(0.9, 4);
        assert!((0.028..0.030).contains(&c4), "coefficient was {c4}");
    }

    #[test]
    fn disc2_root_is_zero() {
        let cfg = FocalConfig::new(FocalKind::Disc2, 0.9, 4);
        assert_eq!(focal_key(&cfg, &FocalAnnotation::root(), 5.0), 0.0);
    }

    #[test]
    fn prefix_probability_hand_values() {
        assert_eq!(prefix_probability(&ann(0, 0), 0.9, 3), 1.0);
        let p = prefix_probability(&ann(2, 1), 0.9, 3);
        assert!((p - 0.027).abs() < 1e-12, "p was {p}");
    }

    #[test]
    fn score1_orders_by_descending_likelihood() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let cfg = FocalConfig::new(FocalKind::Score1, 0.9, 4);
        let mut anns: Vec<FocalAnnotation> = (0..1000)
            .map(|_| {
                let mut a = FocalAnnotation::root();
                for _ in 0..rng.random_range(0..12) {
                    a = a.extend(rng.random::<f64>().max(1e-3), rng.random_range(0..4));
                }
                a
            })
            .collect();
        let mut by_key = anns.clone();
        by_key.sort_by(|x, y| focal_key(&cfg, x, 1.0).total_cmp(&focal_key(&cfg, y, 1.0)));
        anns.sort_by(|x, y| y.log_likelihood.exp().total_cmp(&x.log_likelihood.exp()));
        for (a, b) in by_key.iter().zip(&anns) {
            assert_eq!(
                a.log_likelihood.exp(),
                b.log_likelihood.exp(),
                "key order must equal descending likelihood order"
            );
        }
    }

    #[test]
    fn score3_depends_only_on_final_edge() {
        let cfg = FocalConfig::new(FocalKind::Score3, 0.9, 4);
        let short = FocalAnnotation::root().extend(0.4, 1);
        let mut long = FocalAnnotation::root();
        for _ in 0..7 {
            long = long.extend(0.8, 0);
        }
        let long = long.extend(0.4, 1);
        assert_eq!(
            focal_key(&cfg, &short, 3.0),
            focal_key(&cfg, &long, 9.0),
            "same final edge must give the same score3 key"
        );
    }

    #[test]
    fn disc1_key_order_is_dual_to_prefix_probability() {
        for &acc in &[0.7, 0.9, 0.99] {
            for &alpha in &[3usize, 8, 127] {
                let cfg = FocalConfig::new(FocalKind::Disc1, acc, alpha + 1);
                let grid: Vec<FocalAnnotation> = (0..=12)
                    .flat_map(|p| (0..=12).map(move |n| ann(p, n)))
                    .collect();
                for a in &grid {
                    for b in &grid {
                        let ka = focal_key(&cfg, a, 1.0);
                        let kb = focal_key(&cfg, b, 1.0);
                        if ka < kb {
                            let pa = prefix_probability(a, acc, alpha);
                            let pb = prefix_probability(b, acc, alpha);
                            assert!(
                                pa > pb,
                                "key {ka} < {kb} but p {pa} <= {pb} (acc={acc}, alpha={alpha})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn near_perfect_accuracy_makes_disc1_match_disc2_on_equal_lengths() {
        let cfg = FocalConfig::new(FocalKind::Disc1, 1.0, 4);
        let d2 = FocalConfig::new(FocalKind::Disc2, 1.0, 4);
        for total in 0..40u32 {
            let keys: Vec<(f64, f64)> = (0..=total)
                .map(|n| {
                    let a = ann(total - n, n);
                    (focal_key(&cfg, &a, 1.0), focal_key(&d2, &a, 1.0))
                })
                .collect();
            for w in keys.windows(2) {
                assert_eq!(
                    w[0].0 < w[1].0,
                    w[0].1 < w[1].1,
                    "clamped disc1 must order equal-length paths like disc2"
                );
            }
        }
    }

    #[test]
    fn accumulation_is_monotone() {
        let mut a = FocalAnnotation::root();
        for i in 0..100 {
            let next = a.extend(0.5, (i % 3) as u32);
            assert!(next.log_likelihood <= a.log_likelihood);
            assert!(next.preferred_edges >= a.preferred_edges);
            assert!(next.nonpreferred_edges >= a.nonpreferred_edges);
            assert!(next.rank_sum >= a.rank_sum);
            a = next;
        }
    }
}
