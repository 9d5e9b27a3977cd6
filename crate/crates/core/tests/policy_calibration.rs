//! Calibration and measurement behavior of synthetic policies on a full
//! enumerated space.

use std::sync::{Arc, LazyLock};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use focal_search::domains::TileDomain;
use focal_search::focal_heuristics::score_rank;
use focal_search::policy::{build_opt_table, OptTable};
use focal_search::search::{reverse_dijkstra, CostTable};
use focal_search::{measure_accuracy, synthesize_policy, DomainAdapter, StochasticPolicy};

struct Fixture {
    tile: Arc<TileDomain>,
    oracle: CostTable,
    opt: OptTable,
}

static FIX: LazyLock<Fixture> = LazyLock::new(|| {
    let tile = Arc::new(TileDomain::new(3));
    let oracle = reverse_dijkstra(tile.as_ref(), usize::MAX).unwrap();
    let opt = build_opt_table(tile.as_ref(), &oracle, 1).unwrap();
    Fixture { tile, oracle, opt }
});

#[test]
fn full_space_calibration_at_ninety_percent() {
    let fix = &*FIX;
    assert_eq!(fix.oracle.len(), 181_440);
    let table = synthesize_policy(&fix.opt, fix.tile.as_ref(), 0.9, 21).unwrap();
    let n = fix.opt.scored_keys().len() as f64;
    let tolerance = 4.0 * (0.9f64 * 0.1 / n).sqrt();
    assert!(
        (table.measured_acc - 0.9).abs() <= tolerance,
        "measured {} outside 0.9 +- {tolerance}",
        table.measured_acc
    );
}

#[test]
fn subsample_measurement_tracks_the_full_table() {
    let fix = &*FIX;
    let table = synthesize_policy(&fix.opt, fix.tile.as_ref(), 0.9, 22).unwrap();
    let full = measure_accuracy(&table, &fix.opt, None).unwrap();
    let scored = fix.opt.scored_keys();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sample: Vec<u64> = rand::seq::index::sample(&mut rng, scored.len(), 10_000)
        .into_iter()
        .map(|i| scored[i])
        .collect();
    let sampled = measure_accuracy(&table, &fix.opt, Some(&sample)).unwrap();
    assert!(
        (sampled - full).abs() <= 0.02,
        "sample estimate {sampled} strays from full {full}"
    );
}

#[test]
fn measurement_is_order_invariant() {
    let fix = &*FIX;
    let table = synthesize_policy(&fix.opt, fix.tile.as_ref(), 0.8, 23).unwrap();
    let scored = fix.opt.scored_keys();
    let forward: Vec<u64> = scored[..5000].to_vec();
    let mut reversed = forward.clone();
    reversed.reverse();
    let a = measure_accuracy(&table, &fix.opt, Some(&forward)).unwrap();
    let b = measure_accuracy(&table, &fix.opt, Some(&reversed)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn miss_rank_histogram_decays_on_the_full_space() {
    let fix = &*FIX;
    let table = synthesize_policy(&fix.opt, fix.tile.as_ref(), 0.7, 24).unwrap();
    let mut counts = [0usize; 4];
    for &key in fix.opt.scored_keys() {
        let mask = fix.opt.opt_set(key).unwrap();
        let row = table.scores(key);
        let best = focal_search::deterministic_action(&table, key);
        if mask & (1u128 << best) != 0 {
            continue;
        }
        let best_rank = (0..4)
            .filter(|&a| mask & (1u128 << a) != 0)
            .map(|a| score_rank(&row, a))
            .min()
            .unwrap();
        counts[best_rank as usize] += 1;
    }
    assert_eq!(counts[0], 0);
    assert!(
        counts[1] > counts[2] && counts[2] > counts[3],
        "missed-state ranks must decay: {counts:?}"
    );
}

#[test]
fn invalid_samples_are_rejected() {
    let fix = &*FIX;
    let table = synthesize_policy(&fix.opt, fix.tile.as_ref(), 0.9, 25).unwrap();
    assert!(measure_accuracy(&table, &fix.opt, Some(&[])).is_err());
    let goal = fix.tile.goal();
    assert!(measure_accuracy(&table, &fix.opt, Some(&[goal])).is_err());
}
