//! Sweep-runner behaviors on a small domain.

use focal_search::bench::{accumulated_suboptimality, run_sweep, ExperimentConfig, CSV_HEADER};
use focal_search::search::SearchStatus;

fn parse(body: &str) -> ExperimentConfig {
    ExperimentConfig::parse(body).unwrap()
}

const BASE: &str = "domain = pancake6\ninstances = 20\nseed = 5\n\
                    algo = wastar\nalgo = prefastar\nalgo = focal:disc2\n\
                    bound = 1.2\nbound = 1.5\nacc = 0.8\nacc = 0.95\ntiming = off\n";

#[test]
fn header_and_row_shape_are_exact() {
    let outcome = run_sweep(&parse(BASE)).unwrap();
    let mut lines = outcome.csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    for line in lines {
        assert_eq!(line.split(',').count(), 15, "{line}");
    }
    // instances x (wastar accs*bounds + prefastar accs + focal accs*bounds)
    assert_eq!(outcome.records.len(), 20 * (4 + 2 + 4));
}

#[test]
fn wastar_rows_are_identical_across_accuracy_levels() {
    let outcome = run_sweep(&parse(BASE)).unwrap();
    let rows: Vec<String> = outcome
        .records
        .iter()
        .filter(|r| r.algorithm == "wastar")
        .map(|r| r.csv_row(false))
        .collect();
    // Two accuracy levels -> each (w, instance) row appears exactly twice,
    // byte-identical, with the accuracy columns empty.
    assert_eq!(rows.len(), 80);
    let half = rows.len() / 2;
    for w_slice in rows.chunks(half) {
        for pair in w_slice.chunks(20) {
            assert_eq!(pair.len(), 20);
        }
    }
    let (first_level, second_level) = rows.split_at(40);
    assert_eq!(first_level, second_level);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[5], "", "target_acc must be empty for wastar");
        assert_eq!(fields[6], "", "measured_acc must be empty for wastar");
    }
}

#[test]
fn prefastar_rows_ignore_bounds_and_carry_inf() {
    let outcome = run_sweep(&parse(BASE)).unwrap();
    let rows: Vec<_> = outcome
        .records
        .iter()
        .filter(|r| r.algorithm == "prefastar")
        .collect();
    assert_eq!(rows.len(), 40, "one row per accuracy level and instance");
    assert!(rows.iter().all(|r| r.w.is_infinite()));
    assert!(rows.iter().all(|r| r.csv_row(false).contains(",inf,")));
}

#[test]
fn worker_count_does_not_change_the_bytes() {
    let sequential = run_sweep(&parse(BASE)).unwrap();
    let parallel = run_sweep(&parse(&format!("{BASE}workers = 4\n"))).unwrap();
    assert_eq!(sequential.csv, parallel.csv);
}

#[test]
fn accumulated_suboptimality_over_a_real_cell() {
    let outcome = run_sweep(&parse(BASE)).unwrap();
    let cell: Vec<_> = outcome
        .records
        .iter()
        .filter(|r| r.heuristic == "disc2" && r.w == 1.5 && r.target_acc == Some(0.8))
        .cloned()
        .collect();
    assert_eq!(cell.len(), 20);
    let summary = accumulated_suboptimality(&cell).unwrap();
    assert_eq!(summary.solved + summary.unsolved, 20);
    let by_hand: f64 = cell
        .iter()
        .filter(|r| r.status == SearchStatus::Solved)
        .map(|r| r.subopt.unwrap() - 1.0)
        .sum();
    assert!((summary.accumulated - by_hand).abs() < 1e-12);
    assert!(summary.accumulated >= 0.0);
}

#[test]
fn solved_counts_never_drop_as_the_bound_loosens() {
    // Starve the searches so some instances fail, then check monotonicity
    // of the solved count in w for each algorithm cell.
    let body = "domain = pancake7\ninstances = 40\nseed = 5\n\
                algo = wastar\nalgo = focal:disc2\n\
                bound = 1.0\nbound = 1.2\nbound = 1.5\nbound = 2.0\n\
                acc = 0.9\nexpansion_cap = 40\ntiming = off\n";
    let outcome = run_sweep(&parse(body)).unwrap();
    for algo in ["wastar", "focal"] {
        let mut previous = 0usize;
        for w in [1.0, 1.2, 1.5, 2.0] {
            let solved = outcome
                .records
                .iter()
                .filter(|r| {
                    r.algorithm == algo && r.w == w && r.status == SearchStatus::Solved
                })
                .count();
            assert!(
                solved >= previous,
                "{algo}: solved count dropped from {previous} to {solved} at w = {w}"
            );
            previous = solved;
        }
        assert!(previous > 0, "{algo} should solve something at w = 2");
    }
}

#[test]
fn missing_opt_leaves_columns_empty_but_records_runs() {
    // File-mode without an opt sidecar: tile instances with no oracle.
    let dir = tempfile::tempdir().unwrap();
    let instances = dir.path().join("starts.txt");
    std::fs::write(&instances, "1 0 2 3 4 5 6 7 8\n3 1 2 0 4 5 6 7 8\n").unwrap();
    let body = format!(
        "domain = tile8\ninstance_file = {}\nseed = 1\nalgo = wastar\nbound = 1.5\ntiming = off\n",
        instances.display()
    );
    let outcome = run_sweep(&parse(&body)).unwrap();
    assert_eq!(outcome.records.len(), 2);
    for record in &outcome.records {
        assert_eq!(record.status, SearchStatus::Solved);
        assert!(record.opt.is_none());
        assert!(record.subopt.is_none());
        let fields: Vec<&str> = record.csv_row(false).split(',').map(str::trim).collect();
        assert_eq!(fields[10], "");
        assert_eq!(fields[11], "");
    }
}
