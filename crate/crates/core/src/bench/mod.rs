//! Experiment runner: synthetic-policy sweeps over accuracy x bound x
//! heuristic x algorithm, model-driven 15-puzzle runs, CSV emission, and
//! the accumulated-suboptimality metric.

mod config;

pub use config::{AlgorithmSpec, ExperimentConfig, InstanceSource};

use std::collections::HashMap;
use std::fs;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::domain::{DomainAdapter, ParseError, StateKey};
use crate::domains::{make_domain, UnknownDomain};
use crate::focal_heuristics::{FocalConfig, FocalKind};
use crate::neural::{MlpModel, MlpTilePolicy, ModelError};
use crate::policy::{
    build_opt_table, synthesize_policy, PolicyError, PolicyFileError, StochasticPolicy,
};
use crate::search::{
    focal_search, preferred_astar, reverse_dijkstra, weighted_astar, CostTable, OracleError,
    SearchResult, SearchStatus,
};

pub const CSV_HEADER: &str =
    "domain,instance,algorithm,heuristic,w,target_acc,measured_acc,seed,status,cost,opt,subopt,expansions,generations,wall_s";

/// Worker-count override honored by `run_sweep`.
pub const WORKERS_ENV: &str = "POLICY_FOCAL_WORKERS";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    UnknownDomain(#[from] UnknownDomain),
    #[error("instance {index}: {source}")]
    Instance { index: usize, source: ParseError },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    PolicyFile(#[from] PolicyFileError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("records span more than one (algorithm, heuristic, w) cell")]
    MixedCell,
    #[error("no records given")]
    NoRecords,
}

/// One benchmark outcome, one CSV row.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub domain: String,
    pub instance: String,
    pub instance_key: StateKey,
    pub algorithm: String,
    pub heuristic: String,
    /// Suboptimality bound the run was given; infinity for prefastar.
    pub w: f64,
    pub target_acc: Option<f64>,
    pub measured_acc: Option<f64>,
    pub seed: u64,
    pub status: SearchStatus,
    pub cost: Option<f64>,
    pub opt: Option<f64>,
    pub subopt: Option<f64>,
    pub expansions: u64,
    pub generations: u64,
    pub wall_seconds: f64,
}

impl RunRecord {
    pub fn csv_row(&self, timing: bool) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.domain,
            self.instance,
            self.algorithm,
            self.heuristic,
            fmt_num(self.w),
            self.target_acc.map(fmt_num).unwrap_or_default(),
            self.measured_acc
                .map(|v| format!("{v:.6}"))
                .unwrap_or_default(),
            self.seed,
            self.status,
            self.cost.map(fmt_num).unwrap_or_default(),
            self.opt.map(fmt_num).unwrap_or_default(),
            self.subopt
                .map(|v| format!("{v:.6}"))
                .unwrap_or_default(),
            self.expansions,
            self.generations,
            if timing {
                format!("{:.6}", self.wall_seconds)
            } else {
                String::new()
            },
        )
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub records: Vec<RunRecord>,
    pub csv: String,
}

/// One accuracy level of a sweep: the policy driving it (absent for sweeps
/// that only run weighted A*) and how its accuracy is reported.
struct Level {
    policy: Option<Arc<dyn StochasticPolicy>>,
    target_acc: Option<f64>,
    measured_acc: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
enum RunSpec {
    Wastar { w: f64, instance: usize },
    Prefastar { level: usize, instance: usize },
    Focal { kind: FocalKind, level: usize, w: f64, instance: usize },
}

struct Cell {
    algo: AlgorithmSpec,
    level: usize,
    w: f64,
    instance: usize,
    run: usize,
}

/// Run every configured cell and emit records in config order (algorithm,
/// then accuracy level, then bound, then instance), whatever the execution
/// interleaving. Weighted A* is policy-independent, so its runs are shared
/// across accuracy levels and its rows leave the accuracy columns empty.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutcome, BenchError> {
    config.validate()?;
    let domain = make_domain(&config.domain)?;
    let needs_policy = config.algorithms.iter().any(|a| a.needs_policy());
    let synthetic_mode = needs_policy && config.model.is_none();
    let needs_oracle = synthetic_mode
        || matches!(
            config.source,
            InstanceSource::Sampled { .. } | InstanceSource::FullSpace
        );

    let oracle: Option<CostTable> = if needs_oracle {
        Some(reverse_dijkstra(domain.as_ref(), config.oracle_budget)?)
    } else {
        None
    };

    // Start states plus their published or oracle-exact optimal costs.
    let (instances, opt_costs) = collect_instances(config, domain.as_ref(), oracle.as_ref())?;

    let levels = build_levels(config, domain.as_ref(), oracle.as_ref())?;

    // Lay out cells in emission order, deduplicating policy-independent runs.
    let mut runs: Vec<RunSpec> = Vec::new();
    let mut cells: Vec<Cell> = Vec::new();
    let mut wastar_memo: HashMap<(u64, usize), usize> = HashMap::new();
    for &algo in &config.algorithms {
        for level in 0..levels.len() {
            match algo {
                AlgorithmSpec::Wastar => {
                    for &w in &config.bounds {
                        for instance in 0..instances.len() {
                            let run = *wastar_memo
                                .entry((w.to_bits(), instance))
                                .or_insert_with(|| {
                                    runs.push(RunSpec::Wastar { w, instance });
                                    runs.len() - 1
                                });
                            cells.push(Cell { algo, level, w, instance, run });
                        }
                    }
                }
                AlgorithmSpec::Prefastar => {
                    for instance in 0..instances.len() {
                        runs.push(RunSpec::Prefastar { level, instance });
                        cells.push(Cell {
                            algo,
                            level,
                            w: f64::INFINITY,
                            instance,
                            run: runs.len() - 1,
                        });
                    }
                }
                AlgorithmSpec::Focal(kind) => {
                    for &w in &config.bounds {
                        for instance in 0..instances.len() {
                            runs.push(RunSpec::Focal { kind, level, w, instance });
                            cells.push(Cell { algo, level, w, instance, run: runs.len() - 1 });
                        }
                    }
                }
            }
        }
    }

    let workers = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&w| w >= 1)
        .unwrap_or(config.workers);

    let execute = |spec: &RunSpec| -> SearchResult {
        match *spec {
            RunSpec::Wastar { w, instance } => {
                weighted_astar(domain.as_ref(), instances[instance].1, w, &config.limits)
            }
            RunSpec::Prefastar { level, instance } => {
                let policy = levels[level].policy.as_ref().expect("policy level");
                preferred_astar(
                    domain.as_ref(),
                    instances[instance].1,
                    policy.as_ref(),
                    &config.limits,
                )
            }
            RunSpec::Focal { kind, level, w, instance } => {
                let policy = levels[level].policy.as_ref().expect("policy level");
                let acc = levels[level].measured_acc.expect("policy level accuracy");
                let focal_config = FocalConfig::new(kind, acc, domain.action_count())
                    .with_disc3_last_edge_only(config.disc3_last_edge_only);
                focal_search(
                    domain.as_ref(),
                    instances[instance].1,
                    w,
                    policy.as_ref(),
                    &focal_config,
                    &config.limits,
                )
            }
        }
    };

    let results = run_parallel(&runs, workers, execute);

    let mut records = Vec::with_capacity(cells.len());
    for cell in &cells {
        let result = &results[cell.run];
        let (algorithm, heuristic) = match cell.algo {
            AlgorithmSpec::Wastar => ("wastar".to_string(), String::new()),
            AlgorithmSpec::Prefastar => ("prefastar".to_string(), String::new()),
            AlgorithmSpec::Focal(kind) => ("focal".to_string(), kind.name().to_string()),
        };
        let policy_columns = cell.algo.needs_policy();
        let opt = opt_costs[cell.instance];
        let subopt = match (result.cost, opt) {
            (Some(c), Some(o)) if o > 0.0 => Some(c / o),
            _ => None,
        };
        records.push(RunRecord {
            domain: config.domain.clone(),
            instance: instances[cell.instance].0.clone(),
            instance_key: instances[cell.instance].1,
            algorithm,
            heuristic,
            w: cell.w,
            target_acc: if policy_columns { levels[cell.level].target_acc } else { None },
            measured_acc: if policy_columns { levels[cell.level].measured_acc } else { None },
            seed: config.seed,
            status: result.status,
            cost: result.cost,
            opt,
            subopt,
            expansions: result.expansions,
            generations: result.generations,
            wall_seconds: result.wall_seconds,
        });
    }

    let mut csv = String::with_capacity(records.len() * 96 + CSV_HEADER.len() + 1);
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for record in &records {
        csv.push_str(&record.csv_row(config.timing));
        csv.push('\n');
    }
    if let Some(path) = &config.output {
        fs::write(path, &csv)?;
    }
    Ok(SweepOutcome { records, csv })
}

fn run_parallel<F>(runs: &[RunSpec], workers: usize, execute: F) -> Vec<SearchResult>
where
    F: Fn(&RunSpec) -> SearchResult + Sync,
{
    if workers <= 1 || runs.len() <= 1 {
        return runs.iter().map(&execute).collect();
    }
    let slots: Vec<OnceLock<SearchResult>> = (0..runs.len()).map(|_| OnceLock::new()).collect();
    let cursor = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers.min(runs.len()) {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= runs.len() {
                    break;
                }
                let result = execute(&runs[i]);
                assert!(slots[i].set(result).is_ok(), "each run executes once");
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("worker filled every slot"))
        .collect()
}

fn build_levels(
    config: &ExperimentConfig,
    domain: &dyn DomainAdapter,
    oracle: Option<&CostTable>,
) -> Result<Vec<Level>, BenchError> {
    let needs_policy = config.algorithms.iter().any(|a| a.needs_policy());
    if !needs_policy {
        return Ok(vec![Level {
            policy: None,
            target_acc: None,
            measured_acc: None,
        }]);
    }
    if let Some(path) = &config.model {
        let model = MlpModel::load(path)?;
        let policy = MlpTilePolicy::new(model)?;
        return Ok(vec![Level {
            policy: Some(Arc::new(policy)),
            target_acc: None,
            measured_acc: Some(config.model_acc),
        }]);
    }
    let oracle = oracle.expect("synthetic mode builds the oracle");
    let opt = build_opt_table(domain, oracle, config.seed)?;
    let mut levels = Vec::with_capacity(config.accuracies.len());
    for (i, &acc) in config.accuracies.iter().enumerate() {
        let policy_seed = config
            .seed
            .wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let table = synthesize_policy(&opt, domain, acc, policy_seed)?;
        levels.push(Level {
            target_acc: Some(acc),
            measured_acc: Some(table.measured_acc),
            policy: Some(Arc::new(table)),
        });
    }
    Ok(levels)
}

type Instances = (Vec<(String, StateKey)>, Vec<Option<f64>>);

fn collect_instances(
    config: &ExperimentConfig,
    domain: &dyn DomainAdapter,
    oracle: Option<&CostTable>,
) -> Result<Instances, BenchError> {
    let mut instances = Vec::new();
    match &config.source {
        InstanceSource::Sampled { count } => {
            let oracle = oracle.expect("sampling needs the enumerated space");
            let goal = domain.goal();
            let pool: Vec<StateKey> = oracle.keys().iter().copied().filter(|&k| k != goal).collect();
            if *count > pool.len() {
                return Err(BenchError::Config(format!(
                    "requested {count} instances but the space holds {}",
                    pool.len()
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut picks = rand::seq::index::sample(&mut rng, pool.len(), *count).into_vec();
            picks.sort_unstable();
            for (i, pick) in picks.into_iter().enumerate() {
                instances.push((format!("s{i:03}"), pool[pick]));
            }
        }
        InstanceSource::FullSpace => {
            let oracle = oracle.expect("full-space mode needs the enumerated space");
            let goal = domain.goal();
            for (i, &key) in oracle.keys().iter().filter(|&&k| k != goal).enumerate() {
                instances.push((format!("k{i:06}"), key));
            }
        }
        InstanceSource::File { path } => {
            let text = fs::read_to_string(path)?;
            for (i, chunk) in instance_chunks(&config.domain, &text).into_iter().enumerate() {
                let key = domain
                    .parse_state(&chunk)
                    .map_err(|source| BenchError::Instance { index: i + 1, source })?;
                instances.push((format!("f{:03}", i + 1), key));
            }
            if instances.is_empty() {
                return Err(BenchError::Config(format!("no instances in {}", path.display())));
            }
        }
    }

    let mut opts: Vec<Option<f64>> = Vec::with_capacity(instances.len());
    if let Some(oracle) = oracle {
        for (_, key) in &instances {
            opts.push(oracle.get(*key));
        }
    } else if let Some(path) = &config.opt_file {
        let text = fs::read_to_string(path)?;
        let values: Vec<f64> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|_| BenchError::Config(format!("bad optimal cost line {l:?}")))
            })
            .collect::<Result<_, _>>()?;
        if values.len() != instances.len() {
            return Err(BenchError::Config(format!(
                "opt file holds {} costs for {} instances",
                values.len(),
                instances.len()
            )));
        }
        opts.extend(values.into_iter().map(Some));
    } else {
        opts.resize(instances.len(), None);
    }
    Ok((instances, opts))
}

/// Tile and pancake instances are one line each; blocks instances are
/// blank-line separated multi-line records.
fn instance_chunks(domain_id: &str, text: &str) -> Vec<String> {
    if domain_id.starts_with("blocks") {
        text.split("\n\n")
            .map(|c| c.trim())
            .filter(|c| !c.is_empty())
            .map(|c| c.to_string())
            .collect()
    } else {
        text.lines()
            .map(|l| l.trim())
            .filter(|l| !l.is_empty())
            .map(|l| l.to_string())
            .collect()
    }
}

/// Companion counts for the accumulated suboptimality sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuboptSummary {
    /// Sum over solved records of (cost / opt - 1).
    pub accumulated: f64,
    pub solved: usize,
    /// Unsolved records contribute zero but are counted here.
    pub unsolved: usize,
    /// Solved records without a known optimum, excluded from the sum.
    pub missing_opt: usize,
}

/// Accumulate suboptimality over records from a single
/// (algorithm, heuristic, w) cell.
pub fn accumulated_suboptimality(records: &[RunRecord]) -> Result<SuboptSummary, BenchError> {
    let first = records.first().ok_or(BenchError::NoRecords)?;
    let cell = (&first.algorithm, &first.heuristic, first.w.to_bits());
    if records
        .iter()
        .any(|r| (&r.algorithm, &r.heuristic, r.w.to_bits()) != cell)
    {
        return Err(BenchError::MixedCell);
    }
    let mut summary = SuboptSummary {
        accumulated: 0.0,
        solved: 0,
        unsolved: 0,
        missing_opt: 0,
    };
    for record in records {
        if record.status != SearchStatus::Solved {
            summary.unsolved += 1;
            continue;
        }
        summary.solved += 1;
        match record.subopt {
            Some(ratio) => summary.accumulated += ratio - 1.0,
            None => summary.missing_opt += 1,
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(algo: &str, heur: &str, w: f64, status: SearchStatus, subopt: Option<f64>) -> RunRecord {
        RunRecord {
            domain: "tile8".into(),
            instance: "s000".into(),
            instance_key: 0,
            algorithm: algo.into(),
            heuristic: heur.into(),
            w,
            target_acc: None,
            measured_acc: None,
            seed: 0,
            status,
            cost: subopt.map(|r| r * 10.0),
            opt: subopt.map(|_| 10.0),
            subopt,
            expansions: 1,
            generations: 1,
            wall_seconds: 0.0,
        }
    }

    #[test]
    fn all_optimal_accumulates_zero() {
        let records = vec![
            record("wastar", "", 1.5, SearchStatus::Solved, Some(1.0)),
            record("wastar", "", 1.5, SearchStatus::Solved, Some(1.0)),
        ];
        let s = accumulated_suboptimality(&records).unwrap();
        assert_eq!(s.accumulated, 0.0);
        assert_eq!(s.solved, 2);
    }

    #[test]
    fn ratios_sum_minus_one_each() {
        let records = vec![
            record("focal", "disc2", 1.5, SearchStatus::Solved, Some(1.2)),
            record("focal", "disc2", 1.5, SearchStatus::Solved, Some(1.5)),
            record("focal", "disc2", 1.5, SearchStatus::Timeout, None),
        ];
        let s = accumulated_suboptimality(&records).unwrap();
        assert!((s.accumulated - 0.7).abs() < 1e-12);
        assert_eq!(s.solved, 2);
        assert_eq!(s.unsolved, 1);
    }

    #[test]
    fn mixed_cells_are_rejected() {
        let records = vec![
            record("focal", "disc2", 1.5, SearchStatus::Solved, Some(1.2)),
            record("focal", "disc1", 1.5, SearchStatus::Solved, Some(1.2)),
        ];
        assert!(matches!(
            accumulated_suboptimality(&records),
            Err(BenchError::MixedCell)
        ));
    }

    #[test]
    fn missing_opt_is_excluded_and_counted() {
        let mut lame = record("wastar", "", 2.0, SearchStatus::Solved, None);
        lame.cost = Some(12.0);
        let s = accumulated_suboptimality(&[lame]).unwrap();
        assert_eq!(s.accumulated, 0.0);
        assert_eq!(s.missing_opt, 1);
    }
}
