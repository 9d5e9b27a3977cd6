//! Command-line interface.
//!
//! Subcommands: `oracle`, `gen-policy`, `solve`, `sweep`, `measure-acc`.
//! Exit codes: 0 success, 2 configuration/usage error, 3 resource-limit
//! termination.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::bench::{run_sweep, AlgorithmSpec, ExperimentConfig};
use crate::domain::{DomainAdapter, StateKey};
use crate::domains::make_domain;
use crate::focal_heuristics::FocalConfig;
use crate::neural::{MlpModel, MlpTilePolicy};
use crate::policy::{
    build_opt_table, measure_accuracy, synthesize_policy, StochasticPolicy, SyntheticPolicyTable,
};
use crate::search::{
    focal_search, preferred_astar, reverse_dijkstra, weighted_astar, CostTable, SearchLimits,
    SearchResult, SearchStatus,
};

const EXIT_OK: i32 = 0;
const EXIT_CONFIG: i32 = 2;
const EXIT_RESOURCE_LIMIT: i32 = 3;

#[derive(Parser)]
#[command(
    name = "focal-search",
    about = "Bounded-suboptimal search with policy-guided focal orderings",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the exhaustive cost table of a domain (reverse search from the
    /// goal) and optionally store it.
    Oracle {
        /// Domain id: tile8, tile15, pancake<N>, blocks<B>.
        domain: String,
        /// Store the table here (binary "CT01" container).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Abort if the space exceeds this many states.
        #[arg(long, default_value_t = 50_000_000)]
        max_states: usize,
    },
    /// Generate a synthetic policy table with a target accuracy.
    #[command(name = "gen-policy")]
    GenPolicy {
        domain: String,
        /// Target accuracy in [0, 1].
        #[arg(long)]
        acc: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path for the "SPT1" policy container.
        #[arg(short, long)]
        output: PathBuf,
        /// Reuse a stored cost table instead of rebuilding it.
        #[arg(long)]
        oracle: Option<PathBuf>,
    },
    /// Solve a single instance.
    Solve {
        domain: String,
        /// Instance file path, or the instance text itself.
        instance: String,
        /// wastar, prefastar, or focal:<score1|...|disc3>.
        #[arg(long)]
        algo: String,
        /// Suboptimality bound (ignored by prefastar).
        #[arg(long, default_value_t = 1.5)]
        w: f64,
        /// Synthetic policy file ("SPT1").
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Trained network file ("MLP1", tile15 only).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Accuracy attributed to the model (drives focal:disc1).
        #[arg(long, default_value_t = 0.875)]
        model_acc: f64,
        #[arg(long, default_value_t = 10_000_000)]
        max_expansions: u64,
        #[arg(long, default_value_t = 300.0)]
        wall_cap_s: f64,
        /// Score only the final edge's rank in focal:disc3.
        #[arg(long)]
        disc3_last_edge_only: bool,
        /// Print the solution path, one state per line.
        #[arg(long)]
        print_path: bool,
    },
    /// Run a benchmark sweep described by a key = value config file.
    Sweep {
        /// Config file; see the README for the key reference.
        config: PathBuf,
    },
    /// Measure a stored policy's accuracy against the exhaustive oracle.
    #[command(name = "measure-acc")]
    MeasureAcc {
        /// Policy file ("SPT1"); names its own domain.
        #[arg(long)]
        policy: PathBuf,
        /// Measure on a random sample of this many states instead of the
        /// full space.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Reuse a stored cost table instead of rebuilding it.
        #[arg(long)]
        oracle: Option<PathBuf>,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            EXIT_CONFIG
        }
    }
}

fn dispatch(command: Command) -> Result<i32, String> {
    match command {
        Command::Oracle { domain, output, max_states } => {
            let domain = make_domain(&domain).map_err(|e| e.to_string())?;
            let table =
                reverse_dijkstra(domain.as_ref(), max_states).map_err(|e| e.to_string())?;
            println!("domain: {}", table.domain_id());
            println!("states: {}", table.len());
            println!("max_cost: {}", table.max_cost());
            if let Some(path) = output {
                table.save(&path).map_err(|e| e.to_string())?;
                println!("written: {}", path.display());
            }
            Ok(EXIT_OK)
        }
        Command::GenPolicy { domain, acc, seed, output, oracle } => {
            if !(0.0..=1.0).contains(&acc) {
                return Err(format!("acc {acc} must be in [0, 1]"));
            }
            let domain = make_domain(&domain).map_err(|e| e.to_string())?;
            let costs = load_or_build_oracle(domain.as_ref(), oracle.as_deref())?;
            let opt = build_opt_table(domain.as_ref(), &costs, seed).map_err(|e| e.to_string())?;
            let table =
                synthesize_policy(&opt, domain.as_ref(), acc, seed).map_err(|e| e.to_string())?;
            table.save(&output).map_err(|e| e.to_string())?;
            println!("domain: {}", domain.id());
            println!("states: {}", table.state_count());
            println!("target_acc: {acc}");
            println!("measured_acc: {:.6}", table.measured_acc);
            println!("written: {}", output.display());
            Ok(EXIT_OK)
        }
        Command::Solve {
            domain,
            instance,
            algo,
            w,
            policy,
            model,
            model_acc,
            max_expansions,
            wall_cap_s,
            disc3_last_edge_only,
            print_path,
        } => {
            let algo = AlgorithmSpec::parse(&algo).map_err(|e| e.to_string())?;
            let domain = make_domain(&domain).map_err(|e| e.to_string())?;
            let start = parse_instance_arg(domain.as_ref(), &instance)?;
            if algo.uses_bounds() && w < 1.0 {
                return Err(format!("bound {w} must be >= 1"));
            }
            let limits = SearchLimits {
                max_expansions,
                wall_cap_seconds: wall_cap_s,
                audit: false,
            };
            let loaded =
                load_policy(domain.as_ref(), policy.as_deref(), model.as_deref(), model_acc)?;
            let result = match algo {
                AlgorithmSpec::Wastar => weighted_astar(domain.as_ref(), start, w, &limits),
                AlgorithmSpec::Prefastar => {
                    let (policy, _) = loaded.ok_or("prefastar needs --policy or --model")?;
                    preferred_astar(domain.as_ref(), start, policy.as_ref(), &limits)
                }
                AlgorithmSpec::Focal(kind) => {
                    let (policy, acc) = loaded.ok_or("focal search needs --policy or --model")?;
                    let config = FocalConfig::new(kind, acc, domain.action_count())
                        .with_disc3_last_edge_only(disc3_last_edge_only);
                    focal_search(domain.as_ref(), start, w, policy.as_ref(), &config, &limits)
                }
            };
            print_result(domain.as_ref(), &result, print_path);
            Ok(match result.status {
                SearchStatus::Timeout | SearchStatus::ExpansionLimit => EXIT_RESOURCE_LIMIT,
                _ => EXIT_OK,
            })
        }
        Command::Sweep { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| format!("{}: {e}", config.display()))?;
            let config = ExperimentConfig::parse(&text).map_err(|e| e.to_string())?;
            let outcome = run_sweep(&config).map_err(|e| e.to_string())?;
            match &config.output {
                Some(path) => {
                    eprintln!("rows: {}", outcome.records.len());
                    eprintln!("written: {}", path.display());
                }
                None => print!("{}", outcome.csv),
            }
            Ok(EXIT_OK)
        }
        Command::MeasureAcc { policy, sample, seed, oracle } => {
            let table = SyntheticPolicyTable::load(&policy).map_err(|e| e.to_string())?;
            let domain = make_domain(table.domain_id()).map_err(|e| e.to_string())?;
            let costs = load_or_build_oracle(domain.as_ref(), oracle.as_deref())?;
            let opt = build_opt_table(domain.as_ref(), &costs, seed).map_err(|e| e.to_string())?;
            let subset: Option<Vec<StateKey>> = match sample {
                None => None,
                Some(n) => {
                    use rand::prelude::*;
                    let scored = opt.scored_keys();
                    if n == 0 || n > scored.len() {
                        return Err(format!("sample {n} out of range 1..={}", scored.len()));
                    }
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                    Some(
                        rand::seq::index::sample(&mut rng, scored.len(), n)
                            .into_iter()
                            .map(|i| scored[i])
                            .collect(),
                    )
                }
            };
            let accuracy =
                measure_accuracy(&table, &opt, subset.as_deref()).map_err(|e| e.to_string())?;
            println!("domain: {}", table.domain_id());
            println!("target_acc: {}", table.target_acc);
            println!("stored_measured_acc: {:.6}", table.measured_acc);
            println!("accuracy: {accuracy:.6}");
            Ok(EXIT_OK)
        }
    }
}

fn load_or_build_oracle(
    domain: &dyn DomainAdapter,
    stored: Option<&Path>,
) -> Result<CostTable, String> {
    match stored {
        Some(path) => {
            let table = CostTable::load(path).map_err(|e| e.to_string())?;
            if table.domain_id() != domain.id() {
                return Err(format!(
                    "cost table is for {}, not {}",
                    table.domain_id(),
                    domain.id()
                ));
            }
            Ok(table)
        }
        None => reverse_dijkstra(domain, 50_000_000).map_err(|e| e.to_string()),
    }
}

type LoadedPolicy = (Arc<dyn StochasticPolicy>, f64);

/// Load `--policy` or `--model` along with the accuracy that drives disc1.
fn load_policy(
    domain: &dyn DomainAdapter,
    policy: Option<&Path>,
    model: Option<&Path>,
    model_acc: f64,
) -> Result<Option<LoadedPolicy>, String> {
    match (policy, model) {
        (Some(_), Some(_)) => Err("give either --policy or --model, not both".into()),
        (Some(path), None) => {
            let table = SyntheticPolicyTable::load(path).map_err(|e| e.to_string())?;
            if table.domain_id() != domain.id() {
                return Err(format!(
                    "policy file is for {}, not {}",
                    table.domain_id(),
                    domain.id()
                ));
            }
            let acc = table.measured_acc;
            Ok(Some((Arc::new(table), acc)))
        }
        (None, Some(path)) => {
            if domain.id() != "tile15" {
                return Err("--model policies are defined for tile15".into());
            }
            let model = MlpModel::load(path).map_err(|e| e.to_string())?;
            let policy = MlpTilePolicy::new(model).map_err(|e| e.to_string())?;
            Ok(Some((Arc::new(policy), model_acc)))
        }
        (None, None) => Ok(None),
    }
}

fn parse_instance_arg(domain: &dyn DomainAdapter, instance: &str) -> Result<StateKey, String> {
    let text = if Path::new(instance).is_file() {
        std::fs::read_to_string(instance).map_err(|e| format!("{instance}: {e}"))?
    } else {
        instance.to_string()
    };
    domain.parse_state(&text).map_err(|e| e.to_string())
}

fn print_result(domain: &dyn DomainAdapter, result: &SearchResult, print_path: bool) {
    println!("status: {}", result.status);
    match result.cost {
        Some(cost) => println!("cost: {cost}"),
        None => println!("cost:"),
    }
    println!("expansions: {}", result.expansions);
    println!("generations: {}", result.generations);
    println!("wall_s: {:.6}", result.wall_seconds);
    println!("bound_w: {}", result.bound_w);
    println!("f_min: {}", result.f_min_at_termination);
    if print_path {
        if let Some(path) = &result.path {
            for (i, &state) in path.states.iter().enumerate() {
                if i == 0 {
                    println!("path 0: {}", flat(domain.format_state(state)));
                } else {
                    println!(
                        "path {i}: action {} -> {}",
                        path.actions[i - 1],
                        flat(domain.format_state(state))
                    );
                }
            }
        }
    }
}

fn flat(s: String) -> String {
    s.replace('\n', "; ")
}
