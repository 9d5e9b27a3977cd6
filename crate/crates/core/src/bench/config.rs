//! Sweep configuration: flat `key = value` text, lists by repeating a key.
//!
//! ```text
//! domain = tile8
//! instances = 100
//! seed = 7
//! algo = wastar
//! algo = focal:disc2
//! bound = 1.2
//! bound = 1.5
//! acc = 0.9
//! acc = 0.95
//! output = sweep.csv
//! ```

use std::path::PathBuf;

use crate::bench::BenchError;
use crate::focal_heuristics::FocalKind;
use crate::search::SearchLimits;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmSpec {
    Wastar,
    Prefastar,
    Focal(FocalKind),
}

impl AlgorithmSpec {
    pub fn parse(token: &str) -> Result<Self, BenchError> {
        match token {
            "wastar" => Ok(AlgorithmSpec::Wastar),
            "prefastar" => Ok(AlgorithmSpec::Prefastar),
            other => {
                if let Some(kind) = other.strip_prefix("focal:") {
                    FocalKind::parse(kind).map(AlgorithmSpec::Focal).ok_or_else(|| {
                        BenchError::Config(format!(
                            "unknown focal heuristic {kind:?}; valid: score1, score2, score3, score4, disc1, disc2, disc3"
                        ))
                    })
                } else {
                    Err(BenchError::Config(format!(
                        "unknown algorithm {other:?}; valid: wastar, prefastar, focal:<kind>"
                    )))
                }
            }
        }
    }

    pub fn needs_policy(&self) -> bool {
        !matches!(self, AlgorithmSpec::Wastar)
    }

    pub fn uses_bounds(&self) -> bool {
        !matches!(self, AlgorithmSpec::Prefastar)
    }
}

impl std::fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlgorithmSpec::Wastar => f.write_str("wastar"),
            AlgorithmSpec::Prefastar => f.write_str("prefastar"),
            AlgorithmSpec::Focal(kind) => write!(f, "focal:{kind}"),
        }
    }
}

/// Where start states come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceSource {
    /// `count` states drawn uniformly (without replacement) from the
    /// enumerated reachable space, goal excluded.
    Sampled { count: usize },
    /// Instances read from a file; tile/pancake one per line, blocks in
    /// blank-line separated records.
    File { path: PathBuf },
    /// Every reachable non-goal state, ascending. Opt-in; large.
    FullSpace,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub domain: String,
    pub source: InstanceSource,
    /// Sidecar file of published optimal costs, one per instance line.
    pub opt_file: Option<PathBuf>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub bounds: Vec<f64>,
    pub accuracies: Vec<f64>,
    /// Learned mode: path to an MLP1 policy (tile15 only).
    pub model: Option<PathBuf>,
    /// Accuracy attributed to the loaded model (drives disc1).
    pub model_acc: f64,
    pub seed: u64,
    pub limits: SearchLimits,
    pub output: Option<PathBuf>,
    pub workers: usize,
    /// When false the wall_s column is left empty, making the CSV
    /// byte-reproducible across executions.
    pub timing: bool,
    pub disc3_last_edge_only: bool,
    /// State cap for the exhaustive oracle.
    pub oracle_budget: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: String::new(),
            source: InstanceSource::Sampled { count: 100 },
            opt_file: None,
            algorithms: Vec::new(),
            bounds: Vec::new(),
            accuracies: Vec::new(),
            model: None,
            model_acc: 0.875,
            seed: 0,
            limits: SearchLimits::default(),
            output: None,
            workers: 1,
            timing: true,
            disc3_last_edge_only: false,
            oracle_budget: 50_000_000,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut cfg = ExperimentConfig::default();
        let mut instances: Option<usize> = None;
        let mut instance_file: Option<PathBuf> = None;
        let mut full_space = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                BenchError::Config(format!("line {}: expected key = value, got {raw:?}", i + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                BenchError::Config(format!("line {}: invalid {what} value {value:?}", i + 1))
            };
            match key {
                "domain" => cfg.domain = value.to_string(),
                "instances" => instances = Some(value.parse().map_err(|_| bad("instances"))?),
                "instance_file" => instance_file = Some(PathBuf::from(value)),
                "opt_file" => cfg.opt_file = Some(PathBuf::from(value)),
                "full_space" => full_space = parse_bool(value).ok_or_else(|| bad("full_space"))?,
                "algo" => cfg.algorithms.push(AlgorithmSpec::parse(value)?),
                "bound" => cfg.bounds.push(value.parse().map_err(|_| bad("bound"))?),
                "acc" => cfg.accuracies.push(value.parse().map_err(|_| bad("acc"))?),
                "model" => cfg.model = Some(PathBuf::from(value)),
                "model_acc" => cfg.model_acc = value.parse().map_err(|_| bad("model_acc"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                "expansion_cap" => {
                    cfg.limits.max_expansions = value.parse().map_err(|_| bad("expansion_cap"))?
                }
                "wall_cap_s" => {
                    cfg.limits.wall_cap_seconds = value.parse().map_err(|_| bad("wall_cap_s"))?
                }
                "output" => cfg.output = Some(PathBuf::from(value)),
                "workers" => cfg.workers = value.parse().map_err(|_| bad("workers"))?,
                "timing" => cfg.timing = parse_bool(value).ok_or_else(|| bad("timing"))?,
                "disc3_last_edge_only" => {
                    cfg.disc3_last_edge_only =
                        parse_bool(value).ok_or_else(|| bad("disc3_last_edge_only"))?
                }
                "oracle_budget" => {
                    cfg.oracle_budget = value.parse().map_err(|_| bad("oracle_budget"))?
                }
                other => {
                    return Err(BenchError::Config(format!(
                        "line {}: unknown key {other:?}",
                        i + 1
                    )))
                }
            }
        }
        cfg.source = match (full_space, instance_file, instances) {
            (true, None, None) => InstanceSource::FullSpace,
            (false, Some(path), None) => InstanceSource::File { path },
            (false, None, n) => InstanceSource::Sampled { count: n.unwrap_or(100) },
            _ => {
                return Err(BenchError::Config(
                    "instances, instance_file and full_space are mutually exclusive".into(),
                ))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.domain.is_empty() {
            return Err(BenchError::Config("missing domain".into()));
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("no algo lines given".into()));
        }
        if self.algorithms.iter().any(|a| a.uses_bounds()) && self.bounds.is_empty() {
            return Err(BenchError::Config(
                "wastar/focal algorithms need at least one bound".into(),
            ));
        }
        for &w in &self.bounds {
            if !w.is_finite() || w < 1.0 {
                return Err(BenchError::Config(format!("bound {w} must be >= 1")));
            }
        }
        for &a in &self.accuracies {
            if !(0.0..=1.0).contains(&a) {
                return Err(BenchError::Config(format!("acc {a} must be in [0, 1]")));
            }
        }
        if !(0.0..=1.0).contains(&self.model_acc) {
            return Err(BenchError::Config(format!(
                "model_acc {} must be in [0, 1]",
                self.model_acc
            )));
        }
        if self.model.is_some() && !self.accuracies.is_empty() {
            return Err(BenchError::Config(
                "acc levels and a model are mutually exclusive".into(),
            ));
        }
        if self.model.is_some() && self.domain != "tile15" {
            return Err(BenchError::Config(
                "model-driven sweeps are defined for tile15".into(),
            ));
        }
        if self.model.is_some() && !matches!(self.source, InstanceSource::File { .. }) {
            return Err(BenchError::Config(
                "model-driven sweeps need instance_file (the state space is not enumerable)".into(),
            ));
        }
        if self.workers == 0 {
            return Err(BenchError::Config("workers must be at least 1".into()));
        }
        let needs_policy = self.algorithms.iter().any(|a| a.needs_policy());
        if needs_policy && self.model.is_none() && self.accuracies.is_empty() {
            return Err(BenchError::Config(
                "policy-guided algorithms need acc levels or a model".into(),
            ));
        }
        Ok(())
    }

    /// Accuracy levels actually swept: synthetic targets, or the single
    /// model level in learned mode.
    pub fn levels(&self) -> usize {
        if self.model.is_some() || self.accuracies.is_empty() {
            1
        } else {
            self.accuracies.len()
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "on" | "yes" | "1" => Some(true),
        "false" | "off" | "no" | "0" => Some(false),
        _ => None,
    }
}
