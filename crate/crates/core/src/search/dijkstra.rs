//! Exhaustive reverse Dijkstra from the goal over domain predecessors.
//!
//! Doubles as the optimality oracle for every benchmark assertion and as
//! the input for synthetic policy construction. Memory-bounded: the run
//! fails loudly, naming the state count reached, instead of thrashing.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ordered_float::OrderedFloat;
use thiserror::Error;

use crate::domain::{DomainAdapter, StateKey};

const MAGIC: &[u8; 4] = b"CT01";

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("state budget exceeded: {reached} states enumerated, limit {limit}")]
    MemoryBudget { reached: usize, limit: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: expected \"CT01\"")]
    BadMagic,
    #[error("cost table file truncated or malformed: {0}")]
    Malformed(String),
}

/// Exact cost-to-go for every state that can reach the goal.
#[derive(Debug, Clone)]
pub struct CostTable {
    domain_id: String,
    map: HashMap<StateKey, f64>,
    keys: Vec<StateKey>,
}

impl CostTable {
    fn new(domain_id: String, map: HashMap<StateKey, f64>) -> Self {
        let mut keys: Vec<StateKey> = map.keys().copied().collect();
        keys.sort_unstable();
        CostTable {
            domain_id,
            map,
            keys,
        }
    }

    pub fn domain_id(&self) -> &str {
        &self.domain_id
    }

    pub fn get(&self, state: StateKey) -> Option<f64> {
        self.map.get(&state).copied()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Covered states, ascending.
    pub fn keys(&self) -> &[StateKey] {
        &self.keys
    }

    pub fn max_cost(&self) -> f64 {
        self.map.values().fold(0.0, |a, &b| a.max(b))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), OracleError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        let id = self.domain_id.as_bytes();
        w.write_all(&(id.len() as u32).to_le_bytes())?;
        w.write_all(id)?;
        w.write_all(&(self.keys.len() as u64).to_le_bytes())?;
        for &key in &self.keys {
            w.write_all(&key.to_le_bytes())?;
            w.write_all(&self.map[&key].to_bits().to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, OracleError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(OracleError::BadMagic);
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let id_len = u32::from_le_bytes(b4) as usize;
        let mut id = vec![0u8; id_len];
        r.read_exact(&mut id)?;
        let domain_id =
            String::from_utf8(id).map_err(|e| OracleError::Malformed(e.to_string()))?;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let count = u64::from_le_bytes(b8) as usize;
        let mut map = HashMap::with_capacity(count);
        let mut prev: Option<StateKey> = None;
        for _ in 0..count {
            r.read_exact(&mut b8)?;
            let key = u64::from_le_bytes(b8);
            if prev.is_some_and(|p| key <= p) {
                return Err(OracleError::Malformed("keys not strictly ascending".into()));
            }
            prev = Some(key);
            r.read_exact(&mut b8)?;
            let cost = f64::from_bits(u64::from_le_bytes(b8));
            if !cost.is_finite() || cost < 0.0 {
                return Err(OracleError::Malformed(format!("cost {cost} for {key:#x}")));
            }
            map.insert(key, cost);
        }
        Ok(CostTable::new(domain_id, map))
    }
}

/// Solve the whole space backwards from the goal. States that cannot reach
/// the goal are simply absent from the table.
pub fn reverse_dijkstra(
    domain: &dyn DomainAdapter,
    max_states: usize,
) -> Result<CostTable, OracleError> {
    let mut dist: HashMap<StateKey, f64> = HashMap::new();
    let mut heap: BinaryHeap<Reverse<(OrderedFloat<f64>, StateKey)>> = BinaryHeap::new();
    dist.insert(domain.goal(), 0.0);
    heap.push(Reverse((OrderedFloat(0.0), domain.goal())));

    while let Some(Reverse((OrderedFloat(d), state))) = heap.pop() {
        if d > dist[&state] {
            continue; // superseded entry
        }
        for (pred, action) in domain.predecessors(state) {
            let cand = d + domain.edge_cost(pred, action);
            let known = dist.get(&pred).copied();
            if known.is_none_or(|k| cand < k) {
                if known.is_none() && dist.len() >= max_states {
                    return Err(OracleError::MemoryBudget {
                        reached: dist.len(),
                        limit: max_states,
                    });
                }
                dist.insert(pred, cand);
                heap.push(Reverse((OrderedFloat(cand), pred)));
            }
        }
    }
    Ok(CostTable::new(domain.id().to_string(), dist))
}
