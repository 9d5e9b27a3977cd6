//! Priority queues with lazy deletion.
//!
//! Binary heaps cannot remove from the middle, so every queue here pairs a
//! heap with per-state generation stamps: re-inserting a state bumps its
//! stamp and strands the old heap entry, which is discarded (and counted)
//! when it surfaces. [`QueuePair`] additionally keeps an f-ordered index
//! over the open set so bound growth moves only the affected nodes into the
//! focal queue instead of scanning all of it.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use ordered_float::OrderedFloat;

use crate::domain::StateKey;

use super::BOUND_EPS;

/// Open-queue entry: min f, ties by max g, then insertion order.
#[derive(Debug, Clone, Copy)]
struct OpenEntry {
    f: f64,
    g: f64,
    fifo: u64,
    key: StateKey,
    stamp: u32,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for OpenEntry {}
impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap pops the maximum; Greater means extracted first.
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.fifo.cmp(&self.fifo))
    }
}

/// Focal-queue entry: min key value, ties by min f, then max g, then
/// insertion order.
#[derive(Debug, Clone, Copy)]
struct FocalEntry {
    value: f64,
    f: f64,
    g: f64,
    fifo: u64,
    key: StateKey,
    stamp: u32,
}

impl PartialEq for FocalEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for FocalEntry {}
impl PartialOrd for FocalEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FocalEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.f.total_cmp(&self.f))
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.fifo.cmp(&self.fifo))
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Slot {
    in_queue: bool,
    stamp: u32,
}

/// Single lazy-deletion open list (weighted A*).
#[derive(Debug, Default)]
pub struct OpenList {
    heap: BinaryHeap<OpenEntry>,
    slots: HashMap<StateKey, Slot>,
    fifo: u64,
    live: usize,
    pub stale_pops: u64,
}

impl OpenList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert the state or supersede its previous entry.
    pub fn upsert(&mut self, key: StateKey, f: f64, g: f64) {
        let slot = self.slots.entry(key).or_default();
        if !slot.in_queue {
            self.live += 1;
        }
        slot.stamp += 1;
        slot.in_queue = true;
        self.fifo += 1;
        self.heap.push(OpenEntry {
            f,
            g,
            fifo: self.fifo,
            key,
            stamp: slot.stamp,
        });
    }

    pub fn pop(&mut self) -> Option<(StateKey, f64)> {
        while let Some(entry) = self.heap.pop() {
            let slot = self.slots.get_mut(&entry.key).expect("entry without slot");
            if slot.in_queue && slot.stamp == entry.stamp {
                slot.in_queue = false;
                self.live -= 1;
                return Some((entry.key, entry.f));
            }
            self.stale_pops += 1;
        }
        None
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }
}

/// Two f-ordered lists sharing one stamp space; extraction drains the
/// preferred list before touching the regular one.
#[derive(Debug, Default)]
pub struct DualOpenList {
    preferred: BinaryHeap<OpenEntry>,
    regular: BinaryHeap<OpenEntry>,
    slots: HashMap<StateKey, Slot>,
    fifo: u64,
    live: usize,
    pub stale_pops: u64,
}

impl DualOpenList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn upsert(&mut self, key: StateKey, f: f64, g: f64, preferred: bool) {
        let slot = self.slots.entry(key).or_default();
        if !slot.in_queue {
            self.live += 1;
        }
        slot.stamp += 1;
        slot.in_queue = true;
        self.fifo += 1;
        let entry = OpenEntry {
            f,
            g,
            fifo: self.fifo,
            key,
            stamp: slot.stamp,
        };
        if preferred {
            self.preferred.push(entry);
        } else {
            self.regular.push(entry);
        }
    }

    pub fn pop(&mut self) -> Option<(StateKey, f64)> {
        for side in [true, false] {
            let heap = if side { &mut self.preferred } else { &mut self.regular };
            while let Some(entry) = heap.pop() {
                let slot = self.slots.get_mut(&entry.key).expect("entry without slot");
                if slot.in_queue && slot.stamp == entry.stamp {
                    slot.in_queue = false;
                    self.live -= 1;
                    return Some((entry.key, entry.f));
                }
                self.stale_pops += 1;
            }
        }
        None
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct PairSlot {
    in_open: bool,
    open_stamp: u32,
    in_focal: bool,
    focal_stamp: u32,
    f: f64,
    g: f64,
    fifo: u64,
}

/// The open/focal queue pair. Focal membership (after stale filtering) is
/// always a subset of open membership; extraction removes a node from both.
#[derive(Debug, Default)]
pub struct QueuePair {
    open: BinaryHeap<OpenEntry>,
    focal: BinaryHeap<FocalEntry>,
    f_index: BTreeSet<(OrderedFloat<f64>, StateKey)>,
    slots: HashMap<StateKey, PairSlot>,
    fifo: u64,
    open_live: usize,
    focal_live: usize,
    pub stale_open_pops: u64,
    pub stale_focal_pops: u64,
}

impl QueuePair {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn open_len(&self) -> usize {
        self.open_live
    }

    pub fn focal_len(&self) -> usize {
        self.focal_live
    }

    pub fn f_of(&self, key: StateKey) -> Option<f64> {
        self.slots
            .get(&key)
            .filter(|s| s.in_open)
            .map(|s| s.f)
    }

    pub fn contains_focal(&self, key: StateKey) -> bool {
        self.slots.get(&key).is_some_and(|s| s.in_focal)
    }

    /// Insert into the open set or supersede the previous entry with new
    /// f/g values (the f-index follows along).
    pub fn upsert_open(&mut self, key: StateKey, f: f64, g: f64) {
        let slot = self.slots.entry(key).or_default();
        if slot.in_open {
            self.f_index.remove(&(OrderedFloat(slot.f), key));
        } else {
            self.open_live += 1;
        }
        slot.open_stamp += 1;
        slot.in_open = true;
        slot.f = f;
        slot.g = g;
        self.fifo += 1;
        slot.fifo = self.fifo;
        let entry = OpenEntry {
            f,
            g,
            fifo: self.fifo,
            key,
            stamp: slot.open_stamp,
        };
        self.open.push(entry);
        self.f_index.insert((OrderedFloat(f), key));
    }

    /// Admit an open node into the focal queue under ordering key `value`.
    pub fn insert_focal(&mut self, key: StateKey, value: f64) {
        let slot = self.slots.get_mut(&key).expect("focal insert of unknown state");
        debug_assert!(slot.in_open, "focal membership requires open membership");
        if !slot.in_focal {
            self.focal_live += 1;
        }
        slot.focal_stamp += 1;
        slot.in_focal = true;
        self.focal.push(FocalEntry {
            value,
            f: slot.f,
            g: slot.g,
            fifo: slot.fifo,
            key,
            stamp: slot.focal_stamp,
        });
    }

    /// Non-stale open minimum, without removing it.
    pub fn peek_open(&mut self) -> Option<(StateKey, f64)> {
        while let Some(entry) = self.open.peek().copied() {
            let valid = self
                .slots
                .get(&entry.key)
                .is_some_and(|s| s.in_open && s.open_stamp == entry.stamp);
            if valid {
                return Some((entry.key, entry.f));
            }
            self.open.pop();
            self.stale_open_pops += 1;
        }
        None
    }

    /// Extract the focal minimum; the node leaves both queues.
    pub fn pop_focal(&mut self) -> Option<StateKey> {
        while let Some(entry) = self.focal.pop() {
            let Some(slot) = self.slots.get_mut(&entry.key) else {
                self.stale_focal_pops += 1;
                continue;
            };
            if slot.in_focal && slot.focal_stamp == entry.stamp && slot.in_open {
                slot.in_focal = false;
                slot.in_open = false;
                self.focal_live -= 1;
                self.open_live -= 1;
                self.f_index.remove(&(OrderedFloat(slot.f), entry.key));
                return Some(entry.key);
            }
            self.stale_focal_pops += 1;
        }
        None
    }

    /// Move every open node with `old_bound < f <= new_bound` (within the
    /// shared tolerance) into the focal queue, exactly once each. The scan
    /// ranges over the f-index, so the cost is proportional to the number of
    /// nodes moved, not the open size.
    pub fn update_lower_bound(
        &mut self,
        old_bound: f64,
        new_bound: f64,
        mut focal_value_of: impl FnMut(StateKey) -> f64,
    ) {
        if new_bound <= old_bound {
            return;
        }
        use std::ops::Bound::{Excluded, Included};
        let lo = Excluded((OrderedFloat(old_bound + BOUND_EPS), StateKey::MAX));
        let hi = Included((OrderedFloat(new_bound + BOUND_EPS), StateKey::MAX));
        let moved: Vec<StateKey> = self.f_index.range((lo, hi)).map(|&(_, k)| k).collect();
        for key in moved {
            let slot = self.slots[&key];
            debug_assert!(slot.in_open, "f-index entry for a non-open state");
            if !slot.in_focal {
                let value = focal_value_of(key);
                self.insert_focal(key, value);
            }
        }
    }

    /// Non-stale open membership with f-values; O(table), for validation.
    pub fn open_members(&self) -> Vec<(StateKey, f64)> {
        self.slots
            .iter()
            .filter(|(_, s)| s.in_open)
            .map(|(&k, s)| (k, s.f))
            .collect()
    }

    /// Non-stale focal membership; O(table), for validation.
    pub fn focal_members(&self) -> Vec<StateKey> {
        self.slots
            .iter()
            .filter(|(_, s)| s.in_focal)
            .map(|(&k, _)| k)
            .collect()
    }
}
