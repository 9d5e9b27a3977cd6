//! Four-operator blocks world with a grounded delete-relaxation h_max.
//!
//! `B` blocks, a table, and a one-block arm. The goal is the single tower
//! with `b1` on the table and `bB` on top, arm empty. States pack one nibble
//! per block: `0` = on the table, `j + 1` = on block `j`, `0xF` = held by
//! the arm.
//!
//! The global action index set is the full grounding (128 actions at B = 8):
//! pick-up by block index, then put-down by block index, then stack ordered
//! by (held, target) lexicographic, then unstack ordered by (top, below)
//! lexicographic.

use dashmap::DashMap;

use crate::domain::{DomainAdapter, ParseError, StateKey};

const HELD: u64 = 0xF;

/// Grounded STRIPS model of one blocks-world instance: indexed propositions
/// plus precondition/add/delete sets for every grounded action, all with
/// unit cost.
#[derive(Debug)]
pub struct GroundedStrips {
    pub prop_count: usize,
    pub actions: Vec<GroundedAction>,
    /// Actions listed per precondition proposition.
    consumers: Vec<Vec<u16>>,
}

#[derive(Debug, Clone)]
pub struct GroundedAction {
    pub pre: Vec<u16>,
    pub add: Vec<u16>,
    pub del: Vec<u16>,
}

impl GroundedStrips {
    fn new(prop_count: usize, actions: Vec<GroundedAction>) -> Self {
        let mut consumers = vec![Vec::new(); prop_count];
        for (i, action) in actions.iter().enumerate() {
            for &p in &action.pre {
                consumers[p as usize].push(i as u16);
            }
        }
        GroundedStrips {
            prop_count,
            actions,
            consumers,
        }
    }
}

/// Delete-relaxation h_max: Dijkstra over propositions where an action fires
/// once its most expensive precondition settles. Returns `f64::INFINITY`
/// when some goal proposition is unreachable.
pub fn hmax(grounded: &GroundedStrips, state_props: &[u16], goal_props: &[u16]) -> f64 {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    const UNREACHED: u32 = u32::MAX;
    let mut cost = vec![UNREACHED; grounded.prop_count];
    let mut settled = vec![false; grounded.prop_count];
    let mut remaining: Vec<u16> = grounded
        .actions
        .iter()
        .map(|a| a.pre.len() as u16)
        .collect();
    let mut heap: BinaryHeap<Reverse<(u32, u16)>> = BinaryHeap::new();
    for &p in state_props {
        cost[p as usize] = 0;
        heap.push(Reverse((0, p)));
    }
    if goal_props.is_empty() {
        return 0.0;
    }
    // Every goal proposition settles eventually (or the heap drains); the
    // last one to settle carries the max because Dijkstra settles in
    // ascending cost order.
    let mut goal_left = goal_props.len();
    while let Some(Reverse((c, p))) = heap.pop() {
        let p = p as usize;
        if settled[p] {
            continue;
        }
        settled[p] = true;
        if goal_props.contains(&(p as u16)) {
            goal_left -= 1;
            if goal_left == 0 {
                return c as f64;
            }
        }
        for &ai in &grounded.consumers[p] {
            let ai = ai as usize;
            remaining[ai] -= 1;
            if remaining[ai] == 0 {
                let through = c + 1;
                for &q in &grounded.actions[ai].add {
                    let q = q as usize;
                    if through < cost[q] {
                        cost[q] = through;
                        heap.push(Reverse((through, q as u16)));
                    }
                }
            }
        }
    }
    f64::INFINITY
}

#[derive(Debug)]
pub struct BlocksDomain {
    b: usize,
    id: String,
    grounded: GroundedStrips,
    goal_props: Vec<u16>,
    goal_key: StateKey,
    heuristic_cache: DashMap<StateKey, f64>,
}

impl BlocksDomain {
    pub fn new(b: usize) -> Self {
        assert!((2..=13).contains(&b), "blocks domain supports 2..=13 blocks");
        let grounded = Self::ground(b);
        let mut goal_nibbles = vec![0u64; b];
        for (i, nib) in goal_nibbles.iter_mut().enumerate() {
            *nib = i as u64; // block 0 on table, block i on block i-1
        }
        let goal_key = goal_nibbles
            .iter()
            .enumerate()
            .fold(0u64, |k, (i, &v)| k | (v << (4 * i)));
        let mut goal_props = vec![Self::p_ontable(b, 0)];
        for i in 1..b {
            goal_props.push(Self::p_on(b, i, i - 1));
        }
        BlocksDomain {
            b,
            id: format!("blocks{b}"),
            grounded,
            goal_props,
            goal_key,
            heuristic_cache: DashMap::new(),
        }
    }

    pub fn block_count(&self) -> usize {
        self.b
    }

    pub fn grounded(&self) -> &GroundedStrips {
        &self.grounded
    }

    // Proposition indexing.
    fn p_ontable(_b: usize, x: usize) -> u16 {
        x as u16
    }
    fn p_clear(b: usize, x: usize) -> u16 {
        (b + x) as u16
    }
    fn p_holding(b: usize, x: usize) -> u16 {
        (2 * b + x) as u16
    }
    fn p_handempty(b: usize) -> u16 {
        (3 * b) as u16
    }
    fn p_on(b: usize, x: usize, y: usize) -> u16 {
        debug_assert_ne!(x, y);
        let adj = if y < x { y } else { y - 1 };
        (3 * b + 1 + x * (b - 1) + adj) as u16
    }

    // Action indexing.
    fn a_pickup(_b: usize, x: usize) -> usize {
        x
    }
    fn a_putdown(b: usize, x: usize) -> usize {
        b + x
    }
    fn a_stack(b: usize, x: usize, y: usize) -> usize {
        let adj = if y < x { y } else { y - 1 };
        2 * b + x * (b - 1) + adj
    }
    fn a_unstack(b: usize, x: usize, y: usize) -> usize {
        let adj = if y < x { y } else { y - 1 };
        2 * b + b * (b - 1) + x * (b - 1) + adj
    }

    fn ground(b: usize) -> GroundedStrips {
        let prop_count = 3 * b + 1 + b * (b - 1);
        let mut actions = vec![
            GroundedAction {
                pre: vec![],
                add: vec![],
                del: vec![]
            };
            2 * b + 2 * b * (b - 1)
        ];
        for x in 0..b {
            actions[Self::a_pickup(b, x)] = GroundedAction {
                pre: vec![Self::p_ontable(b, x), Self::p_clear(b, x), Self::p_handempty(b)],
                add: vec![Self::p_holding(b, x)],
                del: vec![Self::p_ontable(b, x), Self::p_clear(b, x), Self::p_handempty(b)],
            };
            actions[Self::a_putdown(b, x)] = GroundedAction {
                pre: vec![Self::p_holding(b, x)],
                add: vec![Self::p_ontable(b, x), Self::p_clear(b, x), Self::p_handempty(b)],
                del: vec![Self::p_holding(b, x)],
            };
            for y in 0..b {
                if x == y {
                    continue;
                }
                actions[Self::a_stack(b, x, y)] = GroundedAction {
                    pre: vec![Self::p_holding(b, x), Self::p_clear(b, y)],
                    add: vec![Self::p_on(b, x, y), Self::p_clear(b, x), Self::p_handempty(b)],
                    del: vec![Self::p_holding(b, x), Self::p_clear(b, y)],
                };
                actions[Self::a_unstack(b, x, y)] = GroundedAction {
                    pre: vec![Self::p_on(b, x, y), Self::p_clear(b, x), Self::p_handempty(b)],
                    add: vec![Self::p_holding(b, x), Self::p_clear(b, y)],
                    del: vec![Self::p_on(b, x, y), Self::p_clear(b, x), Self::p_handempty(b)],
                };
            }
        }
        GroundedStrips::new(prop_count, actions)
    }

    fn support(&self, key: StateKey, x: usize) -> u64 {
        (key >> (4 * x)) & 0xF
    }

    fn held_block(&self, key: StateKey) -> Option<usize> {
        (0..self.b).find(|&x| self.support(key, x) == HELD)
    }

    /// Blocks with nothing on top and not in the arm.
    fn clear_mask(&self, key: StateKey) -> u32 {
        let mut covered = 0u32;
        for x in 0..self.b {
            match self.support(key, x) {
                0 => {}
                HELD => covered |= 1 << x,
                s => covered |= 1 << (s - 1), // the support has x above it
            }
        }
        !covered & ((1 << self.b) - 1)
    }

    fn set_support(&self, key: StateKey, x: usize, value: u64) -> StateKey {
        (key & !(0xFu64 << (4 * x))) | (value << (4 * x))
    }

    pub fn state_props(&self, key: StateKey) -> Vec<u16> {
        let b = self.b;
        let mut props = Vec::with_capacity(2 * b + 1);
        let clear = self.clear_mask(key);
        let mut held = None;
        for x in 0..b {
            match self.support(key, x) {
                0 => props.push(Self::p_ontable(b, x)),
                HELD => held = Some(x),
                s => props.push(Self::p_on(b, x, (s - 1) as usize)),
            }
            if clear & (1 << x) != 0 {
                props.push(Self::p_clear(b, x));
            }
        }
        match held {
            Some(x) => props.push(Self::p_holding(b, x)),
            None => props.push(Self::p_handempty(b)),
        }
        props
    }

    fn block_name(&self, x: usize) -> String {
        format!("b{}", x + 1)
    }

    fn parse_block(&self, token: &str, line: usize) -> Result<usize, ParseError> {
        let idx = token
            .strip_prefix('b')
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&i| i >= 1 && i <= self.b)
            .ok_or_else(|| {
                ParseError::syntax(line, 1, format!("unknown block {token:?} (expected b1..b{})", self.b))
            })?;
        Ok(idx - 1)
    }
}

impl DomainAdapter for BlocksDomain {
    fn id(&self) -> &str {
        &self.id
    }

    fn action_count(&self) -> usize {
        2 * self.b + 2 * self.b * (self.b - 1)
    }

    fn goal(&self) -> StateKey {
        self.goal_key
    }

    fn applicable_actions(&self, state: StateKey) -> Vec<usize> {
        let b = self.b;
        let clear = self.clear_mask(state);
        let mut actions = Vec::with_capacity(b + 1);
        match self.held_block(state) {
            None => {
                // Pick-ups first (indices 0..b), then unstacks; both emitted
                // in ascending block order, so the whole list is ascending.
                for x in 0..b {
                    if clear & (1 << x) != 0 && self.support(state, x) == 0 {
                        actions.push(Self::a_pickup(b, x));
                    }
                }
                for x in 0..b {
                    let s = self.support(state, x);
                    if clear & (1 << x) != 0 && s != 0 && s != HELD {
                        actions.push(Self::a_unstack(b, x, (s - 1) as usize));
                    }
                }
            }
            Some(x) => {
                actions.push(Self::a_putdown(b, x));
                for y in 0..b {
                    if y != x && clear & (1 << y) != 0 {
                        actions.push(Self::a_stack(b, x, y));
                    }
                }
            }
        }
        actions
    }

    fn successor(&self, state: StateKey, action: usize) -> Option<StateKey> {
        let b = self.b;
        let clear = self.clear_mask(state);
        let held = self.held_block(state);
        if action < b {
            // pick-up(x)
            let x = action;
            (held.is_none() && self.support(state, x) == 0 && clear & (1 << x) != 0)
                .then(|| self.set_support(state, x, HELD))
        } else if action < 2 * b {
            // put-down(x)
            let x = action - b;
            (held == Some(x)).then(|| self.set_support(state, x, 0))
        } else if action < 2 * b + b * (b - 1) {
            // stack(x, y)
            let rel = action - 2 * b;
            let x = rel / (b - 1);
            let adj = rel % (b - 1);
            let y = if adj < x { adj } else { adj + 1 };
            (held == Some(x) && clear & (1 << y) != 0)
                .then(|| self.set_support(state, x, y as u64 + 1))
        } else if action < self.action_count() {
            // unstack(x, y)
            let rel = action - 2 * b - b * (b - 1);
            let x = rel / (b - 1);
            let adj = rel % (b - 1);
            let y = if adj < x { adj } else { adj + 1 };
            (held.is_none() && clear & (1 << x) != 0 && self.support(state, x) == y as u64 + 1)
                .then(|| self.set_support(state, x, HELD))
        } else {
            None
        }
    }

    fn predecessors(&self, state: StateKey) -> Vec<(StateKey, usize)> {
        let b = self.b;
        self.applicable_actions(state)
            .into_iter()
            .map(|a| {
                let t = self.successor(state, a).expect("applicable action");
                let inverse = if a < b {
                    Self::a_putdown(b, a)
                } else if a < 2 * b {
                    Self::a_pickup(b, a - b)
                } else if a < 2 * b + b * (b - 1) {
                    a + b * (b - 1) // stack(x, y) -> unstack(x, y)
                } else {
                    a - b * (b - 1) // unstack(x, y) -> stack(x, y)
                };
                (t, inverse)
            })
            .collect()
    }

    fn heuristic(&self, state: StateKey) -> f64 {
        if let Some(h) = self.heuristic_cache.get(&state) {
            return *h;
        }
        let h = hmax(&self.grounded, &self.state_props(state), &self.goal_props);
        self.heuristic_cache.insert(state, h);
        h
    }

    fn parse_state(&self, text: &str) -> Result<StateKey, ParseError> {
        let mut supports: Vec<Option<u64>> = vec![None; self.b];
        let mut held: Option<usize> = None;
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            match tokens[0] {
                "on" if tokens.len() == 3 => {
                    let x = self.parse_block(tokens[1], lineno)?;
                    if supports[x].is_some() {
                        return Err(ParseError::syntax(
                            lineno,
                            1,
                            format!("block {} declared twice", tokens[1]),
                        ));
                    }
                    supports[x] = Some(if tokens[2] == "table" {
                        0
                    } else {
                        self.parse_block(tokens[2], lineno)? as u64 + 1
                    });
                }
                "holding" if tokens.len() == 2 => {
                    let x = self.parse_block(tokens[1], lineno)?;
                    if held.is_some() {
                        return Err(ParseError::syntax(lineno, 1, "arm already holding a block"));
                    }
                    held = Some(x);
                }
                _ => {
                    return Err(ParseError::syntax(
                        lineno,
                        1,
                        format!("expected \"on <block> <block|table>\" or \"holding <block>\", got {line:?}"),
                    ))
                }
            }
        }
        if let Some(x) = held {
            if supports[x].is_some() {
                return Err(ParseError::syntax(1, 1, "held block also has an on-declaration"));
            }
            supports[x] = Some(HELD);
        }
        let mut key = 0u64;
        for (x, s) in supports.iter().enumerate() {
            let s = s.ok_or_else(|| {
                ParseError::syntax(1, 1, format!("no placement given for {}", self.block_name(x)))
            })?;
            key |= s << (4 * x);
        }
        // Validate: supports form a forest rooted at the table, one block per
        // support, held block carries nothing.
        let mut load = vec![0usize; self.b];
        for x in 0..self.b {
            match self.support(key, x) {
                0 | HELD => {}
                s => {
                    let under = (s - 1) as usize;
                    if self.support(key, under) == HELD {
                        return Err(ParseError::Unsolvable(format!(
                            "{} rests on held block {}",
                            self.block_name(x),
                            self.block_name(under)
                        )));
                    }
                    load[under] += 1;
                    if load[under] > 1 {
                        return Err(ParseError::Unsolvable(format!(
                            "two blocks directly on {}",
                            self.block_name(under)
                        )));
                    }
                }
            }
        }
        for x in 0..self.b {
            let mut cursor = x;
            for _ in 0..=self.b {
                match self.support(key, cursor) {
                    0 | HELD => break,
                    s => cursor = (s - 1) as usize,
                }
                if cursor == x {
                    return Err(ParseError::Unsolvable("on-relation contains a cycle".into()));
                }
            }
        }
        Ok(key)
    }

    fn format_state(&self, state: StateKey) -> String {
        let mut parts = Vec::with_capacity(self.b);
        for x in 0..self.b {
            match self.support(state, x) {
                0 => parts.push(format!("on {} table", self.block_name(x))),
                HELD => parts.push(format!("holding {}", self.block_name(x))),
                s => parts.push(format!(
                    "on {} {}",
                    self.block_name(x),
                    self.block_name((s - 1) as usize)
                )),
            }
        }
        parts.join("\n")
    }
}
