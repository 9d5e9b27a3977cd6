//! N×N sliding-tile puzzle (N = 3 or 4).
//!
//! States are permutations of `{0..N²-1}` with 0 the blank, packed four bits
//! per cell: nibble `c` of the key holds the tile sitting on cell `c`. The
//! goal places the blank on cell 0 and tiles `1..N²-1` in reading order
//! (Korf's convention). Actions move the *blank*: Up=0, Down=1, Left=2,
//! Right=3.

use crate::domain::{DomainAdapter, ParseError, StateKey};

pub const TILE_UP: usize = 0;
pub const TILE_DOWN: usize = 1;
pub const TILE_LEFT: usize = 2;
pub const TILE_RIGHT: usize = 3;

#[derive(Debug, Clone)]
pub struct TileDomain {
    n: usize,
    size: usize,
    id: String,
}

impl TileDomain {
    /// `n` is the board side; only 3 and 4 fit the 4-bit cell packing.
    pub fn new(n: usize) -> Self {
        assert!(n == 3 || n == 4, "tile domain supports N=3 or N=4");
        let size = n * n;
        TileDomain {
            n,
            size,
            id: format!("tile{}", size - 1),
        }
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn encode(&self, cells: &[u8]) -> StateKey {
        debug_assert_eq!(cells.len(), self.size);
        let mut key = 0u64;
        for (c, &t) in cells.iter().enumerate() {
            key |= (t as u64) << (4 * c);
        }
        key
    }

    pub fn decode(&self, key: StateKey) -> Vec<u8> {
        (0..self.size).map(|c| ((key >> (4 * c)) & 0xF) as u8).collect()
    }

    fn blank_cell(&self, key: StateKey) -> usize {
        for c in 0..self.size {
            if (key >> (4 * c)) & 0xF == 0 {
                return c;
            }
        }
        unreachable!("state without blank tile");
    }

    /// Cell the blank moves to, if the move stays on the board.
    fn blank_target(&self, blank: usize, action: usize) -> Option<usize> {
        let (row, col) = (blank / self.n, blank % self.n);
        match action {
            TILE_UP if row > 0 => Some(blank - self.n),
            TILE_DOWN if row + 1 < self.n => Some(blank + self.n),
            TILE_LEFT if col > 0 => Some(blank - 1),
            TILE_RIGHT if col + 1 < self.n => Some(blank + 1),
            _ => None,
        }
    }

    fn swap(&self, key: StateKey, a: usize, b: usize) -> StateKey {
        let ta = (key >> (4 * a)) & 0xF;
        let tb = (key >> (4 * b)) & 0xF;
        let mut k = key & !(0xFu64 << (4 * a)) & !(0xFu64 << (4 * b));
        k |= tb << (4 * a);
        k |= ta << (4 * b);
        k
    }

    /// Reachability from the canonical goal. Every blank move is a
    /// transposition and changes the blank's taxicab distance from cell 0 by
    /// one, so permutation sign times blank-distance parity is invariant.
    pub fn is_solvable(&self, key: StateKey) -> bool {
        let cells = self.decode(key);
        let mut inversions = 0usize;
        for i in 0..self.size {
            for j in i + 1..self.size {
                if cells[i] > cells[j] {
                    inversions += 1;
                }
            }
        }
        let blank = self.blank_cell(key);
        let taxicab = blank / self.n + blank % self.n;
        inversions % 2 == taxicab % 2
    }

    fn manhattan(&self, cells: &[u8]) -> u32 {
        let mut total = 0u32;
        for (c, &t) in cells.iter().enumerate() {
            if t == 0 {
                continue;
            }
            let goal = t as usize;
            let dr = (c / self.n).abs_diff(goal / self.n);
            let dc = (c % self.n).abs_diff(goal % self.n);
            total += (dr + dc) as u32;
        }
        total
    }

    /// Added cost for tiles that sit in their goal line in reversed order.
    /// Each conflict resolution removes the most conflicted tile and charges
    /// two extra moves.
    fn linear_conflicts(&self, cells: &[u8]) -> u32 {
        let mut extra = 0u32;
        let mut line: Vec<usize> = Vec::with_capacity(self.n);
        for row in 0..self.n {
            line.clear();
            for col in 0..self.n {
                let t = cells[row * self.n + col] as usize;
                if t != 0 && t / self.n == row {
                    line.push(t % self.n); // goal column, in current order
                }
            }
            extra += Self::line_conflicts(&line);
        }
        for col in 0..self.n {
            line.clear();
            for row in 0..self.n {
                let t = cells[row * self.n + col] as usize;
                if t != 0 && t % self.n == col {
                    line.push(t / self.n); // goal row, in current order
                }
            }
            extra += Self::line_conflicts(&line);
        }
        extra
    }

    fn line_conflicts(goal_positions: &[usize]) -> u32 {
        let k = goal_positions.len();
        let mut degree = vec![0u32; k];
        let mut alive = vec![true; k];
        for i in 0..k {
            for j in i + 1..k {
                if goal_positions[i] > goal_positions[j] {
                    degree[i] += 1;
                    degree[j] += 1;
                }
            }
        }
        let mut extra = 0u32;
        loop {
            let Some(worst) = (0..k)
                .filter(|&i| alive[i] && degree[i] > 0)
                .max_by_key(|&i| degree[i])
            else {
                return extra;
            };
            alive[worst] = false;
            for j in 0..k {
                if alive[j] && degree[j] > 0 {
                    let conflicting = (worst < j && goal_positions[worst] > goal_positions[j])
                        || (j < worst && goal_positions[j] > goal_positions[worst]);
                    if conflicting {
                        degree[j] -= 1;
                    }
                }
            }
            degree[worst] = 0;
            extra += 2;
        }
    }
}

impl DomainAdapter for TileDomain {
    fn id(&self) -> &str {
        &self.id
    }

    fn action_count(&self) -> usize {
        4
    }

    fn goal(&self) -> StateKey {
        let cells: Vec<u8> = (0..self.size as u8).collect();
        self.encode(&cells)
    }

    fn applicable_actions(&self, state: StateKey) -> Vec<usize> {
        let blank = self.blank_cell(state);
        (0..4)
            .filter(|&a| self.blank_target(blank, a).is_some())
            .collect()
    }

    fn successor(&self, state: StateKey, action: usize) -> Option<StateKey> {
        if action >= 4 {
            return None;
        }
        let blank = self.blank_cell(state);
        let target = self.blank_target(blank, action)?;
        Some(self.swap(state, blank, target))
    }

    fn predecessors(&self, state: StateKey) -> Vec<(StateKey, usize)> {
        // Up/Down and Left/Right are mutual inverses (a XOR 1).
        (0..4usize)
            .filter_map(|a| self.successor(state, a ^ 1).map(|p| (p, a)))
            .collect()
    }

    fn heuristic(&self, state: StateKey) -> f64 {
        let cells = self.decode(state);
        (self.manhattan(&cells) + self.linear_conflicts(&cells)) as f64
    }

    fn parse_state(&self, text: &str) -> Result<StateKey, ParseError> {
        let mut cells = Vec::with_capacity(self.size);
        for (lineno, line) in text.lines().enumerate() {
            for raw in line.split_whitespace() {
                let col = line.find(raw).unwrap_or(0) + 1;
                let value: usize = raw.parse().map_err(|_| {
                    ParseError::syntax(lineno + 1, col, format!("expected integer, got {raw:?}"))
                })?;
                if value >= self.size {
                    return Err(ParseError::syntax(
                        lineno + 1,
                        col,
                        format!("tile {value} out of range 0..{}", self.size),
                    ));
                }
                cells.push(value as u8);
            }
        }
        if cells.len() != self.size {
            return Err(ParseError::syntax(
                1,
                1,
                format!("expected {} tiles, got {}", self.size, cells.len()),
            ));
        }
        let mut seen = vec![false; self.size];
        for &t in &cells {
            if seen[t as usize] {
                return Err(ParseError::syntax(1, 1, format!("duplicate tile {t}")));
            }
            seen[t as usize] = true;
        }
        let key = self.encode(&cells);
        if !self.is_solvable(key) {
            return Err(ParseError::Unsolvable(
                "tile permutation has the wrong parity for the blank-first goal".into(),
            ));
        }
        Ok(key)
    }

    fn format_state(&self, state: StateKey) -> String {
        let cells = self.decode(state);
        cells
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}
