//! Pancake sorting: a stack of n distinct pancakes, sorted by prefix flips.
//!
//! States are permutations of `{1..n}` packed four bits per position; the
//! goal is the identity. Action `k` reverses the prefix of length `k + 2`
//! (a length-1 flip is a no-op and is excluded), so `|A| = n - 1`. The
//! heuristic counts size gaps between adjacent stack positions, including
//! the virtual plate of size `n + 1` below the stack.

use crate::domain::{DomainAdapter, ParseError, StateKey};

#[derive(Debug, Clone)]
pub struct PancakeDomain {
    n: usize,
    id: String,
}

impl PancakeDomain {
    pub fn new(n: usize) -> Self {
        assert!((2..=15).contains(&n), "pancake domain supports 2..=15 pancakes");
        PancakeDomain {
            n,
            id: format!("pancake{n}"),
        }
    }

    pub fn stack_size(&self) -> usize {
        self.n
    }

    pub fn encode(&self, stack: &[u8]) -> StateKey {
        debug_assert_eq!(stack.len(), self.n);
        let mut key = 0u64;
        for (i, &v) in stack.iter().enumerate() {
            key |= (v as u64) << (4 * i);
        }
        key
    }

    pub fn decode(&self, key: StateKey) -> Vec<u8> {
        (0..self.n).map(|i| ((key >> (4 * i)) & 0xF) as u8).collect()
    }

    fn flip(&self, key: StateKey, len: usize) -> StateKey {
        let mut stack = self.decode(key);
        stack[..len].reverse();
        self.encode(&stack)
    }
}

impl DomainAdapter for PancakeDomain {
    fn id(&self) -> &str {
        &self.id
    }

    fn action_count(&self) -> usize {
        self.n - 1
    }

    fn goal(&self) -> StateKey {
        let stack: Vec<u8> = (1..=self.n as u8).collect();
        self.encode(&stack)
    }

    fn applicable_actions(&self, _state: StateKey) -> Vec<usize> {
        (0..self.n - 1).collect()
    }

    fn successor(&self, state: StateKey, action: usize) -> Option<StateKey> {
        if action >= self.n - 1 {
            return None;
        }
        Some(self.flip(state, action + 2))
    }

    fn predecessors(&self, state: StateKey) -> Vec<(StateKey, usize)> {
        // Every flip is an involution.
        (0..self.n - 1)
            .map(|a| (self.flip(state, a + 2), a))
            .collect()
    }

    fn heuristic(&self, state: StateKey) -> f64 {
        let stack = self.decode(state);
        let mut gaps = 0u32;
        for i in 0..self.n {
            let below = if i + 1 < self.n {
                stack[i + 1] as i32
            } else {
                self.n as i32 + 1 // virtual plate
            };
            if (stack[i] as i32 - below).abs() > 1 {
                gaps += 1;
            }
        }
        gaps as f64
    }

    fn parse_state(&self, text: &str) -> Result<StateKey, ParseError> {
        let mut stack = Vec::with_capacity(self.n);
        for (lineno, line) in text.lines().enumerate() {
            for raw in line.split_whitespace() {
                let value: usize = raw.parse().map_err(|_| {
                    ParseError::syntax(lineno + 1, 1, format!("expected integer, got {raw:?}"))
                })?;
                if value == 0 || value > self.n {
                    return Err(ParseError::syntax(
                        lineno + 1,
                        1,
                        format!("pancake {value} out of range 1..={}", self.n),
                    ));
                }
                stack.push(value as u8);
            }
        }
        if stack.len() != self.n {
            return Err(ParseError::syntax(
                1,
                1,
                format!("expected {} pancakes, got {}", self.n, stack.len()),
            ));
        }
        let mut seen = vec![false; self.n + 1];
        for &v in &stack {
            if seen[v as usize] {
                return Err(ParseError::syntax(1, 1, format!("duplicate pancake {v}")));
            }
            seen[v as usize] = true;
        }
        Ok(self.encode(&stack))
    }

    fn format_state(&self, state: StateKey) -> String {
        self.decode(state)
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}
