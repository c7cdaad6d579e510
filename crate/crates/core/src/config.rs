//! Bit-level encoding of table keys and cell configurations.
//!
//! A *key* identifies one state-table row: level-input bits, then a
//! (previous, current) pair per edge input, then the previous value of every
//! memory element. A *configuration* is the vertex label of the transition
//! graph: the key fields followed by a (previous, current) pair per memory
//! element. Both are packed most-significant-bit first in that field order,
//! so numeric order on the packed code is lexicographic order on the label.

use std::fmt;

/// Pin counts of a cell: level inputs, edge inputs and memory elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Layout {
    pub levels: usize,
    pub edges: usize,
    pub states: usize,
}

/// Previous and current value of an edge-sensitive input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeValue {
    pub prev: bool,
    pub cur: bool,
}

impl EdgeValue {
    pub const LOW: EdgeValue = EdgeValue { prev: false, cur: false };
    pub const RISING: EdgeValue = EdgeValue { prev: false, cur: true };
    pub const FALLING: EdgeValue = EdgeValue { prev: true, cur: false };
    pub const HIGH: EdgeValue = EdgeValue { prev: true, cur: true };

    pub fn new(prev: bool, cur: bool) -> Self {
        EdgeValue { prev, cur }
    }
}

impl fmt::Display for EdgeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.prev, self.cur) {
            (false, true) => f.write_str("R"),
            (true, false) => f.write_str("F"),
            (false, false) => f.write_str("00"),
            (true, true) => f.write_str("11"),
        }
    }
}

/// A packed vertex label. Only meaningful together with its [`Layout`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(pub u64);

/// Structured view of a configuration, field by field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigFields {
    pub level_values: Vec<bool>,
    pub edge_values: Vec<EdgeValue>,
    pub state_values: Vec<(bool, bool)>,
}

#[inline]
fn get(code: u64, width: usize, pos: usize) -> bool {
    (code >> (width - 1 - pos)) & 1 == 1
}

#[inline]
fn put(code: &mut u64, width: usize, pos: usize, value: bool) {
    if value {
        *code |= 1 << (width - 1 - pos);
    }
}

fn pack(bits: impl IntoIterator<Item = bool>) -> u64 {
    bits.into_iter().fold(0, |acc, b| (acc << 1) | b as u64)
}

impl Layout {
    pub fn new(levels: usize, edges: usize, states: usize) -> Self {
        Layout { levels, edges, states }
    }

    /// Number of input pins, level and edge: the positions a single input
    /// change may flip.
    pub fn inputs(&self) -> usize {
        self.levels + self.edges
    }

    /// `N + 2M + K`
    pub fn key_width(&self) -> usize {
        self.levels + 2 * self.edges + self.states
    }

    /// `N + 2M + 2K`
    pub fn label_width(&self) -> usize {
        self.levels + 2 * self.edges + 2 * self.states
    }

    pub fn key_count(&self) -> u64 {
        1u64 << self.key_width()
    }

    pub fn encode_key(&self, levels: &[bool], edges: &[EdgeValue], prev_states: &[bool]) -> u32 {
        debug_assert_eq!(levels.len(), self.levels);
        debug_assert_eq!(edges.len(), self.edges);
        debug_assert_eq!(prev_states.len(), self.states);
        let bits = levels
            .iter()
            .copied()
            .chain(edges.iter().flat_map(|e| [e.prev, e.cur]))
            .chain(prev_states.iter().copied());
        pack(bits) as u32
    }

    pub fn decode_key(&self, key: u32) -> (Vec<bool>, Vec<EdgeValue>, Vec<bool>) {
        let w = self.key_width();
        let key = key as u64;
        let levels = (0..self.levels).map(|i| get(key, w, i)).collect();
        let edges = (0..self.edges)
            .map(|j| {
                let p = self.levels + 2 * j;
                EdgeValue::new(get(key, w, p), get(key, w, p + 1))
            })
            .collect();
        let base = self.levels + 2 * self.edges;
        let prev = (0..self.states).map(|k| get(key, w, base + k)).collect();
        (levels, edges, prev)
    }

    /// Pack a memory-element vector, first element most significant.
    pub fn encode_states(&self, states: &[bool]) -> u32 {
        debug_assert_eq!(states.len(), self.states);
        pack(states.iter().copied()) as u32
    }

    pub fn decode_states(&self, code: u32) -> Vec<bool> {
        (0..self.states).map(|k| get(code as u64, self.states, k)).collect()
    }

    /// Vertex label for the row `key -> next_states`.
    pub fn configuration(&self, key: u32, next_states: u32) -> Configuration {
        let k = self.states;
        let inputs = (key as u64) >> k;
        let mut code = inputs << (2 * k);
        let w = self.label_width();
        let base = self.levels + 2 * self.edges;
        for s in 0..k {
            let prev = get(key as u64, self.key_width(), base + s);
            let next = get(next_states as u64, k, s);
            put(&mut code, w, base + 2 * s, prev);
            put(&mut code, w, base + 2 * s + 1, next);
        }
        Configuration(code)
    }

    /// The state-table key a configuration was built from.
    pub fn key_of(&self, c: Configuration) -> u32 {
        let k = self.states;
        let inputs = c.0 >> (2 * k);
        (inputs << k | self.state_prevs(c) as u64) as u32
    }

    pub fn level_bits(&self, c: Configuration) -> u32 {
        let w = self.label_width();
        pack((0..self.levels).map(|i| get(c.0, w, i))) as u32
    }

    pub fn edge_prevs(&self, c: Configuration) -> u32 {
        let w = self.label_width();
        pack((0..self.edges).map(|j| get(c.0, w, self.levels + 2 * j))) as u32
    }

    pub fn edge_currents(&self, c: Configuration) -> u32 {
        let w = self.label_width();
        pack((0..self.edges).map(|j| get(c.0, w, self.levels + 2 * j + 1))) as u32
    }

    pub fn state_prevs(&self, c: Configuration) -> u32 {
        let w = self.label_width();
        let base = self.levels + 2 * self.edges;
        pack((0..self.states).map(|s| get(c.0, w, base + 2 * s))) as u32
    }

    pub fn state_currents(&self, c: Configuration) -> u32 {
        let w = self.label_width();
        let base = self.levels + 2 * self.edges;
        pack((0..self.states).map(|s| get(c.0, w, base + 2 * s + 1))) as u32
    }

    /// Current value of every input pin: level bits followed by the current
    /// bit of each edge input.
    pub fn current_inputs(&self, c: Configuration) -> u32 {
        (self.level_bits(c) << self.edges) | self.edge_currents(c)
    }

    /// Key reached from `c` when input pin `pin` (level pins first, then
    /// edge pins) changes and everything else holds.
    pub fn successor_key(&self, c: Configuration, pin: usize) -> u32 {
        debug_assert!(pin < self.inputs());
        let mut levels = self.level_bits(c);
        let mut cur = self.edge_currents(c);
        if pin < self.levels {
            levels ^= 1 << (self.levels - 1 - pin);
        } else {
            cur ^= 1 << (self.edges - 1 - (pin - self.levels));
        }
        let prev = self.edge_currents(c);
        let mut key = levels as u64;
        for j in 0..self.edges {
            let p = (prev >> (self.edges - 1 - j)) & 1;
            let q = (cur >> (self.edges - 1 - j)) & 1;
            key = (key << 2) | (p << 1 | q) as u64;
        }
        key = (key << self.states) | self.state_currents(c) as u64;
        key as u32
    }

    pub fn fields(&self, c: Configuration) -> ConfigFields {
        let w = self.label_width();
        let level_values = (0..self.levels).map(|i| get(c.0, w, i)).collect();
        let edge_values = (0..self.edges)
            .map(|j| {
                let p = self.levels + 2 * j;
                EdgeValue::new(get(c.0, w, p), get(c.0, w, p + 1))
            })
            .collect();
        let base = self.levels + 2 * self.edges;
        let state_values = (0..self.states)
            .map(|s| (get(c.0, w, base + 2 * s), get(c.0, w, base + 2 * s + 1)))
            .collect();
        ConfigFields { level_values, edge_values, state_values }
    }

    pub fn bits(&self, c: Configuration) -> Vec<bool> {
        let w = self.label_width();
        (0..w).map(|p| get(c.0, w, p)).collect()
    }

    /// Comma-separated label, e.g. `0,0,1,0,0`.
    pub fn format_label(&self, c: Configuration) -> String {
        let bits: Vec<&str> = self
            .bits(c)
            .into_iter()
            .map(|b| if b { "1" } else { "0" })
            .collect();
        bits.join(",")
    }

    pub fn parse_label(&self, text: &str) -> Option<Configuration> {
        let mut code = 0u64;
        let mut n = 0;
        for part in text.split(',') {
            let bit = match part.trim() {
                "0" => 0,
                "1" => 1,
                _ => return None,
            };
            code = (code << 1) | bit;
            n += 1;
        }
        (n == self.label_width()).then_some(Configuration(code))
    }
}
