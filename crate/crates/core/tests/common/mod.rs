//! Test-only generators and oracles. Nothing here calls into the bit
//! encoding or the flow solver it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use sicvec::config::EdgeValue;
use sicvec::graph::{Digraph, SccPolicy};
use sicvec::state_table::{PinDeclaration, PinKind, StateTable, StateTableRow};
use sicvec::{dcpw, expand, walk_to_vectors, PostmanWalk, SicGraph, TestVectorSequence};

pub const DFF: &str = include_str!("../fixtures/dff.st");

/// Random cell with `N + 2M + K <= max_width`, at least one input and one
/// memory element, and a random subset of its rows specified.
pub fn random_cell(rng: &mut impl Rng, max_width: usize) -> StateTable {
    let (n, m, k) = loop {
        let n = rng.gen_range(0..=3);
        let m = rng.gen_range(0..=2);
        let k = rng.gen_range(1..=2);
        if n + m >= 1 && n + 2 * m + k <= max_width {
            break (n, m, k);
        }
    };
    let mut decls = Vec::new();
    decls.extend((0..n).map(|i| PinDeclaration::new(format!("L{i}"), PinKind::LevelInput)));
    decls.extend((0..m).map(|i| PinDeclaration::new(format!("E{i}"), PinKind::EdgeInput)));
    decls.extend((0..k).map(|i| PinDeclaration::new(format!("Q{i}"), PinKind::MemoryElement)));
    // interleave declaration kinds sometimes; grouping order must not matter
    if rng.gen_bool(0.3) {
        decls.reverse();
    }
    let density: f64 = rng.gen_range(0.2..0.9);
    let bits = |rng: &mut dyn rand::RngCore, len: usize| -> Vec<bool> { (0..len).map(|_| rng.gen_bool(0.5)).collect() };
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for _ in 0..(1usize << (n + 2 * m + k)) {
        if !rng.gen_bool(density) {
            continue;
        }
        let level_inputs = bits(rng, n);
        let edge_inputs: Vec<EdgeValue> = (0..m).map(|_| EdgeValue::new(rng.gen_bool(0.5), rng.gen_bool(0.5))).collect();
        let prev_states = bits(rng, k);
        if !seen.insert((level_inputs.clone(), edge_inputs.clone(), prev_states.clone())) {
            continue;
        }
        let next_states = bits(rng, k);
        rows.push(StateTableRow { level_inputs, edge_inputs, prev_states, next_states });
    }
    if rows.is_empty() {
        rows.push(StateTableRow {
            level_inputs: vec![false; n],
            edge_inputs: vec![EdgeValue::LOW; m],
            prev_states: vec![false; k],
            next_states: vec![true; k],
        });
    }
    StateTable::new("RAND", decls, rows).unwrap()
}

/// A vertex built straight from a table row.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OracleVertex {
    pub levels: Vec<bool>,
    pub edges: Vec<(bool, bool)>,
    pub states: Vec<(bool, bool)>,
}

impl OracleVertex {
    pub fn label(&self) -> String {
        let b = |x: bool| if x { "1" } else { "0" };
        let mut parts: Vec<&str> = self.levels.iter().map(|&x| b(x)).collect();
        for &(p, c) in self.edges.iter().chain(&self.states) {
            parts.push(b(p));
            parts.push(b(c));
        }
        parts.join(",")
    }

    fn current_inputs(&self) -> Vec<bool> {
        self.levels.iter().copied().chain(self.edges.iter().map(|e| e.1)).collect()
    }
}

pub fn oracle_vertices(st: &StateTable) -> Vec<OracleVertex> {
    let mut v: Vec<OracleVertex> = st
        .rows()
        .iter()
        .map(|r| OracleVertex {
            levels: r.level_inputs.clone(),
            edges: r.edge_inputs.iter().map(|e| (e.prev, e.cur)).collect(),
            states: r.prev_states.iter().copied().zip(r.next_states.iter().copied()).collect(),
        })
        .collect();
    v.sort();
    v
}

/// Pairwise check of the three edge conditions over all ordered pairs,
/// as `src_label -> dst_label` strings.
pub fn oracle_edges(st: &StateTable) -> BTreeSet<String> {
    let vs = oracle_vertices(st);
    let mut out = BTreeSet::new();
    for u in &vs {
        for v in &vs {
            let states_follow = v.states.iter().zip(&u.states).all(|(vs, us)| vs.0 == us.1);
            let edges_follow = v.edges.iter().zip(&u.edges).all(|(ve, ue)| ve.0 == ue.1);
            let changes = u
                .current_inputs()
                .iter()
                .zip(v.current_inputs())
                .filter(|(a, b)| *a != b)
                .count();
            if states_follow && edges_follow && changes == 1 {
                out.insert(format!("{} -> {}", u.label(), v.label()));
            }
        }
    }
    out
}

pub fn edge_set(g: &SicGraph) -> BTreeSet<String> {
    g.edge_list().lines().map(str::to_string).collect()
}

pub fn reachable(g: &Digraph, from: u32) -> Vec<bool> {
    let mut seen = vec![false; g.vertex_count()];
    let mut queue = VecDeque::from([from]);
    seen[from as usize] = true;
    while let Some(u) = queue.pop_front() {
        for &(a, b) in g.edges() {
            if a == u && !seen[b as usize] {
                seen[b as usize] = true;
                queue.push_back(b);
            }
        }
    }
    seen
}

pub fn is_strongly_connected(g: &Digraph) -> bool {
    g.vertex_count() > 0 && (0..g.vertex_count() as u32).all(|v| reachable(g, v).iter().all(|&r| r))
}

/// Random strongly connected simple digraph with up to `max_n` vertices
/// and `max_m` edges, found by rejection sampling.
pub fn random_strongly_connected(rng: &mut impl Rng, max_n: usize, max_m: usize) -> Digraph {
    loop {
        let n = rng.gen_range(2..=max_n);
        let cap = (n * (n - 1)).min(max_m);
        let m = rng.gen_range(n..=cap.max(n));
        let mut edges = BTreeSet::new();
        while edges.len() < m.min(n * (n - 1)) {
            let u = rng.gen_range(0..n as u32);
            let v = rng.gen_range(0..n as u32);
            if u != v {
                edges.insert((u, v));
            }
        }
        let g = Digraph::new(n, edges.into_iter().collect()).unwrap();
        if is_strongly_connected(&g) {
            return g;
        }
    }
}

/// Smallest total duplication that balances every vertex, by exhaustive
/// search over per-edge duplication counts with iterative deepening on the
/// total. In a strongly connected graph any balanced duplication yields a
/// closed covering walk, so this is the minimum walk length minus |E|.
pub fn exhaustive_min_duplication(g: &Digraph) -> u64 {
    let n = g.vertex_count();
    let edges = g.edges();
    let mut balance = vec![0i64; n]; // in - out
    for &(u, v) in edges {
        balance[u as usize] -= 1;
        balance[v as usize] += 1;
    }
    // last edge index touching each vertex
    let mut last = vec![usize::MAX; n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        last[u as usize] = i;
        last[v as usize] = i;
    }

    fn search(i: usize, budget: u64, edges: &[(u32, u32)], balance: &mut [i64], last: &[usize]) -> bool {
        let positive: i64 = balance.iter().filter(|&&b| b > 0).sum();
        if positive as u64 > budget {
            return false;
        }
        if i == edges.len() {
            return balance.iter().all(|&b| b == 0);
        }
        let (u, v) = (edges[i].0 as usize, edges[i].1 as usize);
        for d in 0..=budget {
            balance[u] -= d as i64;
            balance[v] += d as i64;
            let settled = (last[u] != i || balance[u] == 0) && (last[v] != i || balance[v] == 0);
            let found = settled && search(i + 1, budget - d, edges, balance, last);
            balance[u] += d as i64;
            balance[v] -= d as i64;
            if found {
                return true;
            }
        }
        false
    }

    let lower: i64 = balance.iter().filter(|&&b| b > 0).sum();
    let mut total = lower as u64;
    loop {
        // exact total: search with budget `total` succeeds iff some vector
        // with sum <= total balances; deepening makes the first hit minimal
        if search(0, total, edges, &mut balance, &last) {
            return total;
        }
        total += 1;
    }
}

pub struct Pipeline {
    pub table: StateTable,
    pub full: SicGraph,
    pub graph: SicGraph,
    pub report: sicvec::SccReport,
    pub walk: PostmanWalk,
    pub seq: TestVectorSequence,
}

pub fn pipeline(st: &StateTable, policy: SccPolicy) -> Pipeline {
    let table = expand(st);
    let full = sicvec::sicstg::build(&table).unwrap();
    let (graph, report) = full.prune_and_check(policy).unwrap();
    let walk = dcpw(graph.graph()).unwrap();
    let seq = walk_to_vectors(&walk, &graph, &table).unwrap();
    Pipeline { table, full, graph, report, walk, seq }
}
