//! Directed Chinese postman walk: the shortest closed walk that traverses
//! every edge of a strongly connected digraph at least once.
//!
//! Vertices with more incoming than outgoing edges must be left again by
//! duplicated edges, vertices with more outgoing edges must be re-entered.
//! The cheapest set of duplicates is a transportation problem between the
//! two groups with shortest-path lengths as unit costs; every shipped unit
//! becomes one shortest path of duplicated edges. The balanced multigraph
//! then has an Eulerian circuit.

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::Digraph;
use crate::transport::{self, TransportError};
use crate::EdgeCost;

const UNREACHED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DcpwError {
    #[error("graph has no edges")]
    Empty,
    #[error("vertex {to} is unreachable from vertex {from}; graph is not strongly connected")]
    Unreachable { from: u32, to: u32 },
    #[error("vertex {0} is unbalanced in the augmented multigraph")]
    Unbalanced(u32),
    #[error("start vertex {0} has no outgoing edge")]
    StartIsolated(u32),
    #[error("augmented multigraph is not connected: circuit covers {covered} of {total} traversals")]
    Disconnected { covered: usize, total: u64 },
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// In/out degree per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImbalanceTable {
    pub in_degree: Vec<usize>,
    pub out_degree: Vec<usize>,
}

impl ImbalanceTable {
    /// `in - out`
    pub fn imbalance(&self, v: u32) -> i64 {
        self.in_degree[v as usize] as i64 - self.out_degree[v as usize] as i64
    }

    pub fn len(&self) -> usize {
        self.in_degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_degree.is_empty()
    }

    pub fn is_balanced(&self) -> bool {
        self.in_degree == self.out_degree
    }

    /// Vertices entered more often than left, with their surplus.
    pub fn surpluses(&self) -> Vec<(u32, u64)> {
        (0..self.len() as u32)
            .filter_map(|v| {
                let d = self.imbalance(v);
                (d > 0).then_some((v, d as u64))
            })
            .collect()
    }

    /// Vertices left more often than entered, with their deficit.
    pub fn deficits(&self) -> Vec<(u32, u64)> {
        (0..self.len() as u32)
            .filter_map(|v| {
                let d = self.imbalance(v);
                (d < 0).then_some((v, d.unsigned_abs()))
            })
            .collect()
    }
}

pub fn imbalances(g: &Digraph) -> ImbalanceTable {
    ImbalanceTable {
        in_degree: g.in_degrees(),
        out_degree: (0..g.vertex_count() as u32).map(|v| g.out_degree(v)).collect(),
    }
}

/// Breadth-first shortest-path trees (unit edge cost) from a set of
/// sources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortestPaths {
    n: usize,
    row_of: Vec<u32>,
    dist: Vec<u32>,
    pred_edge: Vec<u32>,
}

impl ShortestPaths {
    /// BFS from every vertex in `sources`. Fails if any vertex is
    /// unreachable from one of them.
    pub fn from_sources(g: &Digraph, sources: &[u32]) -> Result<Self, DcpwError> {
        let n = g.vertex_count();
        let mut row_of = vec![UNREACHED; n];
        let mut dist = vec![UNREACHED; sources.len() * n];
        let mut pred_edge = vec![UNREACHED; sources.len() * n];
        let mut queue = VecDeque::new();
        for (row, &s) in sources.iter().enumerate() {
            row_of[s as usize] = row as u32;
            let dist = &mut dist[row * n..(row + 1) * n];
            let pred = &mut pred_edge[row * n..(row + 1) * n];
            dist[s as usize] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for e in g.out_edges(u) {
                    let v = g.edge(e).1 as usize;
                    if dist[v] == UNREACHED {
                        dist[v] = dist[u as usize] + 1;
                        pred[v] = e as u32;
                        queue.push_back(v as u32);
                    }
                }
            }
            if let Some(to) = dist.iter().position(|&d| d == UNREACHED) {
                return Err(DcpwError::Unreachable { from: s, to: to as u32 });
            }
        }
        Ok(ShortestPaths { n, row_of, dist, pred_edge })
    }

    fn row(&self, from: u32) -> usize {
        let r = self.row_of[from as usize];
        assert!(r != UNREACHED, "vertex {from} is not a source of these shortest paths");
        r as usize
    }

    /// Edge count of a shortest `from -> to` path. `from` must be a source.
    pub fn distance(&self, from: u32, to: u32) -> u32 {
        self.dist[self.row(from) * self.n + to as usize]
    }

    /// Edge ids of the BFS-tree path `from -> to`, in walk order.
    pub fn path(&self, g: &Digraph, from: u32, to: u32) -> Vec<u32> {
        let base = self.row(from) * self.n;
        let mut edges = Vec::new();
        let mut v = to;
        while v != from {
            let e = self.pred_edge[base + v as usize];
            edges.push(e);
            v = g.edge(e as usize).0;
        }
        edges.reverse();
        edges
    }
}

/// Shortest paths between every ordered pair of vertices.
pub fn all_pairs_shortest(g: &Digraph) -> Result<ShortestPaths, DcpwError> {
    let all: Vec<u32> = (0..g.vertex_count() as u32).collect();
    ShortestPaths::from_sources(g, &all)
}

/// Extra traversals per edge that balance every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Augmentation {
    pub duplicates: Vec<u64>,
    pub total_added: u64,
}

impl Augmentation {
    pub fn none(g: &Digraph) -> Self {
        Augmentation { duplicates: vec![0; g.edge_count()], total_added: 0 }
    }
}

/// Cheapest balancing duplication. `paths` must have a row for every
/// surplus vertex of `imb`.
pub fn min_cost_augmentation(
    g: &Digraph,
    imb: &ImbalanceTable,
    paths: &ShortestPaths,
) -> Result<Augmentation, DcpwError> {
    let surplus = imb.surpluses();
    let deficit = imb.deficits();
    let supply: Vec<u64> = surplus.iter().map(|&(_, a)| a).collect();
    let demand: Vec<u64> = deficit.iter().map(|&(_, a)| a).collect();
    let plan = transport::solve(&supply, &demand, |i, j| {
        paths.distance(surplus[i].0, deficit[j].0) as EdgeCost
    })?;
    let mut aug = Augmentation::none(g);
    for s in &plan.shipments {
        for e in paths.path(g, surplus[s.supply].0, deficit[s.demand].0) {
            aug.duplicates[e as usize] += s.amount;
            aug.total_added += s.amount;
        }
    }
    debug_assert_eq!(aug.total_added, plan.total_cost);
    Ok(aug)
}

/// Closed walk given as a sequence of edge ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostmanWalk {
    pub start: u32,
    pub edges: Vec<u32>,
    /// Traversals beyond one per edge.
    pub repeated: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error("edge id {0} out of range")]
    UnknownEdge(u32),
    #[error("step {0} does not start where the previous step ended")]
    NotIncident(usize),
    #[error("walk does not return to its start")]
    NotClosed,
    #[error("edge {0} is never traversed")]
    Uncovered(u32),
}

impl PostmanWalk {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Traversal count per edge id.
    pub fn histogram(&self, edge_count: usize) -> Vec<u64> {
        let mut h = vec![0; edge_count];
        for &e in &self.edges {
            h[e as usize] += 1;
        }
        h
    }

    /// Check incidence, closure and full edge coverage against `g`.
    pub fn validate(&self, g: &Digraph) -> Result<(), WalkError> {
        let mut at = self.start;
        for (i, &e) in self.edges.iter().enumerate() {
            if e as usize >= g.edge_count() {
                return Err(WalkError::UnknownEdge(e));
            }
            let (u, v) = g.edge(e as usize);
            if u != at {
                return Err(WalkError::NotIncident(i));
            }
            at = v;
        }
        if at != self.start {
            return Err(WalkError::NotClosed);
        }
        let h = self.histogram(g.edge_count());
        if let Some(e) = h.iter().position(|&c| c == 0) {
            return Err(WalkError::Uncovered(e as u32));
        }
        Ok(())
    }
}

/// Hierholzer's algorithm over `g` with every edge repeated
/// `1 + aug.duplicates[e]` times. From each vertex the lowest-id edge with
/// copies left is taken first.
pub fn eulerian_circuit(g: &Digraph, aug: &Augmentation, start: u32) -> Result<PostmanWalk, DcpwError> {
    let mut remaining: Vec<u64> = aug.duplicates.iter().map(|d| d + 1).collect();
    let total: u64 = remaining.iter().sum();
    let mut balance = vec![0i64; g.vertex_count()];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        balance[u as usize] -= remaining[e] as i64;
        balance[v as usize] += remaining[e] as i64;
    }
    if let Some(v) = balance.iter().position(|&b| b != 0) {
        return Err(DcpwError::Unbalanced(v as u32));
    }
    if g.out_degree(start) == 0 {
        return Err(DcpwError::StartIsolated(start));
    }

    let mut cursor: Vec<usize> = (0..g.vertex_count() as u32).map(|v| g.out_edges(v).start).collect();
    let mut circuit = Vec::with_capacity(total as usize);
    let mut stack: Vec<(u32, u32)> = vec![(start, UNREACHED)];
    while let Some(&(v, _)) = stack.last() {
        let end = g.out_edges(v).end;
        let c = &mut cursor[v as usize];
        while *c < end && remaining[*c] == 0 {
            *c += 1;
        }
        if *c < end {
            let e = *c;
            remaining[e] -= 1;
            stack.push((g.edge(e).1, e as u32));
        } else {
            let (_, e) = stack.pop().expect("stack is non-empty");
            if e != UNREACHED {
                circuit.push(e);
            }
        }
    }
    circuit.reverse();
    if circuit.len() as u64 != total {
        return Err(DcpwError::Disconnected { covered: circuit.len(), total });
    }
    Ok(PostmanWalk { start, edges: circuit, repeated: aug.total_added })
}

/// Minimum-length closed walk covering every edge, starting at the
/// lowest-index vertex with an outgoing edge.
pub fn dcpw(g: &Digraph) -> Result<PostmanWalk, DcpwError> {
    let start = (0..g.vertex_count() as u32)
        .find(|&v| g.out_degree(v) > 0)
        .ok_or(DcpwError::Empty)?;
    let imb = imbalances(g);
    let sources: Vec<u32> = imb.surpluses().into_iter().map(|(v, _)| v).collect();
    // reachability of everything from `start` plus balance catches graphs
    // that are not strongly connected even when no vertex is unbalanced
    let mut rows = vec![start];
    rows.extend(sources.iter().copied().filter(|&v| v != start));
    let paths = ShortestPaths::from_sources(g, &rows)?;
    let aug = min_cost_augmentation(g, &imb, &paths)?;
    eulerian_circuit(g, &aug, start)
}
