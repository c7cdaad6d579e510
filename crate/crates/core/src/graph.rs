//! Index-based simple digraph with strongly connected components and
//! zero-degree pruning.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge {0} -> {1} references a vertex out of range")]
    OutOfRange(u32, u32),
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("parallel edge {0} -> {1}")]
    ParallelEdge(u32, u32),
}

/// Directed graph without self-loops or parallel edges. Edges are stored
/// sorted by `(source, destination)`; an edge id is its position in that
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Digraph {
    vertex_count: usize,
    edges: Vec<(u32, u32)>,
    out_start: Vec<usize>,
}

impl Digraph {
    pub fn new(vertex_count: usize, mut edges: Vec<(u32, u32)>) -> Result<Self, GraphError> {
        for &(u, v) in &edges {
            if u as usize >= vertex_count || v as usize >= vertex_count {
                return Err(GraphError::OutOfRange(u, v));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::ParallelEdge(w[0].0, w[0].1));
        }
        let mut out_start = vec![0usize; vertex_count + 1];
        for &(u, _) in &edges {
            out_start[u as usize + 1] += 1;
        }
        for i in 0..vertex_count {
            out_start[i + 1] += out_start[i];
        }
        Ok(Digraph { vertex_count, edges, out_start })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_count == 0
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> (u32, u32) {
        self.edges[id]
    }

    /// Ids of the edges leaving `v`, in ascending destination order.
    pub fn out_edges(&self, v: u32) -> Range<usize> {
        self.out_start[v as usize]..self.out_start[v as usize + 1]
    }

    pub fn successors(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        self.edges[self.out_edges(v)].iter().map(|&(_, d)| d)
    }

    pub fn out_degree(&self, v: u32) -> usize {
        self.out_edges(v).len()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for &(_, v) in &self.edges {
            deg[v as usize] += 1;
        }
        deg
    }

    pub fn find_edge(&self, u: u32, v: u32) -> Option<usize> {
        let range = self.out_edges(u);
        self.edges[range.clone()]
            .binary_search_by_key(&v, |&(_, d)| d)
            .ok()
            .map(|i| range.start + i)
    }

    /// Subgraph induced by the vertices with `keep[v]`, renumbered in
    /// ascending order. Returns the subgraph and the original index of each
    /// of its vertices.
    pub fn induced(&self, keep: &[bool]) -> (Digraph, Vec<u32>) {
        let mut new_index = vec![u32::MAX; self.vertex_count];
        let mut old_index = Vec::new();
        for v in 0..self.vertex_count {
            if keep[v] {
                new_index[v] = old_index.len() as u32;
                old_index.push(v as u32);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| keep[u as usize] && keep[v as usize])
            .map(|&(u, v)| (new_index[u as usize], new_index[v as usize]))
            .collect();
        let g = Digraph::new(old_index.len(), edges).expect("induced subgraph of a simple graph is simple");
        (g, old_index)
    }
}

/// Strongly connected components. Components are numbered in ascending
/// order of their smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    pub component: Vec<u32>,
}

impl Components {
    pub fn members(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.count];
        for (v, &c) in self.component.iter().enumerate() {
            out[c as usize].push(v as u32);
        }
        out
    }
}

/// Tarjan's algorithm with an explicit call stack.
pub fn strongly_connected_components(g: &Digraph) -> Components {
    const UNVISITED: u32 = u32::MAX;
    let n = g.vertex_count();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut raw = vec![UNVISITED; n];
    let mut raw_count = 0u32;
    let mut next_index = 0u32;
    // (vertex, next out-edge id to examine)
    let mut call: Vec<(u32, usize)> = Vec::new();

    for root in 0..n as u32 {
        if index[root as usize] != UNVISITED {
            continue;
        }
        call.push((root, g.out_edges(root).start));
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut cursor)) = call.last_mut() {
            let end = g.out_edges(v).end;
            if *cursor < end {
                let w = g.edge(*cursor).1;
                *cursor += 1;
                if index[w as usize] == UNVISITED {
                    index[w as usize] = next_index;
                    low[w as usize] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    call.push((w, g.out_edges(w).start));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w as usize] = false;
                    raw[w as usize] = raw_count;
                    if w == v {
                        break;
                    }
                }
                raw_count += 1;
            }
        }
    }

    // renumber by smallest member
    let mut renumber = vec![UNVISITED; raw_count as usize];
    let mut count = 0u32;
    let mut component = vec![0u32; n];
    for v in 0..n {
        let r = raw[v] as usize;
        if renumber[r] == UNVISITED {
            renumber[r] = count;
            count += 1;
        }
        component[v] = renumber[r];
    }
    Components { count: count as usize, component }
}

/// Repeatedly remove vertices with in-degree or out-degree zero until none
/// remain. Returns the surviving-vertex mask.
pub fn prune_zero_degree(g: &Digraph) -> Vec<bool> {
    let n = g.vertex_count();
    let mut indeg = g.in_degrees();
    let mut outdeg: Vec<usize> = (0..n as u32).map(|v| g.out_degree(v)).collect();
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(u, v) in g.edges() {
        preds[v as usize].push(u);
    }
    let mut alive = vec![true; n];
    let mut queue: Vec<u32> = (0..n as u32)
        .filter(|&v| indeg[v as usize] == 0 || outdeg[v as usize] == 0)
        .collect();
    while let Some(v) = queue.pop() {
        if !alive[v as usize] {
            continue;
        }
        alive[v as usize] = false;
        for w in g.successors(v) {
            if alive[w as usize] {
                indeg[w as usize] -= 1;
                if indeg[w as usize] == 0 {
                    queue.push(w);
                }
            }
        }
        for &u in &preds[v as usize] {
            if alive[u as usize] {
                outdeg[u as usize] -= 1;
                if outdeg[u as usize] == 0 {
                    queue.push(u);
                }
            }
        }
    }
    alive
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SccPolicy {
    /// Fail unless the pruned graph is one strongly connected component.
    #[default]
    Strict,
    /// Keep the component with the most edges and drop everything else.
    LargestComponent,
}

impl fmt::Display for SccPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SccPolicy::Strict => f.write_str("strict"),
            SccPolicy::LargestComponent => f.write_str("largest-component"),
        }
    }
}

/// Outcome of [`prune_and_check`]. Vertex indices refer to the input graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccReport {
    pub policy: SccPolicy,
    /// Components of the graph left after degree pruning.
    pub component_count: usize,
    /// Component id per input vertex; `None` for vertices removed by degree
    /// pruning.
    pub component: Vec<Option<u32>>,
    /// Vertices removed by degree pruning, ascending.
    pub pruned: Vec<u32>,
    /// Vertices outside the kept component, ascending.
    pub excluded: Vec<u32>,
    /// Input-graph edges absent from the result.
    pub dropped_edges: Vec<(u32, u32)>,
    /// Original index of every vertex of the result graph.
    pub kept: Vec<u32>,
}

impl SccReport {
    pub fn dropped_edge_count(&self) -> usize {
        self.dropped_edges.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConnectivityError {
    #[error("graph is empty after removing vertices with zero in- or out-degree")]
    Empty,
    #[error("graph is not strongly connected: {} components", components.len())]
    NotStronglyConnected { components: Vec<Vec<u32>> },
}

pub fn prune_and_check(g: &Digraph, policy: SccPolicy) -> Result<(Digraph, SccReport), ConnectivityError> {
    let alive = prune_zero_degree(g);
    let (pruned_graph, survivors) = g.induced(&alive);
    if pruned_graph.is_empty() {
        return Err(ConnectivityError::Empty);
    }
    let comps = strongly_connected_components(&pruned_graph);
    let mut component = vec![None; g.vertex_count()];
    for (i, &v) in survivors.iter().enumerate() {
        component[v as usize] = Some(comps.component[i]);
    }
    let pruned: Vec<u32> = (0..g.vertex_count() as u32).filter(|&v| !alive[v as usize]).collect();

    let chosen = if comps.count == 1 {
        0
    } else {
        match policy {
            SccPolicy::Strict => {
                let components = comps
                    .members()
                    .into_iter()
                    .map(|m| m.into_iter().map(|i| survivors[i as usize]).collect())
                    .collect();
                return Err(ConnectivityError::NotStronglyConnected { components });
            }
            SccPolicy::LargestComponent => {
                let mut internal = vec![0usize; comps.count];
                for &(u, v) in pruned_graph.edges() {
                    let cu = comps.component[u as usize];
                    if cu == comps.component[v as usize] {
                        internal[cu as usize] += 1;
                    }
                }
                // first maximum wins, i.e. the smallest label on ties
                let mut best = 0;
                for (c, &e) in internal.iter().enumerate() {
                    if e > internal[best] {
                        best = c;
                    }
                }
                best as u32
            }
        }
    };

    let keep: Vec<bool> = (0..g.vertex_count()).map(|v| component[v] == Some(chosen)).collect();
    let (result, kept) = g.induced(&keep);
    let excluded = (0..g.vertex_count() as u32)
        .filter(|&v| alive[v as usize] && !keep[v as usize])
        .collect();
    let dropped_edges = g
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| !(keep[u as usize] && keep[v as usize]))
        .collect();
    let report = SccReport {
        policy,
        component_count: comps.count,
        component,
        pruned,
        excluded,
        dropped_edges,
        kept,
    };
    Ok((result, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(u32, u32)]) -> Digraph {
        Digraph::new(n, edges.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_simple_graphs() {
        assert_eq!(Digraph::new(2, vec![(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(Digraph::new(2, vec![(0, 1), (0, 1)]), Err(GraphError::ParallelEdge(0, 1)));
        assert_eq!(Digraph::new(2, vec![(0, 2)]), Err(GraphError::OutOfRange(0, 2)));
    }

    #[test]
    fn edges_sorted_with_adjacency() {
        let g = graph(3, &[(2, 0), (0, 2), (0, 1), (1, 2)]);
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2), (2, 0)]);
        assert_eq!(g.out_edges(0), 0..2);
        assert_eq!(g.find_edge(1, 2), Some(2));
        assert_eq!(g.find_edge(2, 1), None);
    }

    #[test]
    fn isolated_vertex_is_own_component() {
        let g = graph(3, &[(0, 1), (1, 0)]);
        let c = strongly_connected_components(&g);
        assert_eq!(c.count, 2);
        assert_eq!(c.component, vec![0, 0, 1]);
    }

    #[test]
    fn two_disjoint_two_cycles() {
        let g = graph(4, &[(0, 2), (2, 0), (1, 3), (3, 1)]);
        let c = strongly_connected_components(&g);
        assert_eq!(c.count, 2);
        assert_eq!(c.members(), vec![vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn path_graph_prunes_to_empty() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        assert!(prune_zero_degree(&g).iter().all(|a| !a));
        for policy in [SccPolicy::Strict, SccPolicy::LargestComponent] {
            assert_eq!(prune_and_check(&g, policy), Err(ConnectivityError::Empty));
        }
    }

    #[test]
    fn pruning_cascades() {
        // cycle 0<->1 with a tail 1 -> 2 -> 3
        let g = graph(4, &[(0, 1), (1, 0), (1, 2), (2, 3)]);
        assert_eq!(prune_zero_degree(&g), vec![true, true, false, false]);
        let (h, report) = prune_and_check(&g, SccPolicy::Strict).unwrap();
        assert_eq!(h.edges(), &[(0, 1), (1, 0)]);
        assert_eq!(report.pruned, vec![2, 3]);
        assert_eq!(report.dropped_edges, vec![(1, 2), (2, 3)]);
    }

    #[test]
    fn largest_component_keeps_three_cycle() {
        // 2-cycle on {0,1}, 3-cycle on {2,3,4}
        let g = graph(5, &[(0, 1), (1, 0), (2, 3), (3, 4), (4, 2)]);
        match prune_and_check(&g, SccPolicy::Strict) {
            Err(ConnectivityError::NotStronglyConnected { components }) => {
                assert_eq!(components, vec![vec![0, 1], vec![2, 3, 4]])
            }
            other => panic!("unexpected {other:?}"),
        }
        let (h, report) = prune_and_check(&g, SccPolicy::LargestComponent).unwrap();
        assert_eq!(h.vertex_count(), 3);
        assert_eq!(h.edge_count(), 3);
        assert_eq!(report.kept, vec![2, 3, 4]);
        assert_eq!(report.excluded, vec![0, 1]);
        assert_eq!(report.dropped_edges, vec![(0, 1), (1, 0)]);
        assert_eq!(report.component_count, 2);
    }

    #[test]
    fn largest_component_tie_takes_smallest_vertex() {
        let g = graph(4, &[(0, 2), (2, 0), (1, 3), (3, 1)]);
        let (_, report) = prune_and_check(&g, SccPolicy::LargestComponent).unwrap();
        assert_eq!(report.kept, vec![0, 2]);
        assert_eq!(report.dropped_edge_count(), 2);
    }

    fn reaches(g: &Digraph, from: u32) -> Vec<bool> {
        let mut seen = vec![false; g.vertex_count()];
        let mut stack = vec![from];
        seen[from as usize] = true;
        while let Some(v) = stack.pop() {
            for w in g.successors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    fn arb_graph() -> impl Strategy<Value = Digraph> {
        (1usize..10).prop_flat_map(|n| {
            proptest::collection::btree_set((0..n as u32, 0..n as u32), 0..30).prop_map(move |set| {
                let edges = set.into_iter().filter(|(u, v)| u != v).collect();
                Digraph::new(n, edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        #[allow(clippy::needless_range_loop)]
        fn scc_matches_mutual_reachability(g in arb_graph()) {
            let c = strongly_connected_components(&g);
            let reach: Vec<Vec<bool>> = (0..g.vertex_count() as u32).map(|v| reaches(&g, v)).collect();
            for u in 0..g.vertex_count() {
                for v in 0..g.vertex_count() {
                    let same = reach[u][v] && reach[v][u];
                    prop_assert_eq!(same, c.component[u] == c.component[v]);
                }
            }
            // numbering follows smallest member
            let firsts: Vec<u32> = c.members().iter().map(|m| m[0]).collect();
            prop_assert!(firsts.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn pruning_reaches_fixpoint(g in arb_graph()) {
            let alive = prune_zero_degree(&g);
            let (h, _) = g.induced(&alive);
            let indeg = h.in_degrees();
            for v in 0..h.vertex_count() as u32 {
                prop_assert!(indeg[v as usize] >= 1 && h.out_degree(v) >= 1);
            }
        }

        #[test]
        fn largest_component_is_strongly_connected(g in arb_graph()) {
            if let Ok((h, report)) = prune_and_check(&g, SccPolicy::LargestComponent) {
                prop_assert_eq!(strongly_connected_components(&h).count, 1);
                prop_assert_eq!(h.edge_count() + report.dropped_edge_count(), g.edge_count());
            }
        }
    }
}
