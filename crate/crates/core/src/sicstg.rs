//! Single-input-change state transition graph.
//!
//! One vertex per row of a complete state table. An edge `u -> v` exists
//! iff `v`'s previous memory values equal `u`'s current ones, `v`'s previous
//! edge-input values equal `u`'s current ones, and exactly one current input
//! value (level bits and edge-input current bits) differs between them.
//! Memory-element changes are the cell's response and are not counted.

use std::fmt::Write as _;

use thiserror::Error;

use crate::config::{Configuration, Layout};
use crate::graph::{self, ConnectivityError, Digraph, SccPolicy, SccReport};
use crate::state_table::{validate_complete, StateTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("state table is incomplete: {missing} of {expected} keys missing")]
    Incomplete { missing: usize, expected: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SicGraph {
    layout: Layout,
    vertices: Vec<Configuration>,
    graph: Digraph,
}

/// One configuration per row of a complete table, sorted by label.
pub fn build_vertices(st: &StateTable) -> Result<Vec<Configuration>, BuildError> {
    let report = validate_complete(st);
    if !report.is_complete() {
        return Err(BuildError::Incomplete {
            missing: report.missing_keys.len(),
            expected: report.expected_rows,
        });
    }
    let layout = st.layout();
    let mut vertices: Vec<Configuration> = st
        .rows()
        .iter()
        .map(|row| layout.configuration(row.key(&layout), layout.encode_states(&row.next_states)))
        .collect();
    vertices.sort_unstable();
    Ok(vertices)
}

/// Connect every configuration to its single-input-change successors.
/// `vertices` must be sorted and pairwise distinct.
pub fn build_edges(layout: Layout, vertices: Vec<Configuration>) -> SicGraph {
    debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
    let mut by_key = vec![u32::MAX; layout.key_count() as usize];
    for (i, &c) in vertices.iter().enumerate() {
        by_key[layout.key_of(c) as usize] = i as u32;
    }
    let mut edges = Vec::with_capacity(vertices.len() * layout.inputs());
    for (u, &c) in vertices.iter().enumerate() {
        for pin in 0..layout.inputs() {
            let v = by_key[layout.successor_key(c, pin) as usize];
            if v != u32::MAX {
                edges.push((u as u32, v));
            }
        }
    }
    let graph = Digraph::new(vertices.len(), edges).expect("successor edges are simple");
    SicGraph { layout, vertices, graph }
}

/// `build_edges(build_vertices(st))`
pub fn build(st: &StateTable) -> Result<SicGraph, BuildError> {
    Ok(build_edges(st.layout(), build_vertices(st)?))
}

impl SicGraph {
    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn vertices(&self) -> &[Configuration] {
        &self.vertices
    }

    pub fn vertex(&self, v: u32) -> Configuration {
        self.vertices[v as usize]
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn label(&self, v: u32) -> String {
        self.layout.format_label(self.vertex(v))
    }

    pub fn index_of(&self, c: Configuration) -> Option<u32> {
        self.vertices.binary_search(&c).ok().map(|i| i as u32)
    }

    pub fn index_of_label(&self, label: &str) -> Option<u32> {
        self.index_of(self.layout.parse_label(label)?)
    }

    /// Remove zero-degree vertices to a fixpoint, then enforce a single
    /// strongly connected component under `policy`. Indices in the report
    /// refer to `self`.
    pub fn prune_and_check(&self, policy: SccPolicy) -> Result<(SicGraph, SccReport), ConnectivityError> {
        let (graph, report) = graph::prune_and_check(&self.graph, policy)?;
        let vertices = report.kept.iter().map(|&v| self.vertices[v as usize]).collect();
        Ok((SicGraph { layout: self.layout, vertices, graph }, report))
    }

    /// `src -> dst` per line with comma-separated labels.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for &(u, v) in self.graph.edges() {
            let _ = writeln!(out, "{} -> {}", self.label(u), self.label(v));
        }
        out
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{name}\" {{");
        for v in 0..self.vertex_count() as u32 {
            let _ = writeln!(out, "  n{v} [label=\"{}\"];", self.label(v));
        }
        for &(u, v) in self.graph.edges() {
            let _ = writeln!(out, "  n{u} -> n{v};");
        }
        out.push_str("}\n");
        out
    }
}
