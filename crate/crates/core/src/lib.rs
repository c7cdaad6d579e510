//! Single-input-change (SIC) test vector generation for sequential cells.
//!
//! Given a cell's state table, [`state_table`] parses and hold-expands it,
//! [`sicstg`] builds the transition graph whose edges are the SIC
//! transitions the table permits, [`dcpw`] finds the shortest closed walk
//! covering every edge, and [`vectors`] turns that walk into stimuli with
//! expected memory values, replays them against the table and reports
//! coverage.

pub mod cli;
pub mod config;
pub mod dcpw;
pub mod graph;
pub mod sicstg;
pub mod state_table;
pub mod transport;
pub mod vectors;

pub use config::{Configuration, EdgeValue, Layout};
pub use dcpw::{dcpw, PostmanWalk};
pub use graph::{Digraph, SccPolicy, SccReport};
pub use sicstg::SicGraph;
pub use state_table::{expand, parse, StateTable};
pub use vectors::{replay, walk_to_vectors, TestVectorSequence};

/// Cost of one traversal in the postman walk: unit per applied vector.
pub type EdgeCost = u64;

/// Transportation plan with walk-length costs.
pub type WalkTransport = transport::TransportSolution<EdgeCost>;
