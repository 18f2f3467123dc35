//! Dynamic graph-query engine for bounded-treewidth graphs.
//!
//! Maintains answers to 3-colourability and minimum vertex cover / dominating
//! set queries (with witnesses) on an undirected graph over a fixed vertex
//! universe, under single-edge insertions and deletions. The strategy is
//! periodic recomputation: every epoch a balanced nice tree decomposition and
//! per-triangle DP tables are rebuilt from a snapshot (sliced over the first
//! half of the epoch), while an incremental layer answers queries against the
//! stale tables by tracking special bags, a logarithmic-size center and
//! per-petal tables.

pub mod decompose;
pub mod dp;
pub mod engine;
pub mod graph;
pub mod oracle;
pub mod runner;
pub mod script;
pub mod triangle;

pub use dp::{Answer, Plugin};
pub use engine::EpochEngine;
pub use graph::{DynamicGraph, Edge, EdgeChange, VertexId};
