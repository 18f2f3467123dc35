//! Dynamic undirected graph over a fixed vertex universe.
//!
//! The universe size `n` is fixed per session; changes insert or delete a
//! single edge. Changes violating their preconditions are hard errors rather
//! than no-ops, so that replaying a change log is unambiguous.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Index of a vertex in the session-fixed universe `[0, n)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

/// An undirected edge, stored once as the ordered pair `(min, max)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Edge {
    u: VertexId,
    v: VertexId,
}

impl Edge {
    /// Normalising constructor; self-loops are rejected.
    pub fn new(a: VertexId, b: VertexId) -> Result<Edge, GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        Ok(Edge { u, v })
    }

    #[inline]
    pub fn endpoints(self) -> (VertexId, VertexId) {
        (self.u, self.v)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.u, self.v)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChangeKind {
    Insert,
    Delete,
}

/// A single-edge change.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct EdgeChange {
    pub kind: ChangeKind,
    pub edge: Edge,
}

impl EdgeChange {
    pub fn insert(a: VertexId, b: VertexId) -> Result<EdgeChange, GraphError> {
        Ok(EdgeChange {
            kind: ChangeKind::Insert,
            edge: Edge::new(a, b)?,
        })
    }

    pub fn delete(a: VertexId, b: VertexId) -> Result<EdgeChange, GraphError> {
        Ok(EdgeChange {
            kind: ChangeKind::Delete,
            edge: Edge::new(a, b)?,
        })
    }
}

impl fmt::Display for EdgeChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (u, v) = self.edge.endpoints();
        match self.kind {
            ChangeKind::Insert => write!(f, "insert {} {}", u, v),
            ChangeKind::Delete => write!(f, "delete {} {}", u, v),
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0} is not allowed")]
    SelfLoop(VertexId),
    #[error("vertex {0} outside universe of size {1}")]
    VertexOutOfRange(VertexId, u32),
    #[error("insert of already-present edge {0}")]
    DuplicateInsert(Edge),
    #[error("delete of absent edge {0}")]
    MissingDelete(Edge),
}

/// Mutable undirected graph over the universe `[0, n)` with a monotone
/// version counter. `snapshot` yields an immutable value copy that later
/// changes to the source do not affect.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicGraph {
    n: u32,
    edges: BTreeSet<Edge>,
    version: u64,
}

impl DynamicGraph {
    pub fn new(n: u32) -> DynamicGraph {
        DynamicGraph {
            n,
            edges: BTreeSet::new(),
            version: 0,
        }
    }

    #[inline]
    pub fn universe(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn version(&self) -> u64 {
        self.version
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if v.0 >= self.n {
            Err(GraphError::VertexOutOfRange(v, self.n))
        } else {
            Ok(())
        }
    }

    /// Applies a single change, incrementing the version on success.
    pub fn apply_change(&mut self, c: EdgeChange) -> Result<(), GraphError> {
        let (u, v) = c.edge.endpoints();
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        match c.kind {
            ChangeKind::Insert => {
                if !self.edges.insert(c.edge) {
                    return Err(GraphError::DuplicateInsert(c.edge));
                }
            }
            ChangeKind::Delete => {
                if !self.edges.remove(&c.edge) {
                    return Err(GraphError::MissingDelete(c.edge));
                }
            }
        }
        self.version += 1;
        Ok(())
    }

    /// Vertices incident to at least one edge.
    pub fn active_domain(&self) -> BTreeSet<VertexId> {
        let mut dom = BTreeSet::new();
        for e in &self.edges {
            let (u, v) = e.endpoints();
            dom.insert(u);
            dom.insert(v);
        }
        dom
    }

    /// Immutable value copy at the current version.
    pub fn snapshot(&self) -> DynamicGraph {
        self.clone()
    }

    /// Neighbour sets over the whole universe, indexed by vertex.
    pub fn adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut adj = vec![Vec::new(); self.n as usize];
        for e in &self.edges {
            let (u, v) = e.endpoints();
            adj[u.idx()].push(v);
            adj[v.idx()].push(u);
        }
        adj
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.edges
            .iter()
            .filter(|e| {
                let (a, b) = e.endpoints();
                a == v || b == v
            })
            .count()
    }
}

/// Parses the edge-list text format: one `u v` pair per line, 0-based; blank
/// lines and lines starting with `#` are ignored.
pub fn parse_edge_list(n: u32, text: &str) -> Result<DynamicGraph, String> {
    let mut g = DynamicGraph::new(n);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<VertexId, String> {
            tok.ok_or_else(|| format!("line {}: missing vertex", lineno + 1))?
                .parse::<u32>()
                .map(VertexId)
                .map_err(|e| format!("line {}: {}", lineno + 1, e))
        };
        let u = parse(it.next())?;
        let v = parse(it.next())?;
        if it.next().is_some() {
            return Err(format!("line {}: trailing tokens", lineno + 1));
        }
        let change = EdgeChange::insert(u, v).map_err(|e| format!("line {}: {}", lineno + 1, e))?;
        g.apply_change(change)
            .map_err(|e| format!("line {}: {}", lineno + 1, e))?;
    }
    Ok(g)
}

/// Writes the edge-list text format.
pub fn write_edge_list(g: &DynamicGraph) -> String {
    let mut out = String::new();
    for e in g.edges() {
        let (u, v) = e.endpoints();
        out.push_str(&format!("{} {}\n", u, v));
    }
    out
}
