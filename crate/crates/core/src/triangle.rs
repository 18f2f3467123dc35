//! Triangles of a nice tree decomposition and their induced scopes.
//!
//! A triangle `(i0, i1, i2)` with `i0` an ancestor of both others delimits
//! the region of the tree below `i0` but not strictly below `i1` or `i2`.
//! Its interface is the union of the three corner bags; all other vertices
//! appearing in the region are inner; its scoped edges are the graph edges
//! with at least one inner endpoint.

use crate::decompose::{NiceTreeDecomposition, NodeId};
use crate::graph::{DynamicGraph, VertexId};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TriangleKind {
    Open,
    Unary,
    Proper,
}

/// Corner triple, canonicalised so that `i1 <= i2`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Triangle {
    pub i0: NodeId,
    pub i1: NodeId,
    pub i2: NodeId,
}

impl Triangle {
    /// Validates corner relations: `i0` must be an ancestor of `i1` and `i2`,
    /// and the lower corners must be equal or incomparable.
    pub fn new(
        ntd: &NiceTreeDecomposition,
        i0: NodeId,
        i1: NodeId,
        i2: NodeId,
    ) -> Option<Triangle> {
        let (i1, i2) = if i1 <= i2 { (i1, i2) } else { (i2, i1) };
        if !ntd.is_ancestor(i0, i1) || !ntd.is_ancestor(i0, i2) {
            return None;
        }
        if i1 != i2 {
            if i1 == i0 || i2 == i0 {
                return None; // comparable lower corners
            }
            if ntd.is_ancestor(i1, i2) || ntd.is_ancestor(i2, i1) {
                return None;
            }
        }
        Some(Triangle { i0, i1, i2 })
    }

    pub fn open(i0: NodeId) -> Triangle {
        Triangle { i0, i1: i0, i2: i0 }
    }

    pub fn kind(&self) -> TriangleKind {
        if self.i0 == self.i1 && self.i0 == self.i2 {
            TriangleKind::Open
        } else if self.i1 == self.i2 {
            TriangleKind::Unary
        } else {
            TriangleKind::Proper
        }
    }

    /// Lower corners other than `i0`.
    pub fn limits(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        if self.i1 != self.i0 {
            out.push(self.i1);
        }
        if self.i2 != self.i0 && self.i2 != self.i1 {
            out.push(self.i2);
        }
        out
    }
}

impl std::fmt::Display for Triangle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.i0, self.i1, self.i2)
    }
}

/// The region delimited by a triangle.
#[derive(Clone, Debug)]
pub struct TriangleScope {
    pub triangle: Triangle,
    pub subtree_nodes: Vec<NodeId>,
    pub interface: Vec<VertexId>,
    pub inner: Vec<VertexId>,
    pub scoped_edges: Vec<(VertexId, VertexId)>,
}

/// Tree nodes of the region: descendants of `i0` that are not strictly below
/// a lower corner.
pub fn subtree_nodes(ntd: &NiceTreeDecomposition, t: Triangle) -> Vec<NodeId> {
    let mut nodes = Vec::new();
    let mut stack = vec![t.i0];
    while let Some(i) = stack.pop() {
        nodes.push(i);
        if (i == t.i1 && i != t.i0) || (i == t.i2 && i != t.i0) {
            continue; // lower corner: keep it but do not descend
        }
        for &c in ntd.children(i) {
            stack.push(c);
        }
    }
    nodes.sort_unstable();
    nodes
}

/// Computes the full scope of a triangle against the graph.
pub fn triangle_scope(g: &DynamicGraph, ntd: &NiceTreeDecomposition, t: Triangle) -> TriangleScope {
    let nodes = subtree_nodes(ntd, t);
    let mut verts: Vec<VertexId> = nodes
        .iter()
        .flat_map(|&i| ntd.bag(i).iter().copied())
        .collect();
    verts.sort_unstable();
    verts.dedup();

    let mut interface: Vec<VertexId> = ntd
        .bag(t.i0)
        .iter()
        .chain(ntd.bag(t.i1))
        .chain(ntd.bag(t.i2))
        .copied()
        .collect();
    interface.sort_unstable();
    interface.dedup();

    let inner: Vec<VertexId> = verts
        .iter()
        .copied()
        .filter(|v| interface.binary_search(v).is_err())
        .collect();

    let adj = g.adjacency();
    let mut scoped_edges = Vec::new();
    for &v in &inner {
        for &w in &adj[v.idx()] {
            if inner.binary_search(&w).is_ok() {
                if v < w {
                    scoped_edges.push((v, w));
                }
            } else {
                let (a, b) = if v < w { (v, w) } else { (w, v) };
                scoped_edges.push((a, b));
            }
        }
    }
    scoped_edges.sort_unstable();
    scoped_edges.dedup();

    TriangleScope {
        triangle: t,
        subtree_nodes: nodes,
        interface,
        inner,
        scoped_edges,
    }
}

/// Number of inner tree nodes: region nodes other than the corners.
pub fn inner_tree_nodes(ntd: &NiceTreeDecomposition, t: Triangle) -> usize {
    let nodes = subtree_nodes(ntd, t);
    let mut corners = vec![t.i0, t.i1, t.i2];
    corners.sort_unstable();
    corners.dedup();
    nodes.len() - corners.len()
}

/// All triangles whose region has at least one inner vertex, plus all open
/// triangles, grouped by region size so that the inductive dependencies of a
/// triangle appear in strictly earlier groups. Quadratic in the node count;
/// intended for tests and small decompositions.
pub fn enumerate_triangles(ntd: &NiceTreeDecomposition) -> Vec<Vec<Triangle>> {
    let nodes: Vec<NodeId> = ntd.nodes().collect();
    let mut with_size: Vec<(usize, Triangle)> = Vec::new();
    for &i0 in &nodes {
        for &i1 in &nodes {
            if !ntd.is_ancestor(i0, i1) {
                continue;
            }
            for &i2 in &nodes {
                if i2 < i1 {
                    continue;
                }
                let t = match Triangle::new(ntd, i0, i1, i2) {
                    Some(t) => t,
                    None => continue,
                };
                let keep = t.kind() == TriangleKind::Open || {
                    let nodes = subtree_nodes(ntd, t);
                    let mut verts: Vec<VertexId> = nodes
                        .iter()
                        .flat_map(|&i| ntd.bag(i).iter().copied())
                        .collect();
                    verts.sort_unstable();
                    verts.dedup();
                    let iface: std::collections::BTreeSet<VertexId> = ntd
                        .bag(t.i0)
                        .iter()
                        .chain(ntd.bag(t.i1))
                        .chain(ntd.bag(t.i2))
                        .copied()
                        .collect();
                    verts.iter().any(|v| !iface.contains(v))
                };
                if keep {
                    with_size.push((subtree_nodes(ntd, t).len(), t));
                }
            }
        }
    }
    with_size.sort_by_key(|&(size, t)| (size, t));
    with_size.dedup();
    let mut groups: Vec<Vec<Triangle>> = Vec::new();
    let mut cur_size = usize::MAX;
    for (size, t) in with_size {
        if size != cur_size {
            groups.push(Vec::new());
            cur_size = size;
        }
        groups.last_mut().unwrap().push(t);
    }
    groups
}
