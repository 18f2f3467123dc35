//! Tree decompositions: min-fill construction, centroid balancing into
//! logarithmic depth, conversion to nice form (degree <= 2, distinct bags),
//! validation, and ancestor/LCA queries.

mod balance;
mod minfill;
mod nicefy;

pub use balance::{balance, BalanceResult};
pub use minfill::decompose;
pub use nicefy::{nicefy, nicefy_stages};

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::graph::{DynamicGraph, VertexId};

/// Index of a node of the decomposition tree.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("heuristic width {found} exceeds budget {budget}")]
    WidthExceeded { found: usize, budget: usize },
    #[error("node {0} has more than two children; balance must run first")]
    DegenerateInput(NodeId),
}

/// Rooted tree of bags. The root's parent is itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    parent: Vec<NodeId>,
    root: NodeId,
    bags: Vec<Vec<VertexId>>, // each sorted and duplicate-free
}

impl TreeDecomposition {
    pub fn new(parent: Vec<NodeId>, root: NodeId, mut bags: Vec<Vec<VertexId>>) -> Self {
        for bag in &mut bags {
            bag.sort_unstable();
            bag.dedup();
        }
        assert_eq!(parent.len(), bags.len());
        TreeDecomposition { parent, root, bags }
    }

    pub fn single_bag(bag: Vec<VertexId>) -> Self {
        TreeDecomposition::new(vec![NodeId(0)], NodeId(0), vec![bag])
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.bags.len()
    }

    #[inline]
    pub fn root(&self) -> NodeId {
        self.root
    }

    #[inline]
    pub fn parent(&self, i: NodeId) -> NodeId {
        self.parent[i.idx()]
    }

    #[inline]
    pub fn bag(&self, i: NodeId) -> &[VertexId] {
        &self.bags[i.idx()]
    }

    pub fn bag_contains(&self, i: NodeId, v: VertexId) -> bool {
        self.bags[i.idx()].binary_search(&v).is_ok()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.bags.len() as u32).map(NodeId)
    }

    /// Maximum bag size minus one; -1 is clamped to 0 for the empty bag.
    pub fn width(&self) -> usize {
        self.bags
            .iter()
            .map(|b| b.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0)
    }

    pub fn children(&self, i: NodeId) -> Vec<NodeId> {
        self.nodes()
            .filter(|&j| j != self.root && self.parent(j) == i)
            .collect()
    }

    pub fn children_lists(&self) -> Vec<Vec<NodeId>> {
        let mut lists = vec![Vec::new(); self.num_nodes()];
        for j in self.nodes() {
            if j != self.root {
                lists[self.parent(j).idx()].push(j);
            }
        }
        lists
    }

    /// Node depths; root has depth 0.
    pub fn depths(&self) -> Vec<u32> {
        let lists = self.children_lists();
        let mut depth = vec![0u32; self.num_nodes()];
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            for &c in &lists[i.idx()] {
                depth[c.idx()] = depth[i.idx()] + 1;
                stack.push(c);
            }
        }
        depth
    }

    pub fn depth(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0) as usize
    }

    /// Dump format: one line per node, `id parent_id bag:v1,v2,...`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for i in self.nodes() {
            let bag: Vec<String> = self.bag(i).iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("{} {} bag:{}\n", i, self.parent(i), bag.join(",")));
        }
        out
    }
}

/// One violated decomposition property with a concrete witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Property (1): active-domain vertex in no bag.
    MissingVertex(VertexId),
    /// Property (2): edge with no bag containing both endpoints.
    UncoveredEdge(VertexId, VertexId),
    /// Property (3): the bags containing the vertex are not connected; the two
    /// nodes are topmost nodes of two distinct components.
    DisconnectedVertex(VertexId, NodeId, NodeId),
    /// Tree shape: parent cycle or unreachable node.
    MalformedTree(NodeId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingVertex(v) => write!(f, "vertex {} occurs in no bag", v),
            Violation::UncoveredEdge(u, v) => {
                write!(f, "edge {{{},{}}} not contained in any bag", u, v)
            }
            Violation::DisconnectedVertex(v, a, b) => write!(
                f,
                "bags containing vertex {} split into components topped by nodes {} and {}",
                v, a, b
            ),
            Violation::MalformedTree(i) => write!(f, "node {} unreachable from root", i),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks decomposition properties (1)-(3) against the graph and reports each
/// violation with a witness.
pub fn verify_td(g: &DynamicGraph, td: &TreeDecomposition) -> ValidationReport {
    let mut report = ValidationReport::default();

    // tree shape: every node must reach the root by parent pointers
    for i in td.nodes() {
        let mut cur = i;
        let mut steps = 0;
        while cur != td.root() {
            cur = td.parent(cur);
            steps += 1;
            if steps > td.num_nodes() {
                report.violations.push(Violation::MalformedTree(i));
                return report;
            }
        }
    }

    let mut holders: std::collections::HashMap<VertexId, BTreeSet<NodeId>> = Default::default();
    for i in td.nodes() {
        for &v in td.bag(i) {
            holders.entry(v).or_default().insert(i);
        }
    }

    for v in g.active_domain() {
        if !holders.contains_key(&v) {
            report.violations.push(Violation::MissingVertex(v));
        }
    }

    'edges: for e in g.edges() {
        let (u, v) = e.endpoints();
        if let (Some(hu), Some(hv)) = (holders.get(&u), holders.get(&v)) {
            if hu.intersection(hv).next().is_some() {
                continue 'edges;
            }
        }
        report.violations.push(Violation::UncoveredEdge(u, v));
    }

    for (&v, nodes) in &holders {
        // topmost nodes of components: node whose parent is outside the set
        let tops: Vec<NodeId> = nodes
            .iter()
            .copied()
            .filter(|&i| i == td.root() || !nodes.contains(&td.parent(i)))
            .collect();
        if tops.len() > 1 {
            report
                .violations
                .push(Violation::DisconnectedVertex(v, tops[0], tops[1]));
        }
    }

    report.violations.sort_by_key(|v| format!("{:?}", v));
    report
}

/// Nice tree decomposition: degree <= 2, pairwise-distinct bags, depth
/// `<= d_factor * log2(n)`, with precomputed ancestor structure.
#[derive(Clone, Debug)]
pub struct NiceTreeDecomposition {
    td: TreeDecomposition,
    universe: u32,
    depth_of: Vec<u32>,
    depth: usize,
    d_factor: f64,
    children: Vec<Vec<NodeId>>, // ordered by node id, <= 2 entries
    up: Vec<Vec<NodeId>>,       // binary lifting: up[k][i] = 2^k-th ancestor
    tin: Vec<u32>,
    tout: Vec<u32>,
    holders: Vec<Vec<NodeId>>, // vertex -> sorted nodes whose bag contains it
}

/// `ceil(log2(max(n, 2)))`, the depth yardstick.
pub fn log2_ceil(n: u32) -> u32 {
    let n = n.max(2);
    32 - (n - 1).leading_zeros()
}

impl NiceTreeDecomposition {
    pub(crate) fn from_td(td: TreeDecomposition, universe: u32) -> Result<Self, DecomposeError> {
        let children = td.children_lists();
        for i in td.nodes() {
            if children[i.idx()].len() > 2 {
                return Err(DecomposeError::DegenerateInput(i));
            }
        }
        let depth_of = td.depths();
        let depth = depth_of.iter().copied().max().unwrap_or(0) as usize;
        let d_factor = depth as f64 / log2_ceil(universe) as f64;

        let n_nodes = td.num_nodes();
        let levels = (usize::BITS - n_nodes.leading_zeros()).max(1) as usize;
        let mut up = vec![vec![td.root(); n_nodes]; levels];
        // Euler intervals for ancestor tests
        let mut tin = vec![0u32; n_nodes];
        let mut tout = vec![0u32; n_nodes];
        let mut timer = 0u32;
        let mut stack = vec![(td.root(), false)];
        while let Some((i, done)) = stack.pop() {
            if done {
                tout[i.idx()] = timer;
                timer += 1;
                continue;
            }
            tin[i.idx()] = timer;
            timer += 1;
            stack.push((i, true));
            for &c in children[i.idx()].iter().rev() {
                up[0][c.idx()] = i;
                stack.push((c, false));
            }
        }
        for k in 1..levels {
            for i in 0..n_nodes {
                up[k][i] = up[k - 1][up[k - 1][i].idx()];
            }
        }

        let mut holders: Vec<Vec<NodeId>> = vec![Vec::new(); universe as usize];
        for i in td.nodes() {
            for &v in td.bag(i) {
                holders[v.idx()].push(i);
            }
        }
        for h in &mut holders {
            h.sort_unstable();
        }

        Ok(NiceTreeDecomposition {
            td,
            universe,
            depth_of,
            depth,
            d_factor,
            children,
            up,
            tin,
            tout,
            holders,
        })
    }

    #[inline]
    pub fn td(&self) -> &TreeDecomposition {
        &self.td
    }

    #[inline]
    pub fn universe(&self) -> u32 {
        self.universe
    }

    #[inline]
    pub fn root(&self) -> NodeId {
        self.td.root()
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.td.num_nodes()
    }

    #[inline]
    pub fn bag(&self, i: NodeId) -> &[VertexId] {
        self.td.bag(i)
    }

    #[inline]
    pub fn parent(&self, i: NodeId) -> NodeId {
        self.td.parent(i)
    }

    #[inline]
    pub fn children(&self, i: NodeId) -> &[NodeId] {
        &self.children[i.idx()]
    }

    #[inline]
    pub fn depth_of(&self, i: NodeId) -> u32 {
        self.depth_of[i.idx()]
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    pub fn d_factor(&self) -> f64 {
        self.d_factor
    }

    pub fn max_bag_size(&self) -> usize {
        self.td.max_bag_size()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        self.td.nodes()
    }

    /// The `preceq` order: is `i` an ancestor of `j` (or equal)?
    #[inline]
    pub fn is_ancestor(&self, i: NodeId, j: NodeId) -> bool {
        self.tin[i.idx()] <= self.tin[j.idx()] && self.tout[j.idx()] <= self.tout[i.idx()]
    }

    /// Deepest common ancestor, via binary lifting.
    pub fn lca(&self, i: NodeId, j: NodeId) -> NodeId {
        if self.is_ancestor(i, j) {
            return i;
        }
        if self.is_ancestor(j, i) {
            return j;
        }
        let mut cur = i;
        for k in (0..self.up.len()).rev() {
            let cand = self.up[k][cur.idx()];
            if !self.is_ancestor(cand, j) {
                cur = cand;
            }
        }
        self.up[0][cur.idx()]
    }

    /// Nodes whose bag contains `v`, sorted by id; empty if uncovered.
    #[inline]
    pub fn holders(&self, v: VertexId) -> &[NodeId] {
        &self.holders[v.idx()]
    }

    /// Smallest node id whose bag contains `v` (the canonical choice).
    pub fn smallest_node_containing(&self, v: VertexId) -> Option<NodeId> {
        self.holders[v.idx()].first().copied()
    }

    /// Checks the niceness predicates themselves: degree, distinct bags.
    pub fn check_niceness(&self) -> Result<(), String> {
        for i in self.nodes() {
            if self.children(i).len() > 2 {
                return Err(format!("node {} has degree > 2", i));
            }
        }
        let mut seen: std::collections::HashMap<&[VertexId], NodeId> = Default::default();
        for i in self.nodes() {
            if let Some(prev) = seen.insert(self.td.bag(i), i) {
                return Err(format!("nodes {} and {} share bag", prev, i));
            }
        }
        Ok(())
    }
}

/// Runs the whole pipeline: min-fill, balance, nicefy.
pub fn build_nice(
    g: &DynamicGraph,
    width_budget: usize,
) -> Result<NiceTreeDecomposition, DecomposeError> {
    let td = decompose(g, width_budget)?;
    let balanced = balance(&td);
    nicefy(&balanced.td, g.universe())
}
