//! Special bags and the center structure derived from them.
//!
//! Every vertex touched by a change gets one tree node whose bag contains it
//! marked special (canonically the smallest node id); the set stays closed
//! under least common ancestors, which costs at most one extra node per
//! insertion. The maximal clean triangles hang one off each special node:
//! its lower corners are the maximal special descendants (at most one per
//! child subtree, thanks to LCA closure), and their regions partition the
//! non-special tree nodes. The center collects all special-bag vertices,
//! one identifier vertex per petal with inner vertices, and any affected
//! vertices that the snapshot decomposition does not cover.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::decompose::{NiceTreeDecomposition, NodeId};
use crate::graph::VertexId;
use crate::triangle::{subtree_nodes, Triangle};

#[derive(Clone, Debug)]
pub struct SpecialBags {
    set: BTreeSet<NodeId>,
    origin: HashMap<VertexId, NodeId>,
}

impl SpecialBags {
    pub fn new(root: NodeId) -> SpecialBags {
        let mut set = BTreeSet::new();
        set.insert(root);
        SpecialBags {
            set,
            origin: HashMap::new(),
        }
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.set
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn contains(&self, i: NodeId) -> bool {
        self.set.contains(&i)
    }

    pub fn origin_of(&self, v: VertexId) -> Option<NodeId> {
        self.origin.get(&v).copied()
    }

    /// Is some special bag already covering the vertex?
    pub fn covers(&self, ntd: &NiceTreeDecomposition, v: VertexId) -> bool {
        ntd.holders(v).iter().any(|i| self.set.contains(i))
    }

    /// Marks `j` special for affected vertex `v` and restores LCA closure by
    /// adding the deepest LCA of `j` with an existing special node. Adds at
    /// most two nodes.
    pub fn insert_for(&mut self, ntd: &NiceTreeDecomposition, v: VertexId, j: NodeId) {
        self.origin.insert(v, j);
        if self.set.contains(&j) {
            return;
        }
        let mut deepest: Option<NodeId> = None;
        for &s in &self.set {
            let l = ntd.lca(j, s);
            if deepest.map_or(true, |d| ntd.depth_of(l) > ntd.depth_of(d)) {
                deepest = Some(l);
            }
        }
        self.set.insert(j);
        if let Some(l) = deepest {
            self.set.insert(l);
        }
        debug_assert!(self.is_lca_closed(ntd));
    }

    pub fn is_lca_closed(&self, ntd: &NiceTreeDecomposition) -> bool {
        for &a in &self.set {
            for &b in &self.set {
                if !self.set.contains(&ntd.lca(a, b)) {
                    return false;
                }
            }
        }
        true
    }
}

/// The maximal clean triangle rooted at each special node: its lower corners
/// are the special node's maximal special descendants. Returns `(site,
/// triangle)` pairs sorted by site.
pub fn maximal_clean_triangles(
    ntd: &NiceTreeDecomposition,
    special: &BTreeSet<NodeId>,
) -> Vec<(NodeId, Triangle)> {
    let mut children_s: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for &s in special {
        children_s.entry(s).or_default();
        if s == ntd.root() {
            continue;
        }
        let mut p = ntd.parent(s);
        loop {
            if special.contains(&p) {
                children_s.entry(p).or_default().push(s);
                break;
            }
            assert_ne!(
                p,
                ntd.root(),
                "root must be special for the skeleton to anchor"
            );
            p = ntd.parent(p);
        }
    }
    children_s
        .into_iter()
        .map(|(s, mut kids)| {
            kids.sort_unstable();
            let tri = match kids[..] {
                [] => Triangle::open(s),
                [x] => Triangle {
                    i0: s,
                    i1: x,
                    i2: x,
                },
                [x, y] => Triangle {
                    i0: s,
                    i1: x,
                    i2: y,
                },
                _ => panic!(
                    "special node {} has {} maximal special descendants; LCA closure violated",
                    s,
                    kids.len()
                ),
            };
            (s, tri)
        })
        .collect()
}

/// One petal: the region of a maximal clean triangle.
#[derive(Clone, Debug)]
pub struct Petal {
    pub site: NodeId,
    pub triangle: Triangle,
    /// Smallest inner vertex, present when the region has inner vertices.
    pub identifier: Option<VertexId>,
    /// Interface towards the center: corner bags plus the identifier.
    pub interface: Vec<VertexId>,
    pub inner_count: usize,
}

#[derive(Clone, Debug)]
pub struct Center {
    /// The center vertex set C, sorted; its index order is the enumeration N.
    pub vertices: Vec<VertexId>,
    pub petals: Vec<Petal>,
    /// Affected vertices covered by no bag of the snapshot decomposition.
    pub floating: BTreeSet<VertexId>,
}

impl Center {
    /// Derives the center from the current special set. Pure function of
    /// (decomposition, special set, floating vertices).
    pub fn derive(
        ntd: &NiceTreeDecomposition,
        special: &SpecialBags,
        floating: &BTreeSet<VertexId>,
    ) -> Center {
        let mut vertices: BTreeSet<VertexId> = floating.iter().copied().collect();
        for &s in special.nodes() {
            vertices.extend(ntd.bag(s).iter().copied());
        }
        let mut petals = Vec::new();
        for (site, tri) in maximal_clean_triangles(ntd, special.nodes()) {
            let mut interface: BTreeSet<VertexId> = ntd
                .bag(tri.i0)
                .iter()
                .chain(ntd.bag(tri.i1))
                .chain(ntd.bag(tri.i2))
                .copied()
                .collect();
            let mut inner: BTreeSet<VertexId> = BTreeSet::new();
            for i in subtree_nodes(ntd, tri) {
                for &v in ntd.bag(i) {
                    if !interface.contains(&v) {
                        inner.insert(v);
                    }
                }
            }
            let identifier = inner.iter().next().copied();
            if let Some(id) = identifier {
                vertices.insert(id);
                interface.insert(id);
            }
            petals.push(Petal {
                site,
                triangle: tri,
                identifier,
                interface: interface.into_iter().collect(),
                inner_count: inner.len(),
            });
        }
        Center {
            vertices: vertices.into_iter().collect(),
            petals,
            floating: floating.clone(),
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// The enumeration N: position of a center vertex in the sorted order.
    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn size(&self) -> usize {
        self.vertices.len()
    }
}
