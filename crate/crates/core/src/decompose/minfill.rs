//! Min-fill elimination-order construction of a tree decomposition.

use std::collections::{BTreeSet, HashMap};

use crate::graph::{DynamicGraph, VertexId};

use super::{DecomposeError, NodeId, TreeDecomposition};

/// Builds a tree decomposition of the active subgraph by eliminating, at each
/// step, the vertex whose elimination adds the fewest fill edges (ties broken
/// by smallest vertex id). The bag of an eliminated vertex is itself plus its
/// neighbours at elimination time; its parent is the node of the member of the
/// bag eliminated earliest afterwards. The empty graph yields a single empty
/// root bag.
pub fn decompose(
    g: &DynamicGraph,
    width_budget: usize,
) -> Result<TreeDecomposition, DecomposeError> {
    let active: Vec<VertexId> = g.active_domain().into_iter().collect();
    if active.is_empty() {
        return Ok(TreeDecomposition::single_bag(Vec::new()));
    }

    let mut adj: HashMap<VertexId, BTreeSet<VertexId>> = HashMap::new();
    for v in &active {
        adj.insert(*v, BTreeSet::new());
    }
    for e in g.edges() {
        let (u, v) = e.endpoints();
        adj.get_mut(&u).unwrap().insert(v);
        adj.get_mut(&v).unwrap().insert(u);
    }

    let fill_count = |adj: &HashMap<VertexId, BTreeSet<VertexId>>, v: VertexId| -> usize {
        let nbrs: Vec<VertexId> = adj[&v].iter().copied().collect();
        let mut missing = 0;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in nbrs.iter().skip(i + 1) {
                if !adj[&a].contains(&b) {
                    missing += 1;
                }
            }
        }
        missing
    };

    let mut remaining: BTreeSet<VertexId> = active.iter().copied().collect();
    let mut order: Vec<VertexId> = Vec::with_capacity(active.len());
    let mut bags: Vec<Vec<VertexId>> = Vec::with_capacity(active.len());
    let mut width = 0usize;

    while let Some(&first) = remaining.iter().next() {
        let mut best = first;
        let mut best_fill = usize::MAX;
        for &v in &remaining {
            let f = fill_count(&adj, v);
            if f < best_fill {
                best_fill = f;
                best = v;
            }
        }
        let nbrs: Vec<VertexId> = adj[&best].iter().copied().collect();
        let mut bag = nbrs.clone();
        bag.push(best);
        bag.sort_unstable();
        width = width.max(bag.len().saturating_sub(1));
        bags.push(bag);
        order.push(best);

        for (i, &a) in nbrs.iter().enumerate() {
            for &b in nbrs.iter().skip(i + 1) {
                adj.get_mut(&a).unwrap().insert(b);
                adj.get_mut(&b).unwrap().insert(a);
            }
        }
        for &a in &nbrs {
            adj.get_mut(&a).unwrap().remove(&best);
        }
        adj.remove(&best);
        remaining.remove(&best);
    }

    if width > width_budget {
        return Err(DecomposeError::WidthExceeded {
            found: width,
            budget: width_budget,
        });
    }

    // elimination position of each vertex
    let position: HashMap<VertexId, usize> =
        order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let root = NodeId(order.len() as u32 - 1);
    let mut parent: Vec<NodeId> = (0..order.len() as u32).map(NodeId).collect();
    for (i, bagged) in bags.iter().enumerate() {
        let later = bagged
            .iter()
            .filter(|&&w| w != order[i])
            .map(|w| position[w])
            .min();
        parent[i] = match later {
            Some(p) => NodeId(p as u32),
            None => root, // last vertex of a component hangs off the root
        };
    }
    parent[root.idx()] = root;

    Ok(TreeDecomposition::new(parent, root, bags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::verify_td;
    use crate::graph::EdgeChange;

    fn graph(n: u32, edges: &[(u32, u32)]) -> DynamicGraph {
        let mut g = DynamicGraph::new(n);
        for &(u, v) in edges {
            g.apply_change(EdgeChange::insert(VertexId(u), VertexId(v)).unwrap())
                .unwrap();
        }
        g
    }

    #[test]
    fn triangle_single_bag() {
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let td = decompose(&g, 2).unwrap();
        assert_eq!(td.width(), 2);
        assert!(verify_td(&g, &td).is_empty());
        assert!(td.nodes().any(|i| td.bag(i).len() == 3));
    }

    #[test]
    fn path_width_one() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let td = decompose(&g, 1).unwrap();
        assert_eq!(td.width(), 1);
        assert!(verify_td(&g, &td).is_empty());
    }

    #[test]
    fn width_budget_enforced() {
        let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert!(matches!(
            decompose(&k4, 2),
            Err(DecomposeError::WidthExceeded {
                found: 3,
                budget: 2
            })
        ));
        assert!(decompose(&k4, 3).is_ok());
    }

    #[test]
    fn empty_graph_single_empty_bag() {
        let g = DynamicGraph::new(8);
        let td = decompose(&g, 0).unwrap();
        assert_eq!(td.num_nodes(), 1);
        assert!(td.bag(td.root()).is_empty());
        assert!(verify_td(&g, &td).is_empty());
    }

    #[test]
    fn disconnected_components_glue_at_root() {
        let g = graph(6, &[(0, 1), (2, 3), (4, 5)]);
        let td = decompose(&g, 1).unwrap();
        assert!(verify_td(&g, &td).is_empty());
    }
}
