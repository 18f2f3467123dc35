//! Conversion of a balanced decomposition into nice form via three
//! transformations: pruning of subsumed leaves, contraction of redundant
//! degree-1 chains, and bag disambiguation through unique leaf-witness
//! vertices added along the paths to the leftmost and rightmost leaves.
//! Bag sizes grow by at most 2 and the depth never increases.

use std::collections::HashMap;

use crate::graph::VertexId;

use super::{DecomposeError, NiceTreeDecomposition, NodeId, TreeDecomposition};

struct Mut {
    bags: Vec<Vec<VertexId>>,
    parent: Vec<usize>,
    alive: Vec<bool>,
    root: usize,
}

impl Mut {
    fn from_td(td: &TreeDecomposition) -> Mut {
        Mut {
            bags: td.nodes().map(|i| td.bag(i).to_vec()).collect(),
            parent: td.nodes().map(|i| td.parent(i).idx()).collect(),
            alive: vec![true; td.num_nodes()],
            root: td.root().idx(),
        }
    }

    fn child_lists(&self) -> Vec<Vec<usize>> {
        let mut lists = vec![Vec::new(); self.parent.len()];
        for j in 0..self.parent.len() {
            if self.alive[j] && j != self.root {
                lists[self.parent[j]].push(j);
            }
        }
        lists
    }

    fn subset(&self, a: usize, b: usize) -> bool {
        let (ba, bb) = (&self.bags[a], &self.bags[b]);
        ba.iter().all(|v| bb.binary_search(v).is_ok())
    }

    fn to_td(&self) -> TreeDecomposition {
        let live: Vec<usize> = (0..self.parent.len()).filter(|&i| self.alive[i]).collect();
        let index: HashMap<usize, u32> = live
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new as u32))
            .collect();
        let bags = live.iter().map(|&i| self.bags[i].clone()).collect();
        let parent = live
            .iter()
            .map(|&i| {
                if i == self.root {
                    NodeId(index[&i])
                } else {
                    NodeId(index[&self.parent[i]])
                }
            })
            .collect();
        TreeDecomposition::new(parent, NodeId(index[&self.root]), bags)
    }
}

/// Transformation (a): repeatedly removes leaves whose bag is contained in
/// the parent bag. Afterwards every leaf carries a vertex unique to it.
fn prune_subsumed_leaves(m: &mut Mut) {
    loop {
        let lists = m.child_lists();
        let mut removed = false;
        for i in 0..m.parent.len() {
            if !m.alive[i] || i == m.root || !lists[i].is_empty() {
                continue;
            }
            if m.subset(i, m.parent[i]) {
                m.alive[i] = false;
                removed = true;
            }
        }
        if !removed {
            return;
        }
    }
}

/// Transformation (b): contracts an inner degree-1 node whose bag is
/// contained in its parent's or its child's bag. A root in that situation is
/// replaced by its child.
fn contract_chains(m: &mut Mut) {
    loop {
        let mut changed = false;
        let lists = m.child_lists();
        for i in 0..m.parent.len() {
            if !m.alive[i] {
                continue;
            }
            let kids = &lists[i];
            if kids.len() != 1 {
                continue;
            }
            let child = kids[0];
            if i == m.root {
                if m.subset(i, child) {
                    m.alive[i] = false;
                    m.root = child;
                    changed = true;
                    break;
                }
            } else if m.subset(i, m.parent[i]) || m.subset(i, child) {
                m.parent[child] = m.parent[i];
                m.alive[i] = false;
                changed = true;
                break;
            }
        }
        if !changed {
            return;
        }
    }
}

/// Transformation (c): to every inner node adds the unique witness vertices
/// of the leftmost and rightmost leaves of its subtree, along the full paths
/// down to those leaves (preserving the connectivity property). Children are
/// ordered by node id; witnesses are the smallest eligible vertex.
fn distinguish_bags(m: &mut Mut) {
    let lists = m.child_lists();
    // unique witness per leaf: smallest vertex not in the parent bag
    let mut witness: HashMap<usize, VertexId> = HashMap::new();
    for i in 0..m.parent.len() {
        if !m.alive[i] || !lists[i].is_empty() {
            continue;
        }
        if i == m.root {
            continue; // single-node decomposition needs no disambiguation
        }
        let p = m.parent[i];
        let w = m.bags[i]
            .iter()
            .copied()
            .find(|v| m.bags[p].binary_search(v).is_err())
            .expect("pruned leaf must contain a vertex outside its parent bag");
        witness.insert(i, w);
    }

    let extreme = |i: usize, take_max: bool| -> usize {
        let mut cur = i;
        loop {
            let kids = &lists[cur];
            if kids.is_empty() {
                return cur;
            }
            cur = if take_max {
                *kids.iter().max().unwrap()
            } else {
                *kids.iter().min().unwrap()
            };
        }
    };

    let mut additions: Vec<(usize, VertexId)> = Vec::new();
    for i in 0..m.parent.len() {
        if !m.alive[i] || lists[i].is_empty() {
            continue;
        }
        for take_max in [false, true] {
            let leaf = extreme(i, take_max);
            if let Some(&w) = witness.get(&leaf) {
                // the path from i down to the leaf
                let mut cur = leaf;
                loop {
                    additions.push((cur, w));
                    if cur == i {
                        break;
                    }
                    cur = m.parent[cur];
                }
            }
        }
    }
    for (node, w) in additions {
        if m.bags[node].binary_search(&w).is_err() {
            let pos = m.bags[node].partition_point(|&x| x < w);
            m.bags[node].insert(pos, w);
        }
    }
}

/// Applies the three transformations in order and freezes the result with its
/// ancestor indices. Errors with `DegenerateInput` if some node has more than
/// two children.
pub fn nicefy(
    td: &TreeDecomposition,
    universe: u32,
) -> Result<NiceTreeDecomposition, DecomposeError> {
    let lists = td.children_lists();
    for i in td.nodes() {
        if lists[i.idx()].len() > 2 {
            return Err(DecomposeError::DegenerateInput(i));
        }
    }
    let mut m = Mut::from_td(td);
    prune_subsumed_leaves(&mut m);
    contract_chains(&mut m);
    distinguish_bags(&mut m);
    NiceTreeDecomposition::from_td(m.to_td(), universe)
}

/// Exposes the sub-steps for property tests: the decomposition after (a),
/// after (a)+(b), and after all three transformations.
pub fn nicefy_stages(
    td: &TreeDecomposition,
) -> (TreeDecomposition, TreeDecomposition, TreeDecomposition) {
    let mut m = Mut::from_td(td);
    prune_subsumed_leaves(&mut m);
    let after_a = m.to_td();
    contract_chains(&mut m);
    let after_b = m.to_td();
    distinguish_bags(&mut m);
    (after_a, after_b, m.to_td())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{balance, decompose, verify_td};
    use crate::graph::{DynamicGraph, EdgeChange};

    fn graph(n: u32, edges: &[(u32, u32)]) -> DynamicGraph {
        let mut g = DynamicGraph::new(n);
        for &(u, v) in edges {
            g.apply_change(EdgeChange::insert(VertexId(u), VertexId(v)).unwrap())
                .unwrap();
        }
        g
    }

    fn bag(vs: &[u32]) -> Vec<VertexId> {
        vs.iter().map(|&v| VertexId(v)).collect()
    }

    #[test]
    fn duplicate_adjacent_bags_resolved() {
        let td = TreeDecomposition::new(
            vec![NodeId(0), NodeId(0)],
            NodeId(0),
            vec![bag(&[0, 1]), bag(&[0, 1])],
        );
        let ntd = nicefy(&td, 2).unwrap();
        ntd.check_niceness().unwrap();
        assert_eq!(ntd.num_nodes(), 1);
    }

    #[test]
    fn width_grows_by_at_most_two() {
        let g = graph(
            16,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (6, 7),
                (7, 8),
                (8, 9),
                (9, 10),
                (10, 11),
                (11, 12),
                (12, 13),
                (13, 14),
                (14, 15),
            ],
        );
        let td = decompose(&g, 1).unwrap();
        let balanced = balance(&td);
        let w_in = balanced.td.width();
        let ntd = nicefy(&balanced.td, 16).unwrap();
        assert!(ntd.td().width() <= w_in + 2);
        assert!(verify_td(&g, ntd.td()).is_empty());
        ntd.check_niceness().unwrap();
    }

    #[test]
    fn pipeline_on_path_16() {
        let g = graph(
            16,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (6, 7),
                (7, 8),
                (8, 9),
                (9, 10),
                (10, 11),
                (11, 12),
                (12, 13),
                (13, 14),
                (14, 15),
            ],
        );
        let td = decompose(&g, 1).unwrap();
        let balanced = balance(&td);
        assert!(verify_td(&g, &balanced.td).is_empty());
        let ntd = nicefy(&balanced.td, 16).unwrap();
        assert!(verify_td(&g, ntd.td()).is_empty());
        ntd.check_niceness().unwrap();
        assert!(ntd.depth() as f64 <= 6.0 * 4.0, "depth {}", ntd.depth());
    }

    #[test]
    fn stages_preserve_validity() {
        let g = graph(
            12,
            &[
                (0, 1),
                (0, 2),
                (1, 2),
                (2, 3),
                (3, 4),
                (2, 4),
                (4, 5),
                (5, 6),
                (4, 6),
                (6, 7),
                (7, 8),
                (6, 8),
                (8, 9),
                (9, 10),
                (10, 11),
            ],
        );
        let td = decompose(&g, 3).unwrap();
        let balanced = balance(&td);
        let (a, b, c) = nicefy_stages(&balanced.td);
        assert!(verify_td(&g, &a).is_empty());
        assert!(verify_td(&g, &b).is_empty());
        assert!(verify_td(&g, &c).is_empty());
    }

    #[test]
    fn empty_graph_single_bag() {
        let g = DynamicGraph::new(4);
        let td = decompose(&g, 0).unwrap();
        let balanced = balance(&td);
        let ntd = nicefy(&balanced.td, 4).unwrap();
        assert_eq!(ntd.num_nodes(), 1);
        ntd.check_niceness().unwrap();
    }
}
