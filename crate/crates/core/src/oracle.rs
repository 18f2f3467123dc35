//! Independent brute-force reference implementations.
//!
//! These exist only to be obviously correct; every cross-module equivalence
//! test is grounded against them. Size preconditions keep each call under a
//! second. Domination is required over the active domain only: a universe
//! vertex with no edges need not be dominated.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{DynamicGraph, VertexId};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance too large for {oracle} oracle: {size} active vertices (limit {limit})")]
    TooLarge {
        oracle: &'static str,
        size: usize,
        limit: usize,
    },
}

/// Answer of a reference computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleAnswer {
    Decision(bool),
    Optimum { value: u64, witness: Vec<VertexId> },
}

impl OracleAnswer {
    pub fn as_decision(&self) -> Option<bool> {
        match self {
            OracleAnswer::Decision(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_optimum(&self) -> Option<(u64, &[VertexId])> {
        match self {
            OracleAnswer::Optimum { value, witness } => Some((*value, witness)),
            _ => None,
        }
    }
}

fn active_sorted(g: &DynamicGraph) -> Vec<VertexId> {
    g.active_domain().into_iter().collect()
}

/// Exact 3-colourability by backtracking over active-domain vertices.
pub fn brute_threecol(g: &DynamicGraph) -> Result<OracleAnswer, OracleError> {
    const LIMIT: usize = 24;
    let verts = active_sorted(g);
    if verts.len() > LIMIT {
        return Err(OracleError::TooLarge {
            oracle: "threecol",
            size: verts.len(),
            limit: LIMIT,
        });
    }
    let adj = g.adjacency();
    let pos: std::collections::HashMap<VertexId, usize> =
        verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut colour = vec![0u8; verts.len()];

    fn go(
        i: usize,
        verts: &[VertexId],
        adj: &[Vec<VertexId>],
        pos: &std::collections::HashMap<VertexId, usize>,
        colour: &mut [u8],
    ) -> bool {
        if i == verts.len() {
            return true;
        }
        'next: for c in 1..=3u8 {
            for &w in &adj[verts[i].idx()] {
                if let Some(&j) = pos.get(&w) {
                    if j < i && colour[j] == c {
                        continue 'next;
                    }
                }
            }
            colour[i] = c;
            if go(i + 1, verts, adj, pos, colour) {
                return true;
            }
        }
        false
    }

    Ok(OracleAnswer::Decision(go(
        0,
        &verts,
        &adj,
        &pos,
        &mut colour,
    )))
}

/// Shared size-then-lex subset search. Enumerates subsets of `verts` in
/// increasing size and, within a size, in lexicographic order of the sorted
/// vertex sequence; returns the first subset accepted by `feasible`. `prune`
/// may cut a partial choice only when no extension of it can be feasible.
fn size_lex_search(
    verts: &[VertexId],
    feasible: &dyn Fn(&BTreeSet<VertexId>) -> bool,
    prune: &dyn Fn(&BTreeSet<VertexId>, usize) -> bool,
) -> Option<Vec<VertexId>> {
    fn extend(
        verts: &[VertexId],
        start: usize,
        remaining: usize,
        chosen: &mut BTreeSet<VertexId>,
        feasible: &dyn Fn(&BTreeSet<VertexId>) -> bool,
        prune: &dyn Fn(&BTreeSet<VertexId>, usize) -> bool,
    ) -> bool {
        if remaining == 0 {
            return feasible(chosen);
        }
        if verts.len() - start < remaining {
            return false;
        }
        for i in start..=verts.len() - remaining {
            chosen.insert(verts[i]);
            if !prune(chosen, i + 1) && extend(verts, i + 1, remaining - 1, chosen, feasible, prune)
            {
                return true;
            }
            chosen.remove(&verts[i]);
        }
        false
    }

    for size in 0..=verts.len() {
        let mut chosen = BTreeSet::new();
        if extend(verts, 0, size, &mut chosen, feasible, prune) {
            return Some(chosen.into_iter().collect());
        }
    }
    None
}

/// Exact minimum vertex cover; the witness is the lexicographically minimal
/// cover among the optima.
pub fn brute_min_vertex_cover(g: &DynamicGraph) -> Result<OracleAnswer, OracleError> {
    const LIMIT: usize = 20;
    let verts = active_sorted(g);
    if verts.len() > LIMIT {
        return Err(OracleError::TooLarge {
            oracle: "vertexcover",
            size: verts.len(),
            limit: LIMIT,
        });
    }
    let edges: Vec<(VertexId, VertexId)> = g.edges().map(|e| e.endpoints()).collect();
    let feasible = |chosen: &BTreeSet<VertexId>| -> bool {
        edges
            .iter()
            .all(|&(u, v)| chosen.contains(&u) || chosen.contains(&v))
    };
    // A partial choice is dead once some edge has both endpoints already
    // passed over: vertices below `next` that are not chosen can never enter.
    let verts_for_prune = verts.clone();
    let edges_for_prune = edges.clone();
    let prune = move |chosen: &BTreeSet<VertexId>, next: usize| -> bool {
        let frontier = if next < verts_for_prune.len() {
            verts_for_prune[next]
        } else {
            VertexId(u32::MAX)
        };
        edges_for_prune.iter().any(|&(u, v)| {
            u < frontier && v < frontier && !chosen.contains(&u) && !chosen.contains(&v)
        })
    };
    let witness = size_lex_search(&verts, &feasible, &prune)
        .expect("a vertex cover always exists (all active vertices)");
    Ok(OracleAnswer::Optimum {
        value: witness.len() as u64,
        witness,
    })
}

/// Exact minimum dominating set over the active domain; lex-minimal witness.
pub fn brute_min_dominating_set(g: &DynamicGraph) -> Result<OracleAnswer, OracleError> {
    const LIMIT: usize = 18;
    let verts = active_sorted(g);
    if verts.len() > LIMIT {
        return Err(OracleError::TooLarge {
            oracle: "domset",
            size: verts.len(),
            limit: LIMIT,
        });
    }
    let adj = g.adjacency();
    let feasible = |chosen: &BTreeSet<VertexId>| -> bool {
        verts
            .iter()
            .all(|v| chosen.contains(v) || adj[v.idx()].iter().any(|w| chosen.contains(w)))
    };
    let prune = |_: &BTreeSet<VertexId>, _: usize| false;
    let witness = size_lex_search(&verts, &feasible, &prune)
        .expect("a dominating set always exists (all active vertices)");
    Ok(OracleAnswer::Optimum {
        value: witness.len() as u64,
        witness,
    })
}

/// Exact `treewidth(g) <= k` via elimination-order search with memoisation on
/// the set of already-eliminated vertices.
pub fn brute_treewidth_at_most(g: &DynamicGraph, k: usize) -> Result<bool, OracleError> {
    const LIMIT: usize = 10;
    let verts = active_sorted(g);
    if verts.len() > LIMIT {
        return Err(OracleError::TooLarge {
            oracle: "treewidth",
            size: verts.len(),
            limit: LIMIT,
        });
    }
    if verts.len() <= k + 1 {
        return Ok(true);
    }
    let index: std::collections::HashMap<VertexId, usize> =
        verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let m = verts.len();
    // adjacency over local indices
    let mut adj = vec![BTreeSet::new(); m];
    for e in g.edges() {
        let (u, v) = e.endpoints();
        let (iu, iv) = (index[&u], index[&v]);
        adj[iu].insert(iv);
        adj[iv].insert(iu);
    }

    fn search(
        adj: &[BTreeSet<usize>],
        eliminated: u32,
        m: usize,
        k: usize,
        seen: &mut std::collections::HashSet<u32>,
    ) -> bool {
        if (eliminated.count_ones() as usize) == m {
            return true;
        }
        if !seen.insert(eliminated) {
            return false;
        }
        for v in 0..m {
            if eliminated & (1 << v) != 0 {
                continue;
            }
            let nbrs: Vec<usize> = adj[v]
                .iter()
                .copied()
                .filter(|&w| eliminated & (1 << w) == 0)
                .collect();
            if nbrs.len() > k {
                continue;
            }
            // eliminate v: clique-connect its remaining neighbours
            let mut next: Vec<BTreeSet<usize>> = adj.to_vec();
            for (ai, &a) in nbrs.iter().enumerate() {
                for &b in nbrs.iter().skip(ai + 1) {
                    next[a].insert(b);
                    next[b].insert(a);
                }
            }
            if search(&next, eliminated | (1 << v), m, k, seen) {
                return true;
            }
        }
        false
    }

    let mut seen = std::collections::HashSet::new();
    Ok(search(&adj, 0, m, k, &mut seen))
}

/// Definitional feasibility checks used to validate witnesses.
pub fn is_vertex_cover(g: &DynamicGraph, set: &[VertexId]) -> bool {
    let s: BTreeSet<VertexId> = set.iter().copied().collect();
    g.edges().all(|e| {
        let (u, v) = e.endpoints();
        s.contains(&u) || s.contains(&v)
    })
}

pub fn is_dominating_set(g: &DynamicGraph, set: &[VertexId]) -> bool {
    let s: BTreeSet<VertexId> = set.iter().copied().collect();
    let adj = g.adjacency();
    g.active_domain()
        .iter()
        .all(|v| s.contains(v) || adj[v.idx()].iter().any(|w| s.contains(w)))
}

pub fn is_proper_threecol(g: &DynamicGraph, colour: &dyn Fn(VertexId) -> u8) -> bool {
    g.edges().all(|e| {
        let (u, v) = e.endpoints();
        colour(u) != colour(v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn threecol_small_cases() {
        let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(brute_threecol(&k3).unwrap(), OracleAnswer::Decision(true));

        let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(brute_threecol(&k4).unwrap(), OracleAnswer::Decision(false));
    }

    #[test]
    fn threecol_petersen() {
        // outer C5, inner pentagram, spokes
        let petersen = graph(
            10,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 0),
                (5, 7),
                (7, 9),
                (9, 6),
                (6, 8),
                (8, 5),
                (0, 5),
                (1, 6),
                (2, 7),
                (3, 8),
                (4, 9),
            ],
        );
        assert_eq!(
            brute_threecol(&petersen).unwrap(),
            OracleAnswer::Decision(true)
        );
    }

    #[test]
    fn vertex_cover_small_cases() {
        let single = graph(2, &[(0, 1)]);
        let ans = brute_min_vertex_cover(&single).unwrap();
        assert_eq!(
            ans,
            OracleAnswer::Optimum {
                value: 1,
                witness: vec![VertexId(0)]
            }
        );

        let c5 = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let (value, witness) = brute_min_vertex_cover(&c5)
            .unwrap()
            .as_optimum()
            .map(|(v, w)| (v, w.to_vec()))
            .unwrap();
        assert_eq!(value, 3);
        assert!(is_vertex_cover(&c5, &witness));
    }

    #[test]
    fn dominating_set_small_cases() {
        let single = graph(2, &[(0, 1)]);
        let (value, _) = brute_min_dominating_set(&single)
            .unwrap()
            .as_optimum()
            .map(|(v, w)| (v, w.to_vec()))
            .unwrap();
        assert_eq!(value, 1);

        let p4 = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let (value, witness) = brute_min_dominating_set(&p4)
            .unwrap()
            .as_optimum()
            .map(|(v, w)| (v, w.to_vec()))
            .unwrap();
        assert_eq!(value, 2);
        assert!(is_dominating_set(&p4, &witness));
        // lex-minimal optimum for P4 is {0, 2}
        assert_eq!(witness, vec![VertexId(0), VertexId(2)]);
    }

    #[test]
    fn dominating_set_ignores_isolated_universe_vertices() {
        // universe 6, only one edge: vertices 2..5 are inactive
        let g = graph(6, &[(0, 1)]);
        let (value, _) = brute_min_dominating_set(&g)
            .unwrap()
            .as_optimum()
            .map(|(v, w)| (v, w.to_vec()))
            .unwrap();
        assert_eq!(value, 1);
    }

    #[test]
    fn treewidth_small_cases() {
        let tree = graph(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]);
        assert!(brute_treewidth_at_most(&tree, 1).unwrap());

        let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert!(!brute_treewidth_at_most(&k4, 2).unwrap());
        assert!(brute_treewidth_at_most(&k4, 3).unwrap());

        let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(!brute_treewidth_at_most(&c4, 1).unwrap());
        assert!(brute_treewidth_at_most(&c4, 2).unwrap());
    }

    #[test]
    fn too_large_is_reported() {
        let mut g = DynamicGraph::new(40);
        for i in 0..30 {
            g.apply_change(EdgeChange::insert(VertexId(i), VertexId(i + 1)).unwrap())
                .unwrap();
        }
        assert!(matches!(
            brute_threecol(&g),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn vc_witness_is_lex_minimal() {
        // path 0-1-2-3: {0,2} covers all three edges and is the lex-least
        // among the size-2 optima
        let p4 = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let (value, witness) = brute_min_vertex_cover(&p4)
            .unwrap()
            .as_optimum()
            .map(|(v, w)| (v, w.to_vec()))
            .unwrap();
        assert_eq!(value, 2);
        assert_eq!(witness, vec![VertexId(0), VertexId(2)]);
    }
}
