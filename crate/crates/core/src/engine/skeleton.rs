//! Query answering against stale tables.
//!
//! All edges changed since the snapshot have both endpoints in the center, so
//! the snapshot's petal tables stay valid: a query combines them over the
//! skeleton tree induced by the special nodes. Messages flow bottom-up over
//! the special sites; a message is keyed by the labels of the vertices still
//! constrained higher up (bag vertices of shallower sites, endpoints of
//! center edges resolved at a shallower site, and vertices active in a
//! shallower petal's table). Center-level edges - the current edges with both
//! endpoints in the center - are each applied at the deepest site where both
//! endpoint labels are available, lifting endpoint labels of non-local
//! (inserted) edges along the way. Each center vertex is costed and checked
//! at the unique site where its label is dropped.
//!
//! `flat_answer` evaluates the same semantics by direct enumeration of all
//! center labelings; it is the reference for equivalence tests and only
//! tractable for small centers.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::decompose::{NiceTreeDecomposition, NodeId};
use crate::dp::{
    answer_from_entries, prune_dominated, solve_site, Answer, DpTable, Entry, Plugin, SiteSpec,
    TableBuilder, TableStore, DOM_COVERED, DOM_IN,
};
use crate::graph::{DynamicGraph, EdgeChange, VertexId};

use super::special::{Center, SpecialBags};
use super::EngineError;

pub struct SkeletonInput<'a> {
    pub current: &'a DynamicGraph,
    pub snapshot: &'a DynamicGraph,
    pub ntd: &'a NiceTreeDecomposition,
    pub special: &'a SpecialBags,
    pub center: &'a Center,
    pub applied: &'a [EdgeChange],
}

fn check_applied_in_center(input: &SkeletonInput<'_>) -> Result<(), EngineError> {
    for c in input.applied {
        let (u, v) = c.edge.endpoints();
        if !input.center.contains(u) || !input.center.contains(v) {
            return Err(EngineError::EdgeOutsideCenter { u: u.0, v: v.0 });
        }
    }
    Ok(())
}

/// Builds (lazily, memoised in the store) the pinned table of every petal
/// with inner vertices. Returns site -> table.
fn petal_tables(
    input: &SkeletonInput<'_>,
    store: &mut TableStore,
) -> BTreeMap<NodeId, std::sync::Arc<DpTable>> {
    let builder = TableBuilder::new(input.snapshot, input.ntd, store.plugin);
    let mut out = BTreeMap::new();
    for petal in &input.center.petals {
        if let Some(id) = petal.identifier {
            let table = builder.table(store, petal.triangle, Some(id));
            out.insert(petal.site, table);
        }
    }
    out
}

/// Center-level edges: current edges with both endpoints in the center.
fn center_edges(input: &SkeletonInput<'_>) -> Vec<(VertexId, VertexId)> {
    input
        .current
        .edges()
        .map(|e| e.endpoints())
        .filter(|&(u, v)| input.center.contains(u) && input.center.contains(v))
        .collect()
}

/// Answers the query by a DP over the skeleton tree of special sites.
/// Returns the answer and the number of DP rows explored.
pub fn skeleton_answer(
    input: &SkeletonInput<'_>,
    store: &mut TableStore,
) -> Result<(Answer, u64), EngineError> {
    check_applied_in_center(input)?;
    let plugin = store.plugin;
    let ntd = input.ntd;
    let tables = petal_tables(input, store);
    let edges = center_edges(input);

    let cur_adj = input.current.adjacency();
    let is_active = |v: VertexId| !cur_adj[v.idx()].is_empty();

    // entry sites of each center vertex: where a petal table constrains it
    // plus where one of its center edges is applied
    let sites: Vec<NodeId> = input.special.nodes().iter().copied().collect();
    let site_set: BTreeSet<NodeId> = sites.iter().copied().collect();

    // the special sites whose bag (or identifier home, or the root for
    // floating vertices) holds each center vertex
    let mut sites_of: HashMap<VertexId, Vec<NodeId>> = HashMap::new();
    for &s in &sites {
        for &v in ntd.bag(s) {
            sites_of.entry(v).or_default().push(s);
        }
    }
    for petal in &input.center.petals {
        if let Some(id) = petal.identifier {
            sites_of.entry(id).or_default().push(petal.site);
        }
    }
    for &v in &input.center.floating {
        sites_of.entry(v).or_default().push(ntd.root());
    }
    let top = |v: VertexId| -> NodeId {
        *sites_of[&v]
            .iter()
            .min_by_key(|&&s| (ntd.depth_of(s), s))
            .expect("center vertex lives somewhere")
    };

    // assign each center edge to the deepest site where both endpoints are
    // visible, so that snapshot edges inside one bag resolve locally; for
    // genuinely non-local (inserted) edges the endpoint labels are lifted to
    // the LCA of their topmost sites (in S by LCA closure)
    let mut edges_at: BTreeMap<NodeId, Vec<(VertexId, VertexId)>> = BTreeMap::new();
    let mut requirement_sites: HashMap<VertexId, Vec<NodeId>> = HashMap::new();
    for &(u, v) in &edges {
        let common_deepest = sites_of[&u]
            .iter()
            .filter(|s| sites_of[&v].contains(s))
            .max_by_key(|&&s| (ntd.depth_of(s), std::cmp::Reverse(s)))
            .copied();
        let z = match common_deepest {
            Some(z) => z,
            None => ntd.lca(top(u), top(v)),
        };
        debug_assert!(site_set.contains(&z), "LCA closure puts edge sites in S");
        edges_at.entry(z).or_default().push((u, v));
        requirement_sites.entry(u).or_default().push(z);
        requirement_sites.entry(v).or_default().push(z);
    }
    for (&site, table) in &tables {
        for &v in &table.active {
            requirement_sites.entry(v).or_default().push(site);
        }
    }

    // a vertex is needed above site s if some requirement lies outside the
    // subtree of s
    let needed_above = |v: VertexId, s: NodeId| -> bool {
        requirement_sites
            .get(&v)
            .map_or(false, |rs| rs.iter().any(|&r| !ntd.is_ancestor(s, r)))
    };

    // special-tree children of each site
    let mut s_children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for petal in &input.center.petals {
        s_children.insert(petal.site, petal.triangle.limits());
    }

    // bottom-up over sites
    let mut order = sites.clone();
    order.sort_by_key(|&s| (std::cmp::Reverse(ntd.depth_of(s)), s));
    let mut messages: BTreeMap<NodeId, DpTable> = BTreeMap::new();
    let mut rows_total: u64 = 0;

    for &s in &order {
        let mut parts: Vec<&DpTable> = Vec::new();
        if let Some(t) = tables.get(&s) {
            parts.push(t.as_ref());
        }
        let kids = s_children.get(&s).cloned().unwrap_or_default();
        for k in &kids {
            parts.push(messages.get(k).expect("children processed first"));
        }
        let site_edges = edges_at.get(&s).cloned().unwrap_or_default();

        let part_active: BTreeSet<VertexId> = parts
            .iter()
            .flat_map(|p| p.active.iter().copied())
            .collect();
        let mut extra: BTreeSet<VertexId> = BTreeSet::new();
        for &(u, v) in &site_edges {
            if !part_active.contains(&u) {
                extra.insert(u);
            }
            if !part_active.contains(&v) {
                extra.insert(v);
            }
        }
        let vars: BTreeSet<VertexId> = part_active.union(&extra).copied().collect();
        let out_active: Vec<VertexId> = vars
            .iter()
            .copied()
            .filter(|&v| needed_above(v, s))
            .collect();
        let owned: Vec<VertexId> = vars
            .iter()
            .copied()
            .filter(|&v| !needed_above(v, s))
            .collect();

        let spec = SiteSpec {
            parts,
            extra_vars: extra.into_iter().collect(),
            edges: site_edges,
            owned,
            out_active: out_active.clone(),
        };
        let mut res = solve_site(plugin, &spec, &is_active);
        rows_total += res.rows;
        if std::env::var_os("DYNTW_TRACE_SITES").is_some() {
            eprintln!(
                "site {}: parts {:?} extra={} edges={} out={} -> entries={} rows={}",
                s,
                spec.parts.iter().map(|p| (p.active.len(), p.entries.len())).collect::<Vec<_>>(),
                spec.extra_vars.len(),
                spec.edges.len(),
                spec.out_active.len(),
                res.entries.len(),
                res.rows
            );
        }
        // messages are transient per-query data, so entries that no upward
        // context can prefer are dropped
        prune_dominated(plugin, &mut res.entries);
        messages.insert(
            s,
            DpTable {
                interface: out_active.clone(),
                active: out_active,
                entries: res.entries,
            },
        );
    }

    let root_msg = messages
        .get(&ntd.root())
        .expect("root is always a special site");
    debug_assert!(root_msg.active.is_empty());
    Ok((answer_from_entries(plugin, &root_msg.entries), rows_total))
}

/// Reference evaluation by direct enumeration over all center labelings.
/// Exponential in the center size; callers must keep the center small.
pub fn flat_answer(
    input: &SkeletonInput<'_>,
    store: &mut TableStore,
) -> Result<Answer, EngineError> {
    check_applied_in_center(input)?;
    let plugin = store.plugin;
    let tables = petal_tables(input, store);
    let edges = center_edges(input);
    let c: Vec<VertexId> = input.center.vertices.clone();
    assert!(c.len() <= 20, "flat enumeration needs a small center");
    let pos: HashMap<VertexId, usize> = c.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let edge_idx: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (pos[&u], pos[&v])).collect();

    let cur_adj = input.current.adjacency();
    let is_active = |v: VertexId| !cur_adj[v.idx()].is_empty();

    match plugin {
        Plugin::ThreeCol => {
            // backtracking over colourings of C
            let mut colour = vec![0u8; c.len()];
            fn go(
                i: usize,
                c: &[VertexId],
                colour: &mut [u8],
                edge_idx: &[(usize, usize)],
                tables: &BTreeMap<NodeId, std::sync::Arc<DpTable>>,
            ) -> bool {
                if i == c.len() {
                    return tables.values().all(|t| {
                        t.lookup(Plugin::ThreeCol, &|v| {
                            colour[c.binary_search(&v).expect("petal interface in center")]
                        })
                        .is_some()
                    });
                }
                'next: for col in 0..3u8 {
                    for &(a, b) in edge_idx {
                        if (a == i && b < i && colour[b] == col)
                            || (b == i && a < i && colour[a] == col)
                        {
                            continue 'next;
                        }
                    }
                    colour[i] = col;
                    if go(i + 1, c, colour, edge_idx, tables) {
                        return true;
                    }
                }
                false
            }
            let feasible = go(0, &c, &mut colour, &edge_idx, &tables);
            Ok(Answer::Decision(feasible))
        }
        Plugin::VertexCover => {
            let mut best: Option<Entry> = None;
            'mask: for mask in 0u64..(1u64 << c.len()) {
                let member = |i: usize| mask & (1 << i) != 0;
                for &(a, b) in &edge_idx {
                    if !member(a) && !member(b) {
                        continue 'mask;
                    }
                }
                let mut cost = 0u64;
                let mut witness: Vec<VertexId> = Vec::new();
                for (i, &v) in c.iter().enumerate() {
                    if member(i) {
                        cost += 1;
                        witness.push(v);
                    }
                }
                let mut ok = true;
                for t in tables.values() {
                    match t.lookup(Plugin::VertexCover, &|v| u8::from(member(pos[&v]))) {
                        Some(e) => {
                            cost += e.cost;
                            witness.extend_from_slice(&e.witness);
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                witness.sort_unstable();
                let entry = Entry { cost, witness };
                if best.as_ref().map_or(true, |b| entry.better_than(b)) {
                    best = Some(entry);
                }
            }
            let best = best.expect("a cover always exists");
            Ok(Answer::Optimum {
                value: best.cost,
                witness: best.witness,
            })
        }
        Plugin::DomSet => {
            let mut best: Option<Entry> = None;
            for mask in 0u64..(1u64 << c.len()) {
                let member = |i: usize| mask & (1 << i) != 0;
                // coverage credit from center edges
                let mut cov0: u64 = 0;
                for &(a, b) in &edge_idx {
                    if member(a) {
                        cov0 |= 1 << b;
                    }
                    if member(b) {
                        cov0 |= 1 << a;
                    }
                }
                let mut base_witness: Vec<VertexId> = Vec::new();
                let mut base_cost = 0u64;
                for (i, &v) in c.iter().enumerate() {
                    if member(i) {
                        base_cost += 1;
                        base_witness.push(v);
                    }
                }
                // DP over petals on the coverage mask
                let mut dp: BTreeMap<u64, Entry> = BTreeMap::new();
                dp.insert(
                    cov0,
                    Entry {
                        cost: base_cost,
                        witness: base_witness,
                    },
                );
                for t in tables.values() {
                    // compatible entries: membership agrees on the petal's
                    // active interface
                    let mut choices: Vec<(u64, &Entry)> = Vec::new();
                    'entry: for (key, entry) in &t.entries {
                        let mut contrib = 0u64;
                        for (j, &v) in t.active.iter().enumerate() {
                            let i = pos[&v];
                            match key[j] {
                                DOM_IN => {
                                    if !member(i) {
                                        continue 'entry;
                                    }
                                }
                                DOM_COVERED => {
                                    if member(i) {
                                        continue 'entry;
                                    }
                                    contrib |= 1 << i;
                                }
                                _ => {
                                    if member(i) {
                                        continue 'entry;
                                    }
                                }
                            }
                        }
                        choices.push((contrib, entry));
                    }
                    let mut next: BTreeMap<u64, Entry> = BTreeMap::new();
                    for (covered, acc) in &dp {
                        for &(contrib, e) in &choices {
                            let mut witness = acc.witness.clone();
                            witness.extend_from_slice(&e.witness);
                            witness.sort_unstable();
                            let cand = Entry {
                                cost: acc.cost + e.cost,
                                witness,
                            };
                            let k = covered | contrib;
                            match next.entry(k) {
                                std::collections::btree_map::Entry::Vacant(vac) => {
                                    vac.insert(cand);
                                }
                                std::collections::btree_map::Entry::Occupied(mut occ) => {
                                    if cand.better_than(occ.get()) {
                                        occ.insert(cand);
                                    }
                                }
                            }
                        }
                    }
                    dp = next;
                }
                let mut need: u64 = 0;
                for (i, &v) in c.iter().enumerate() {
                    if is_active(v) && !member(i) {
                        need |= 1 << i;
                    }
                }
                for (covered, entry) in dp {
                    if need & !covered == 0 && best.as_ref().map_or(true, |b| entry.better_than(b))
                    {
                        best = Some(entry);
                    }
                }
            }
            let best = best.expect("a dominating set always exists");
            Ok(Answer::Optimum {
                value: best.cost,
                witness: best.witness,
            })
        }
    }
}
