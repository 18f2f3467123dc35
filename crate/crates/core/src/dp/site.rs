//! Generic combination site: joins the entries of part tables over their
//! shared vertices, enumerates unconstrained vertices, applies the site's own
//! edges exactly once, finalises and costs the vertices owned here, and
//! projects onto the output interface.
//!
//! The same machinery drives the inductive triangle step (parts are child
//! triangle tables, site edges are the glue edges), the root query (one part,
//! root-bag edges), and the skeleton combination over special bags (parts are
//! petal tables and child messages, site edges are center-level edges).

use std::collections::HashMap;

use crate::graph::VertexId;

use super::plugin::Plugin;
use super::table::{fold_min, DpTable, Entry, Key};

pub struct SiteSpec<'a> {
    pub parts: Vec<&'a DpTable>,
    /// Vertices enumerated freely (over labels admissible without local
    /// support); sorted. May overlap part actives, which take precedence.
    pub extra_vars: Vec<VertexId>,
    /// Edges processed at this site; both endpoints must occur among the
    /// site's variables.
    pub edges: Vec<(VertexId, VertexId)>,
    /// Variables finalised and cost-counted here; sorted, subset of the
    /// site's variables.
    pub owned: Vec<VertexId>,
    /// Output key variables; sorted, subset of the site's variables.
    pub out_active: Vec<VertexId>,
}

pub struct SiteResult {
    pub entries: HashMap<Key, Entry>,
    /// Rows materialised during the join, for work accounting.
    pub rows: u64,
}

const UNSET: u8 = u8::MAX;

#[derive(Clone)]
struct Row {
    labels: Vec<u8>,
    cost: u64,
    witness: Vec<VertexId>,
}

fn merge_sorted(a: &[VertexId], b: &[VertexId]) -> Vec<VertexId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Solves a combination site. `is_active` tells whether a vertex has any
/// edge in the graph the site is evaluated against (vertices outside the
/// active domain are exempt from finalisation).
pub fn solve_site(
    plugin: Plugin,
    spec: &SiteSpec<'_>,
    is_active: &dyn Fn(VertexId) -> bool,
) -> SiteResult {
    // site variables
    let mut vars: Vec<VertexId> = spec
        .parts
        .iter()
        .flat_map(|p| p.active.iter().copied())
        .chain(spec.extra_vars.iter().copied())
        .collect();
    vars.sort_unstable();
    vars.dedup();
    let pos = |v: VertexId| -> usize { vars.binary_search(&v).expect("site var") };

    for &(u, v) in &spec.edges {
        debug_assert!(vars.binary_search(&u).is_ok() && vars.binary_search(&v).is_ok());
    }
    for &v in spec.owned.iter().chain(&spec.out_active) {
        debug_assert!(vars.binary_search(&v).is_ok());
    }

    // stage at which each variable becomes set: part index, or parts.len()
    // for the free-enumeration stage
    let free_stage = spec.parts.len();
    let mut set_stage = vec![free_stage; vars.len()];
    for (k, part) in spec.parts.iter().enumerate() {
        for &v in &part.active {
            let p = pos(v);
            set_stage[p] = set_stage[p].min(k);
        }
    }
    let mut edges_at_stage: Vec<Vec<(usize, usize)>> = vec![Vec::new(); free_stage + 1];
    for &(u, v) in &spec.edges {
        let (pu, pv) = (pos(u), pos(v));
        edges_at_stage[set_stage[pu].max(set_stage[pv])].push((pu, pv));
    }

    let mut rows = vec![Row {
        labels: vec![UNSET; vars.len()],
        cost: 0,
        witness: Vec::new(),
    }];
    let mut rows_explored: u64 = 1;

    let apply_edges = |row: &mut Row, edges: &[(usize, usize)]| -> bool {
        for &(pu, pv) in edges {
            let (a, b) = (row.labels[pu], row.labels[pv]);
            debug_assert!(a != UNSET && b != UNSET);
            match plugin.apply_edge(a, b) {
                Some((a2, b2)) => {
                    row.labels[pu] = a2;
                    row.labels[pv] = b2;
                }
                None => return false,
            }
        }
        true
    };

    // fold parts
    for (k, part) in spec.parts.iter().enumerate() {
        // positions (within part.active) of vertices already set
        let shared: Vec<usize> = part
            .active
            .iter()
            .enumerate()
            .filter(|(_, &v)| set_stage[pos(v)] < k)
            .map(|(i, _)| i)
            .collect();
        let part_positions: Vec<usize> = part.active.iter().map(|&v| pos(v)).collect();

        let mut index: HashMap<Vec<u8>, Vec<(&Key, &Entry)>> = HashMap::new();
        for (key, entry) in &part.entries {
            let sig: Vec<u8> = shared.iter().map(|&i| plugin.join_sig(key[i])).collect();
            index.entry(sig).or_default().push((key, entry));
        }

        let mut next: Vec<Row> = Vec::new();
        for row in &rows {
            let sig: Vec<u8> = shared
                .iter()
                .map(|&i| plugin.join_sig(row.labels[part_positions[i]]))
                .collect();
            let Some(cands) = index.get(&sig) else {
                continue;
            };
            for (pkey, pentry) in cands {
                let mut merged = row.clone();
                for (i, &p) in part_positions.iter().enumerate() {
                    let l = pkey[i];
                    merged.labels[p] = if merged.labels[p] == UNSET {
                        l
                    } else {
                        plugin
                            .combine(merged.labels[p], l)
                            .expect("join signature guarantees combinability")
                    };
                }
                merged.cost += pentry.cost;
                merged.witness = merge_sorted(&merged.witness, &pentry.witness);
                if apply_edges(&mut merged, &edges_at_stage[k]) {
                    next.push(merged);
                }
            }
        }
        rows_explored += next.len() as u64;
        rows = next;
    }

    // remaining variables are enumerated by streaming depth-first search,
    // applying each site edge as soon as both endpoints are set; completed
    // rows are finalised and folded without materialising the expansion
    let free_positions: Vec<usize> = (0..vars.len())
        .filter(|&p| set_stage[p] == free_stage)
        .collect();
    let free_index: HashMap<usize, usize> = free_positions
        .iter()
        .enumerate()
        .map(|(i, &p)| (i, p))
        .map(|(i, p)| (p, i))
        .collect();
    // edges of the free stage become ready once their later free endpoint is
    // assigned
    let mut edges_after_free: Vec<Vec<(usize, usize)>> = vec![Vec::new(); free_positions.len()];
    let mut edges_now: Vec<(usize, usize)> = Vec::new();
    for &(pu, pv) in &edges_at_stage[free_stage] {
        let iu = free_index.get(&pu);
        let iv = free_index.get(&pv);
        match (iu, iv) {
            (None, None) => edges_now.push((pu, pv)),
            (Some(&i), None) => edges_after_free[i].push((pu, pv)),
            (None, Some(&j)) => edges_after_free[j].push((pu, pv)),
            (Some(&i), Some(&j)) => edges_after_free[i.max(j)].push((pu, pv)),
        }
    }

    let owned_positions: Vec<usize> = spec.owned.iter().map(|&v| pos(v)).collect();
    let out_positions: Vec<usize> = spec.out_active.iter().map(|&v| pos(v)).collect();

    // an owned vertex's label is final once the last site edge touching it
    // has been applied; checking it right there prunes the search
    let owned_active: Vec<(usize, bool)> = owned_positions
        .iter()
        .zip(&spec.owned)
        .map(|(&p, &v)| (p, is_active(v)))
        .collect();
    let mut decided_at: Vec<isize> = owned_positions.iter().map(|_| -1isize).collect();
    for (d, edges) in edges_after_free.iter().enumerate() {
        for &(pu, pv) in edges {
            for (i, &(p, _)) in owned_active.iter().enumerate() {
                if p == pu || p == pv {
                    decided_at[i] = decided_at[i].max(d as isize);
                }
            }
        }
    }
    let mut owned_checks: Vec<Vec<(usize, bool)>> =
        vec![Vec::new(); free_positions.len().max(1)];
    let mut owned_checks_now: Vec<(usize, bool)> = Vec::new();
    for (i, &(p, act)) in owned_active.iter().enumerate() {
        // vertices set during the free stage are decided at their own depth
        // at the earliest
        let own_depth = free_index.get(&p).map(|&d| d as isize).unwrap_or(-1);
        let d = decided_at[i].max(own_depth);
        if d < 0 {
            owned_checks_now.push((p, act));
        } else {
            owned_checks[d as usize].push((p, act));
        }
    }

    let mut entries: HashMap<Key, Entry> = HashMap::new();
    let choices = plugin.free_labels();

    let check_owned = |row: &Row, checks: &[(usize, bool)]| -> bool {
        checks
            .iter()
            .all(|&(p, act)| !act || plugin.finalize_ok(row.labels[p]))
    };
    let finish = |row: &Row, entries: &mut HashMap<Key, Entry>| {
        // every owned label was finalize-checked when it became final
        let mut cost = row.cost;
        let mut extra_members: Vec<VertexId> = Vec::new();
        for (&p, &v) in owned_positions.iter().zip(&spec.owned) {
            let l = row.labels[p];
            debug_assert!(l != UNSET);
            cost += plugin.vertex_cost(l);
            if plugin.is_member(l) {
                extra_members.push(v);
            }
        }
        let witness = merge_sorted(&row.witness, &extra_members);
        let key: Key = out_positions.iter().map(|&p| row.labels[p]).collect();
        fold_min(entries, key, Entry { cost, witness });
    };

    for base in rows {
        let mut row = base;
        if !apply_edges(&mut row, &edges_now) || !check_owned(&row, &owned_checks_now) {
            continue;
        }
        if free_positions.is_empty() {
            finish(&row, &mut entries);
            continue;
        }
        // iterative DFS over the free positions
        let mut depth = 0usize;
        let mut choice_idx = vec![0usize; free_positions.len()];
        let mut saved: Vec<Vec<u8>> = vec![Vec::new(); free_positions.len()];
        loop {
            if choice_idx[depth] == choices.len() {
                if depth == 0 {
                    break;
                }
                choice_idx[depth] = 0;
                depth -= 1;
                row.labels = saved[depth].clone();
                continue;
            }
            let l = choices[choice_idx[depth]];
            choice_idx[depth] += 1;
            saved[depth] = row.labels.clone();
            row.labels[free_positions[depth]] = l;
            rows_explored += 1;
            if apply_edges(&mut row, &edges_after_free[depth])
                && check_owned(&row, &owned_checks[depth])
            {
                if depth + 1 == free_positions.len() {
                    finish(&row, &mut entries);
                    row.labels = saved[depth].clone();
                } else {
                    depth += 1;
                }
            } else {
                row.labels = saved[depth].clone();
            }
        }
    }

    SiteResult {
        entries,
        rows: rows_explored,
    }
}

/// Drops entries that can never beat a kept one in any upward context: same
/// membership pattern, coverage contained in the kept entry's, and cost and
/// witness no better. Sound for answers because coverage facts are only ever
/// OR-ed upward and finally required; must not be applied to stored tables,
/// whose contract is one entry per realisable status pattern.
pub fn prune_dominated(plugin: Plugin, entries: &mut HashMap<Key, Entry>) {
    use super::plugin::DOM_COVERED;
    if plugin != Plugin::DomSet || entries.len() <= 1 {
        return;
    }
    let mut groups: HashMap<Vec<u8>, Vec<(Key, u64)>> = HashMap::new();
    for key in entries.keys() {
        let sig: Vec<u8> = key.iter().map(|&l| plugin.join_sig(l)).collect();
        let coverage = key
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == DOM_COVERED)
            .fold(0u64, |acc, (i, _)| acc | (1 << i));
        groups.entry(sig).or_default().push((key.clone(), coverage));
    }
    let mut drop: Vec<Key> = Vec::new();
    for (_, mut members) in groups {
        if members.len() <= 1 {
            continue;
        }
        members.sort_by(|a, b| {
            let ea = &entries[&a.0];
            let eb = &entries[&b.0];
            (ea.cost, &ea.witness, &a.0).cmp(&(eb.cost, &eb.witness, &b.0))
        });
        let mut kept: Vec<u64> = Vec::new();
        for (key, coverage) in members {
            if kept.iter().any(|&k| k & coverage == coverage) {
                drop.push(key);
            } else {
                kept.push(coverage);
            }
        }
    }
    for key in drop {
        entries.remove(&key);
    }
}
