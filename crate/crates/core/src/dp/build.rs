//! Bottom-up construction of per-triangle tables.
//!
//! A triangle whose region has at most two inner tree nodes is solved by
//! direct enumeration over its inner vertices. Larger regions decompose at
//! the top corner: each child of `i0` carries the part of the region inside
//! its subtree (an open, unary or proper sub-triangle), and the part tables
//! are merged over the glue edges, i.e. the edges with an endpoint in a child
//! bag that is inner to the parent triangle. Tables may pin one inner vertex
//! (the petal identifier), which is promoted into the interface: its label
//! joins the key, its edges towards the interface leave the scope, and its
//! cost is owned by whoever enumerates it.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::decompose::NiceTreeDecomposition;
use crate::graph::{DynamicGraph, VertexId};
use crate::triangle::{inner_tree_nodes, triangle_scope, Triangle};

use super::plugin::{Plugin, DOM_COVERED, DOM_IN, DOM_UNCOVERED, VC_IN, VC_OUT};
use super::site::{solve_site, SiteSpec};
use super::table::{fold_min, DpTable, Entry, Key, TableStore};

pub struct TableBuilder<'a> {
    g: &'a DynamicGraph,
    ntd: &'a NiceTreeDecomposition,
    plugin: Plugin,
    adj: Vec<Vec<VertexId>>,
    active_in_g: Vec<bool>,
}

impl<'a> TableBuilder<'a> {
    pub fn new(g: &'a DynamicGraph, ntd: &'a NiceTreeDecomposition, plugin: Plugin) -> Self {
        let adj = g.adjacency();
        let active_in_g = adj.iter().map(|nbrs| !nbrs.is_empty()).collect();
        TableBuilder {
            g,
            ntd,
            plugin,
            adj,
            active_in_g,
        }
    }

    pub fn is_active(&self, v: VertexId) -> bool {
        self.active_in_g[v.idx()]
    }

    /// Returns the memoised table for a triangle, building it (and its
    /// dependencies) if needed.
    pub fn table(
        &self,
        store: &mut TableStore,
        t: Triangle,
        pin: Option<VertexId>,
    ) -> Arc<DpTable> {
        if let Some(hit) = store.get(t, pin) {
            return hit;
        }
        let scope = triangle_scope(self.g, self.ntd, t);

        let mut interface = scope.interface.clone();
        let mut inner = scope.inner.clone();
        let mut scoped = scope.scoped_edges.clone();
        if let Some(p) = pin {
            let at = inner
                .binary_search(&p)
                .expect("pin must be an inner vertex");
            inner.remove(at);
            let at = interface.partition_point(|&x| x < p);
            interface.insert(at, p);
            scoped.retain(|&(a, b)| {
                inner.binary_search(&a).is_ok() || inner.binary_search(&b).is_ok()
            });
        }

        let table = if inner_tree_nodes(self.ntd, t) <= 2 {
            self.base_case(&interface, &inner, &scoped, pin)
        } else {
            self.combine(store, t, &scope.interface, &interface, pin)
        };
        store.insert(t, pin, table)
    }

    /// Direct enumeration over inner vertices, factored over the connected
    /// components of the scoped-edge graph.
    fn base_case(
        &self,
        interface: &[VertexId],
        inner: &[VertexId],
        scoped: &[(VertexId, VertexId)],
        pin: Option<VertexId>,
    ) -> DpTable {
        let mut incident: BTreeSet<VertexId> = BTreeSet::new();
        for &(a, b) in scoped {
            incident.insert(a);
            incident.insert(b);
        }
        let active: Vec<VertexId> = interface
            .iter()
            .copied()
            .filter(|v| incident.contains(v) || Some(*v) == pin)
            .collect();
        let enum_inner: Vec<VertexId> = inner
            .iter()
            .copied()
            .filter(|v| incident.contains(v))
            .collect();
        let mut vars: Vec<VertexId> = active.iter().chain(&enum_inner).copied().collect();
        vars.sort_unstable();

        if vars.is_empty() {
            let mut entries = std::collections::HashMap::new();
            entries.insert(Vec::new().into_boxed_slice(), Entry::zero());
            return DpTable {
                interface: interface.to_vec(),
                active,
                entries,
            };
        }

        // local adjacency and connected components over vars
        let vpos = |v: VertexId| vars.binary_search(&v).expect("scoped var");
        let mut ladj: Vec<Vec<usize>> = vec![Vec::new(); vars.len()];
        for &(a, b) in scoped {
            let (pa, pb) = (vpos(a), vpos(b));
            ladj[pa].push(pb);
            ladj[pb].push(pa);
        }
        let mut comp = vec![usize::MAX; vars.len()];
        let mut n_comp = 0;
        for start in 0..vars.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = n_comp;
            while let Some(x) = stack.pop() {
                for &y in &ladj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = n_comp;
                        stack.push(y);
                    }
                }
            }
            n_comp += 1;
        }

        let is_inner = |v: VertexId| inner.binary_search(&v).is_ok();

        // per-component tables keyed by the component's active labels
        let mut comp_tables: Vec<BTreeMap<Vec<u8>, Entry>> = Vec::with_capacity(n_comp);
        for c in 0..n_comp {
            let members: Vec<usize> = (0..vars.len()).filter(|&i| comp[i] == c).collect();
            comp_tables.push(self.enumerate_component(&vars, &ladj, &members, &active, &is_inner));
        }

        // cross product over components
        let apos = |v: VertexId| active.binary_search(&v).expect("active var");
        let mut rows: Vec<(Vec<u8>, Entry)> = vec![(vec![u8::MAX; active.len()], Entry::zero())];
        for (c, ct) in comp_tables.iter().enumerate() {
            let positions: Vec<usize> = (0..vars.len())
                .filter(|&i| comp[i] == c && active.binary_search(&vars[i]).is_ok())
                .map(|i| apos(vars[i]))
                .collect();
            let mut next = Vec::with_capacity(rows.len() * ct.len().max(1));
            for (key_part, entry) in ct {
                for (labels, acc) in &rows {
                    let mut labels = labels.clone();
                    for (j, &p) in positions.iter().enumerate() {
                        labels[p] = key_part[j];
                    }
                    next.push((
                        labels,
                        Entry {
                            cost: acc.cost + entry.cost,
                            witness: {
                                let mut w = acc.witness.clone();
                                w.extend_from_slice(&entry.witness);
                                w.sort_unstable();
                                w
                            },
                        },
                    ));
                }
            }
            rows = next;
        }

        let mut entries = std::collections::HashMap::new();
        for (labels, entry) in rows {
            debug_assert!(labels.iter().all(|&l| l != u8::MAX));
            fold_min(&mut entries, labels.into_boxed_slice(), entry);
        }
        DpTable {
            interface: interface.to_vec(),
            active,
            entries,
        }
    }

    /// Exhaustive labelings of one connected component, with early pruning
    /// where the plug-in allows it. Keys are the labels of the component's
    /// active vertices in vertex order.
    fn enumerate_component(
        &self,
        vars: &[VertexId],
        ladj: &[Vec<usize>],
        members: &[usize],
        active: &[VertexId],
        is_inner: &dyn Fn(VertexId) -> bool,
    ) -> BTreeMap<Vec<u8>, Entry> {
        // breadth-first order from the smallest member keeps each new vertex
        // adjacent to an assigned one, which makes the colouring prune bite
        let mut order: Vec<usize> = Vec::with_capacity(members.len());
        let mut in_order = vec![false; vars.len()];
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(members[0]);
        in_order[members[0]] = true;
        while let Some(x) = queue.pop_front() {
            order.push(x);
            let mut nbrs: Vec<usize> = ladj[x].iter().copied().filter(|&y| !in_order[y]).collect();
            nbrs.sort_unstable();
            nbrs.dedup();
            for y in nbrs {
                in_order[y] = true;
                queue.push_back(y);
            }
        }
        debug_assert_eq!(order.len(), members.len());

        let n_choices: u8 = match self.plugin {
            Plugin::ThreeCol => 3,
            Plugin::VertexCover | Plugin::DomSet => 2, // membership bit
        };
        let mut choice = vec![0u8; vars.len()]; // indexed by var position
        let mut assigned = vec![false; vars.len()];
        let mut out: BTreeMap<Vec<u8>, Entry> = BTreeMap::new();

        // domination pruning: a vertex is fully decided once it and all its
        // neighbours are assigned; an undominated non-member inner vertex
        // kills the branch
        let domset = self.plugin == Plugin::DomSet;
        let mut order_index = vec![usize::MAX; vars.len()];
        for (d, &x) in order.iter().enumerate() {
            order_index[x] = d;
        }
        let mut decided_at: Vec<Vec<usize>> = vec![Vec::new(); order.len()];
        if domset {
            for &x in members {
                let last = ladj[x]
                    .iter()
                    .map(|&y| order_index[y])
                    .chain([order_index[x]])
                    .max()
                    .unwrap();
                decided_at[last].push(x);
            }
        }
        let mut member_nbrs = vec![0u32; vars.len()];

        // iterative DFS over `order`
        let mut depth = 0usize;
        let mut next_choice = vec![0u8; order.len() + 1];
        let unassign = |x: usize, assigned: &mut [bool], choice: &[u8], member_nbrs: &mut [u32]| {
            assigned[x] = false;
            if domset && choice[x] == 1 {
                for &y in &ladj[x] {
                    member_nbrs[y] -= 1;
                }
            }
        };
        loop {
            if next_choice[depth] == n_choices {
                if depth == 0 {
                    break;
                }
                unassign(order[depth - 1], &mut assigned, &choice, &mut member_nbrs);
                next_choice[depth] = 0;
                depth -= 1;
                continue;
            }
            let c = next_choice[depth];
            next_choice[depth] += 1;
            let x = order[depth];
            // prune against already-assigned neighbours
            let ok = match self.plugin {
                Plugin::ThreeCol => ladj[x].iter().all(|&y| !assigned[y] || choice[y] != c),
                Plugin::VertexCover => {
                    c == 1 || ladj[x].iter().all(|&y| !assigned[y] || choice[y] == 1)
                }
                Plugin::DomSet => true,
            };
            if !ok {
                continue;
            }
            choice[x] = c;
            assigned[x] = true;
            if domset {
                if c == 1 {
                    for &y in &ladj[x] {
                        member_nbrs[y] += 1;
                    }
                }
                let dead = decided_at[depth]
                    .iter()
                    .any(|&y| is_inner(vars[y]) && choice[y] == 0 && member_nbrs[y] == 0);
                if dead {
                    unassign(x, &mut assigned, &choice, &mut member_nbrs);
                    continue;
                }
            }
            if depth + 1 == order.len() {
                self.harvest_leaf(vars, ladj, members, active, is_inner, &choice, &mut out);
                unassign(x, &mut assigned, &choice, &mut member_nbrs);
                continue;
            }
            depth += 1;
            next_choice[depth] = 0;
        }
        out
    }

    fn harvest_leaf(
        &self,
        vars: &[VertexId],
        ladj: &[Vec<usize>],
        members: &[usize],
        active: &[VertexId],
        is_inner: &dyn Fn(VertexId) -> bool,
        choice: &[u8],
        out: &mut BTreeMap<Vec<u8>, Entry>,
    ) {
        let plugin = self.plugin;
        let member_of = |x: usize| -> bool {
            match plugin {
                Plugin::ThreeCol => false,
                Plugin::VertexCover => choice[x] == 1,
                Plugin::DomSet => choice[x] == 1,
            }
        };
        // domination coverage from scoped edges
        let covered = |x: usize| -> bool { ladj[x].iter().any(|&y| member_of(y)) };

        let mut key = Vec::new();
        let mut cost = 0u64;
        let mut witness = Vec::new();
        for &x in members {
            let v = vars[x];
            if is_inner(v) {
                if plugin == Plugin::DomSet && !member_of(x) && !covered(x) {
                    return; // inner vertex left undominated
                }
                if member_of(x) {
                    cost += 1;
                    witness.push(v);
                }
            } else {
                debug_assert!(active.binary_search(&v).is_ok());
                let label = match plugin {
                    Plugin::ThreeCol => choice[x],
                    Plugin::VertexCover => {
                        if member_of(x) {
                            VC_IN
                        } else {
                            VC_OUT
                        }
                    }
                    Plugin::DomSet => {
                        if member_of(x) {
                            DOM_IN
                        } else if covered(x) {
                            DOM_COVERED
                        } else {
                            DOM_UNCOVERED
                        }
                    }
                };
                key.push(label);
            }
        }
        witness.sort_unstable();
        let entry = Entry { cost, witness };
        match out.entry(key) {
            std::collections::btree_map::Entry::Vacant(vac) => {
                vac.insert(entry);
            }
            std::collections::btree_map::Entry::Occupied(mut occ) => {
                if entry.better_than(occ.get()) {
                    occ.insert(entry);
                }
            }
        }
    }

    /// Inductive step: merge the child part tables over the glue edges.
    fn combine(
        &self,
        store: &mut TableStore,
        t: Triangle,
        plain_interface: &[VertexId],
        interface: &[VertexId],
        pin: Option<VertexId>,
    ) -> DpTable {
        let children = self.ntd.children(t.i0);
        debug_assert!(!children.is_empty());
        let limits = t.limits();

        let mut u_set: BTreeSet<VertexId> = plain_interface.iter().copied().collect();
        for &c in children {
            u_set.extend(self.ntd.bag(c).iter().copied());
        }
        let pin_in_u = pin.map_or(false, |p| u_set.contains(&p));

        let mut parts: Vec<Arc<DpTable>> = Vec::new();
        for &c in children {
            let under: Vec<_> = limits
                .iter()
                .copied()
                .filter(|&x| self.ntd.is_ancestor(c, x))
                .collect();
            let tri = match under[..] {
                [] => Triangle::open(c),
                [x] if x == c => continue, // bag already fully in the interface
                [x] => Triangle {
                    i0: c,
                    i1: x,
                    i2: x,
                },
                [x, y] => {
                    let (x, y) = if x <= y { (x, y) } else { (y, x) };
                    Triangle {
                        i0: c,
                        i1: x,
                        i2: y,
                    }
                }
                _ => unreachable!("at most two limits"),
            };
            let child_pin = match pin {
                Some(p) if !pin_in_u => {
                    let h = self.ntd.holders(p)[0];
                    if self.ntd.is_ancestor(c, h) {
                        Some(p)
                    } else {
                        None
                    }
                }
                _ => None,
            };
            parts.push(self.table(store, tri, child_pin));
        }

        // glue vertices: exposed child-bag vertices inner to the parent triangle
        let iface_set: BTreeSet<VertexId> = plain_interface.iter().copied().collect();
        let owned: Vec<VertexId> = u_set
            .iter()
            .copied()
            .filter(|v| !iface_set.contains(v) && Some(*v) != pin)
            .collect();
        let mut v_site = u_set.clone();
        if let Some(p) = pin {
            v_site.insert(p);
        }
        let mut glue: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
        for &v in &owned {
            for &w in &self.adj[v.idx()] {
                if v_site.contains(&w) {
                    glue.insert(if v < w { (v, w) } else { (w, v) });
                }
            }
        }

        let mut constrained: BTreeSet<VertexId> = parts
            .iter()
            .flat_map(|p| p.active.iter().copied())
            .collect();
        for &(a, b) in &glue {
            constrained.insert(a);
            constrained.insert(b);
        }
        let part_active: BTreeSet<VertexId> = parts
            .iter()
            .flat_map(|p| p.active.iter().copied())
            .collect();
        let mut extra: Vec<VertexId> = constrained.difference(&part_active).copied().collect();
        if let Some(p) = pin {
            if !constrained.contains(&p) {
                let at = extra.partition_point(|&x| x < p);
                extra.insert(at, p);
                constrained.insert(p);
            }
        }

        let out_active: Vec<VertexId> = interface
            .iter()
            .copied()
            .filter(|v| constrained.contains(v))
            .collect();
        let owned_vars: Vec<VertexId> = owned
            .iter()
            .copied()
            .filter(|v| constrained.contains(v))
            .collect();
        debug_assert!(owned
            .iter()
            .all(|v| constrained.contains(v) || self.adj[v.idx()].is_empty()));

        let part_refs: Vec<&DpTable> = parts.iter().map(|p| p.as_ref()).collect();
        let spec = SiteSpec {
            parts: part_refs,
            extra_vars: extra,
            edges: glue.into_iter().collect(),
            owned: owned_vars,
            out_active: out_active.clone(),
        };
        let res = solve_site(self.plugin, &spec, &|v| self.active_in_g[v.idx()]);
        DpTable {
            interface: interface.to_vec(),
            active: out_active,
            entries: res.entries,
        }
    }
}

/// Builds the precomputed backbone: the open-triangle table of every node,
/// bottom-up by depth.
pub fn compute_tables(g: &DynamicGraph, ntd: &NiceTreeDecomposition, plugin: Plugin) -> TableStore {
    let mut store = TableStore::new(plugin, g.version());
    let builder = TableBuilder::new(g, ntd, plugin);
    let mut by_depth: Vec<_> = ntd.nodes().collect();
    by_depth.sort_by_key(|&i| std::cmp::Reverse(ntd.depth_of(i)));
    for i in by_depth {
        builder.table(&mut store, Triangle::open(i), None);
    }
    store
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum DpError {
    #[error("tables built at version {store} but graph is at version {graph}")]
    StaleTables { store: u64, graph: u64 },
}

/// Query answer: feasibility for decision plug-ins, optimum plus witness for
/// optimisation plug-ins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    Decision(bool),
    Optimum { value: u64, witness: Vec<VertexId> },
}

impl Answer {
    pub fn as_decision(&self) -> Option<bool> {
        match self {
            Answer::Decision(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_optimum(&self) -> Option<(u64, &[VertexId])> {
        match self {
            Answer::Optimum { value, witness } => Some((*value, witness)),
            _ => None,
        }
    }
}

pub fn answer_from_entries(
    plugin: Plugin,
    entries: &std::collections::HashMap<Key, Entry>,
) -> Answer {
    if plugin.is_decision() {
        Answer::Decision(!entries.is_empty())
    } else {
        let entry = entries
            .get(&Vec::new().into_boxed_slice() as &Key)
            .expect("optimisation queries are always feasible");
        Answer::Optimum {
            value: entry.cost,
            witness: entry.witness.clone(),
        }
    }
}

/// Answers the query from the root open triangle's table, additionally
/// enforcing the edges inside the root bag and owning the root-bag vertices.
pub fn query_static(
    g: &DynamicGraph,
    ntd: &NiceTreeDecomposition,
    store: &mut TableStore,
) -> Result<Answer, DpError> {
    if store.version != g.version() {
        return Err(DpError::StaleTables {
            store: store.version,
            graph: g.version(),
        });
    }
    let plugin = store.plugin;
    let builder = TableBuilder::new(g, ntd, plugin);
    let root_table = builder.table(store, Triangle::open(ntd.root()), None);

    let root_bag: BTreeSet<VertexId> = ntd.bag(ntd.root()).iter().copied().collect();
    let edges: Vec<(VertexId, VertexId)> = g
        .edges()
        .map(|e| e.endpoints())
        .filter(|&(u, v)| root_bag.contains(&u) && root_bag.contains(&v))
        .collect();
    let mut constrained: BTreeSet<VertexId> = root_table.active.iter().copied().collect();
    for &(u, v) in &edges {
        constrained.insert(u);
        constrained.insert(v);
    }
    let extra: Vec<VertexId> = constrained
        .iter()
        .copied()
        .filter(|v| !root_table.is_active(*v))
        .collect();
    let owned: Vec<VertexId> = root_bag
        .iter()
        .copied()
        .filter(|v| constrained.contains(v))
        .collect();
    let spec = SiteSpec {
        parts: vec![root_table.as_ref()],
        extra_vars: extra,
        edges,
        owned,
        out_active: Vec::new(),
    };
    let res = solve_site(plugin, &spec, &|v| builder.is_active(v));
    Ok(answer_from_entries(plugin, &res.entries))
}
