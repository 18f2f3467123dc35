//! Per-triangle DP tables and their store.
//!
//! A table maps assignments over the triangle's interface to feasibility or
//! to the minimum inner cost with a lexicographically minimal witness.
//! Interface vertices without scoped edges do not influence entries, so a
//! table is keyed only on the active subset; a full-interface lookup checks
//! the admissibility of the inactive labels and projects the key.

use std::collections::HashMap;
use std::sync::Arc;

use crate::graph::VertexId;
use crate::triangle::Triangle;

use super::plugin::Plugin;

pub type Key = Box<[u8]>;

/// Feasibility entry: the minimum number of inner solution vertices and the
/// lex-minimal witness realising it. Decision plug-ins keep cost 0 and an
/// empty witness; presence of the entry is the feasibility bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub cost: u64,
    pub witness: Vec<VertexId>,
}

impl Entry {
    pub fn zero() -> Entry {
        Entry {
            cost: 0,
            witness: Vec::new(),
        }
    }

    /// Total order used everywhere ties are broken: cost first, then
    /// lexicographic order of the sorted witness.
    pub fn better_than(&self, other: &Entry) -> bool {
        (self.cost, &self.witness) < (other.cost, &other.witness)
    }
}

/// Inserts keeping the minimum entry per key.
pub fn fold_min(map: &mut HashMap<Key, Entry>, key: Key, entry: Entry) {
    match map.entry(key) {
        std::collections::hash_map::Entry::Vacant(v) => {
            v.insert(entry);
        }
        std::collections::hash_map::Entry::Occupied(mut o) => {
            if entry.better_than(o.get()) {
                o.insert(entry);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct DpTable {
    /// Full interface, sorted: the corner bags plus a pinned vertex, if any.
    pub interface: Vec<VertexId>,
    /// Subset of the interface with scoped edges (plus the pin), sorted;
    /// entry keys assign one label per active vertex, in this order.
    pub active: Vec<VertexId>,
    pub entries: HashMap<Key, Entry>,
}

impl DpTable {
    /// Looks up a full-interface assignment: inactive labels must be
    /// admissible for the plug-in, the active projection must have an entry.
    pub fn lookup(&self, plugin: Plugin, labels: &dyn Fn(VertexId) -> u8) -> Option<&Entry> {
        let mut key = Vec::with_capacity(self.active.len());
        for &v in &self.interface {
            let l = labels(v);
            if self.active.binary_search(&v).is_ok() {
                key.push(l);
            } else if !plugin.inactive_allowed(l) {
                return None;
            }
        }
        self.entries.get(key.as_slice())
    }

    pub fn is_active(&self, v: VertexId) -> bool {
        self.active.binary_search(&v).is_ok()
    }
}

pub type TableKey = (Triangle, Option<VertexId>);

/// Memoised tables for one (snapshot, decomposition, plug-in) triple.
#[derive(Debug)]
pub struct TableStore {
    pub plugin: Plugin,
    /// Graph version the tables were computed against.
    pub version: u64,
    tables: HashMap<TableKey, Arc<DpTable>>,
    /// Number of triangle tables built into this store.
    pub units_built: u64,
}

impl TableStore {
    pub fn new(plugin: Plugin, version: u64) -> TableStore {
        TableStore {
            plugin,
            version,
            tables: HashMap::new(),
            units_built: 0,
        }
    }

    pub fn get(&self, t: Triangle, pin: Option<VertexId>) -> Option<Arc<DpTable>> {
        self.tables.get(&(t, pin)).cloned()
    }

    pub fn insert(&mut self, t: Triangle, pin: Option<VertexId>, table: DpTable) -> Arc<DpTable> {
        let arc = Arc::new(table);
        self.tables.insert((t, pin), arc.clone());
        self.units_built += 1;
        arc
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TableKey, &Arc<DpTable>)> {
        self.tables.iter()
    }

    /// Per-triangle entry counts, sorted, for the table dump.
    pub fn entry_summary(&self) -> Vec<(TableKey, usize)> {
        let mut rows: Vec<(TableKey, usize)> = self
            .tables
            .iter()
            .map(|(k, t)| (*k, t.entries.len()))
            .collect();
        rows.sort();
        rows
    }
}
