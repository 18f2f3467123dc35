//! Buffer for changes arriving while a recomputation is in flight.
//!
//! Inserting an edge that is pending deletion cancels the deletion instead of
//! accumulating, and symmetrically; the two sets stay disjoint.

use std::collections::BTreeSet;

use crate::graph::{ChangeKind, Edge, EdgeChange};

#[derive(Debug, Default, Clone)]
pub struct DeltaBuffer {
    inserts: BTreeSet<Edge>,
    deletes: BTreeSet<Edge>,
}

impl DeltaBuffer {
    pub fn new() -> DeltaBuffer {
        DeltaBuffer::default()
    }

    pub fn record(&mut self, c: EdgeChange) {
        match c.kind {
            ChangeKind::Insert => {
                if !self.deletes.remove(&c.edge) {
                    self.inserts.insert(c.edge);
                }
            }
            ChangeKind::Delete => {
                if !self.inserts.remove(&c.edge) {
                    self.deletes.insert(c.edge);
                }
            }
        }
    }

    /// Removes and returns the change with the lexicographically smallest
    /// edge across both pending sets.
    pub fn pop_smallest(&mut self) -> Option<EdgeChange> {
        let first_ins = self.inserts.iter().next().copied();
        let first_del = self.deletes.iter().next().copied();
        match (first_ins, first_del) {
            (None, None) => None,
            (Some(e), None) => {
                self.inserts.remove(&e);
                Some(EdgeChange {
                    kind: ChangeKind::Insert,
                    edge: e,
                })
            }
            (None, Some(e)) => {
                self.deletes.remove(&e);
                Some(EdgeChange {
                    kind: ChangeKind::Delete,
                    edge: e,
                })
            }
            (Some(i), Some(d)) => {
                if i < d {
                    self.inserts.remove(&i);
                    Some(EdgeChange {
                        kind: ChangeKind::Insert,
                        edge: i,
                    })
                } else {
                    self.deletes.remove(&d);
                    Some(EdgeChange {
                        kind: ChangeKind::Delete,
                        edge: d,
                    })
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.inserts.len() + self.deletes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inserts.is_empty() && self.deletes.is_empty()
    }
}
