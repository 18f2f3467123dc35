//! Epoch scheduler: periodic sliced recomputation plus the incremental
//! serving layer.
//!
//! Each epoch lasts `f = epoch_length(n)` changes and rebuilds the
//! decomposition and the table backbone from a snapshot taken at its start.
//! During the first half of the epoch the rebuild advances by a bounded
//! number of table units per change while arriving changes are buffered with
//! cancellation; during the second half the fresh state absorbs the current
//! change plus one buffered change per step. At `f` the fresh state becomes
//! the serving state and a new epoch starts. Queries are answered by the
//! serving state through the skeleton layer; before the first handover they
//! fall back to a full recomputation, affordable while the graph is young.

mod delta;
mod skeleton;
mod special;

pub use delta::DeltaBuffer;
pub use skeleton::{flat_answer, skeleton_answer, SkeletonInput};
pub use special::{maximal_clean_triangles, Center, Petal, SpecialBags};

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;
use std::thread::JoinHandle;

use thiserror::Error;

use crate::decompose::{build_nice, DecomposeError, NiceTreeDecomposition, NodeId};
use crate::dp::{compute_tables, query_static, Answer, Plugin, TableBuilder, TableStore};
use crate::graph::{DynamicGraph, EdgeChange, GraphError, VertexId};
use crate::triangle::Triangle;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error("changed edge {{{u},{v}}} has an endpoint outside the center")]
    EdgeOutsideCenter { u: u32, v: u32 },
}

/// Epoch length: `max(1, ceil(c_factor * log2(n)))` changes.
pub fn epoch_length(n: u32, c_factor: f64) -> usize {
    let n = n.max(1);
    let raw = c_factor * (n as f64).log2();
    (raw.ceil() as usize).max(1)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Phase {
    Recomputing,
    Replaying,
    Serving,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Recomputing => "recomputing",
            Phase::Replaying => "replaying",
            Phase::Serving => "serving",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    Inline,
    Background,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub n: u32,
    pub width_budget: usize,
    pub epoch_factor: f64,
    pub mode: Mode,
    /// Properties whose tables the rebuild prepares. Queries for other
    /// properties still work; their tables are built lazily at query time.
    pub properties: Vec<Plugin>,
}

impl EngineConfig {
    pub fn new(n: u32, width_budget: usize) -> EngineConfig {
        EngineConfig {
            n,
            width_budget,
            epoch_factor: 1.0,
            mode: Mode::Inline,
            properties: Plugin::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepCounters {
    pub table_units_built: u64,
    pub special_bags: usize,
    pub center_size: usize,
    pub skeleton_dp_states: u64,
}

/// The state answering queries: a snapshot's decomposition and tables plus
/// the special-bag and center bookkeeping for the changes absorbed since.
pub struct LiveState {
    pub snapshot: Arc<DynamicGraph>,
    pub ntd: Arc<NiceTreeDecomposition>,
    stores: HashMap<Plugin, TableStore>,
    pub special: SpecialBags,
    pub center: Center,
    floating: BTreeSet<VertexId>,
    pub applied: Vec<EdgeChange>,
    /// Changes absorbed by this state; the bound |S| <= 4m + 1 refers to it.
    pub m_changes: usize,
}

impl LiveState {
    fn new(
        snapshot: Arc<DynamicGraph>,
        ntd: Arc<NiceTreeDecomposition>,
        stores: HashMap<Plugin, TableStore>,
    ) -> LiveState {
        let special = SpecialBags::new(ntd.root());
        let center = Center::derive(&ntd, &special, &BTreeSet::new());
        LiveState {
            snapshot,
            ntd,
            stores,
            special,
            center,
            floating: BTreeSet::new(),
            applied: Vec::new(),
            m_changes: 0,
        }
    }

    /// Absorbs one change: both endpoints become covered by the center, the
    /// special set stays LCA-closed, and the edge joins the center-level
    /// delta.
    pub fn update_special(&mut self, c: EdgeChange) {
        let (u, v) = c.edge.endpoints();
        let mut structure_changed = false;
        for w in [u, v] {
            if self.floating.contains(&w) || self.special.covers(&self.ntd, w) {
                continue;
            }
            match self.ntd.smallest_node_containing(w) {
                Some(j) => {
                    self.special.insert_for(&self.ntd, w, j);
                }
                None => {
                    // vertex was isolated in the snapshot: carry it at the
                    // root's scope as a floating center vertex
                    self.floating.insert(w);
                }
            }
            structure_changed = true;
        }
        self.applied.push(c);
        self.m_changes += 1;
        if structure_changed {
            self.center = Center::derive(&self.ntd, &self.special, &self.floating);
        }
    }

    /// Answers a query about `current` through the skeleton; returns the
    /// answer, the DP rows explored, and the table units built lazily.
    pub fn query(
        &mut self,
        current: &DynamicGraph,
        plugin: Plugin,
    ) -> Result<(Answer, u64, u64), EngineError> {
        let LiveState {
            snapshot,
            ntd,
            stores,
            special,
            center,
            applied,
            ..
        } = self;
        let store = stores
            .entry(plugin)
            .or_insert_with(|| TableStore::new(plugin, snapshot.version()));
        let before = store.units_built;
        let input = SkeletonInput {
            current,
            snapshot,
            ntd,
            special,
            center,
            applied,
        };
        let (ans, rows) = skeleton_answer(&input, store)?;
        Ok((ans, rows, store.units_built - before))
    }

    /// Reference answer by flat center enumeration (small centers only).
    pub fn query_flat(
        &mut self,
        current: &DynamicGraph,
        plugin: Plugin,
    ) -> Result<Answer, EngineError> {
        let LiveState {
            snapshot,
            ntd,
            stores,
            special,
            center,
            applied,
            ..
        } = self;
        let store = stores
            .entry(plugin)
            .or_insert_with(|| TableStore::new(plugin, snapshot.version()));
        let input = SkeletonInput {
            current,
            snapshot,
            ntd,
            special,
            center,
            applied,
        };
        flat_answer(&input, store)
    }

    pub fn max_bag_size(&self) -> usize {
        self.ntd.max_bag_size()
    }

    pub fn store(&self, plugin: Plugin) -> Option<&TableStore> {
        self.stores.get(&plugin)
    }

    pub fn floating(&self) -> &BTreeSet<VertexId> {
        &self.floating
    }
}

struct BuildWork {
    ntd: Arc<NiceTreeDecomposition>,
    pending: VecDeque<(Plugin, NodeId)>,
    stores: HashMap<Plugin, TableStore>,
    handle: Option<JoinHandle<HashMap<Plugin, TableStore>>>,
    maintainer: Option<LiveState>,
}

struct BuildState {
    snapshot: Arc<DynamicGraph>,
    delta: DeltaBuffer,
    outcome: Result<BuildWork, DecomposeError>,
}

impl BuildState {
    /// Starts an epoch rebuild on the snapshot. The decomposition is built
    /// here (3 structural units); table units are sliced over phase 1, or
    /// computed on a background thread that is joined at the phase boundary.
    /// With no phase-1 steps everything completes immediately.
    fn new(snapshot: DynamicGraph, cfg: &EngineConfig, p1: usize) -> (BuildState, u64) {
        let snapshot = Arc::new(snapshot);
        let ntd = match build_nice(&snapshot, cfg.width_budget) {
            Ok(ntd) => Arc::new(ntd),
            Err(e) => {
                return (
                    BuildState {
                        snapshot,
                        delta: DeltaBuffer::new(),
                        outcome: Err(e),
                    },
                    0,
                )
            }
        };
        let mut units = 0u64;
        let mut nodes: Vec<NodeId> = ntd.nodes().collect();
        nodes.sort_by_key(|&i| (std::cmp::Reverse(ntd.depth_of(i)), i));
        let mut pending: VecDeque<(Plugin, NodeId)> = VecDeque::new();
        for &plugin in &cfg.properties {
            for &i in &nodes {
                pending.push_back((plugin, i));
            }
        }

        let mut work = BuildWork {
            ntd: ntd.clone(),
            pending,
            stores: HashMap::new(),
            handle: None,
            maintainer: None,
        };

        if p1 == 0 {
            units += work.pending.len() as u64;
            let mut stores: HashMap<Plugin, TableStore> = cfg
                .properties
                .iter()
                .map(|&p| (p, TableStore::new(p, snapshot.version())))
                .collect();
            for (plugin, node) in work.pending.drain(..) {
                let store = stores.get_mut(&plugin).unwrap();
                TableBuilder::new(&snapshot, &ntd, plugin).table(store, Triangle::open(node), None);
            }
            work.maintainer = Some(LiveState::new(snapshot.clone(), ntd, stores));
        } else {
            match cfg.mode {
                Mode::Inline => {
                    work.stores = cfg
                        .properties
                        .iter()
                        .map(|&p| (p, TableStore::new(p, snapshot.version())))
                        .collect();
                }
                Mode::Background => {
                    let snap = snapshot.clone();
                    let ntd_bg = ntd.clone();
                    let props = cfg.properties.clone();
                    work.handle = Some(std::thread::spawn(move || {
                        props
                            .into_iter()
                            .map(|p| (p, compute_tables(&snap, &ntd_bg, p)))
                            .collect()
                    }));
                }
            }
        }

        (
            BuildState {
                snapshot,
                delta: DeltaBuffer::new(),
                outcome: Ok(work),
            },
            units,
        )
    }

    /// Advances the rebuild by `ceil(pending / remaining_steps)` units. In
    /// background mode only the accounting advances; the thread does the
    /// work. Returns the units consumed.
    fn slice(&mut self, remaining_steps: usize, mode: Mode) -> u64 {
        let Ok(work) = &mut self.outcome else {
            return 0;
        };
        if work.pending.is_empty() {
            return 0;
        }
        let quantum = work.pending.len().div_ceil(remaining_steps.max(1));
        let mut done = 0u64;
        for _ in 0..quantum {
            let Some((plugin, node)) = work.pending.pop_front() else {
                break;
            };
            if mode == Mode::Inline {
                let store = work.stores.get_mut(&plugin).expect("store prepared");
                TableBuilder::new(&self.snapshot, &work.ntd, plugin).table(
                    store,
                    Triangle::open(node),
                    None,
                );
            }
            done += 1;
        }
        done
    }

    /// Phase boundary: the rebuild must be complete; the fresh maintainer
    /// starts absorbing changes.
    fn flip(&mut self, mode: Mode) {
        let Ok(work) = &mut self.outcome else { return };
        assert!(
            work.pending.is_empty(),
            "slicing must finish by the boundary"
        );
        if mode == Mode::Background {
            if let Some(handle) = work.handle.take() {
                work.stores = handle.join().expect("rebuild thread panicked");
            }
        }
        work.maintainer = Some(LiveState::new(
            self.snapshot.clone(),
            work.ntd.clone(),
            std::mem::take(&mut work.stores),
        ));
    }
}

pub struct EpochEngine {
    cfg: EngineConfig,
    graph: DynamicGraph,
    f: usize,
    p1: usize,
    counter: usize,
    phase: Phase,
    live: Option<LiveState>,
    build: BuildState,
    step_units: u64,
    step_rows: u64,
    check_handover: bool,
}

impl EpochEngine {
    pub fn new(cfg: EngineConfig) -> EpochEngine {
        let f = epoch_length(cfg.n, cfg.epoch_factor);
        let p1 = f / 2;
        let graph = DynamicGraph::new(cfg.n);
        let (build, units) = BuildState::new(graph.snapshot(), &cfg, p1);
        EpochEngine {
            cfg,
            graph,
            f,
            p1,
            counter: 0,
            phase: Phase::Recomputing,
            live: None,
            build,
            step_units: units,
            step_rows: 0,
            check_handover: false,
        }
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn live(&self) -> Option<&LiveState> {
        self.live.as_ref()
    }

    pub fn live_mut(&mut self) -> Option<&mut LiveState> {
        self.live.as_mut()
    }

    pub fn epoch_counter(&self) -> usize {
        self.counter
    }

    pub fn delta_len(&self) -> usize {
        self.build.delta.len()
    }

    /// Enables the handover cross-check: at each handover the retiring and
    /// the fresh state must agree on every configured property.
    pub fn set_check_handover(&mut self, on: bool) {
        self.check_handover = on;
    }

    pub fn on_change(&mut self, c: EdgeChange) -> Result<(), EngineError> {
        self.graph.apply_change(c)?;
        self.counter += 1;
        if let Some(live) = &mut self.live {
            live.update_special(c);
        }
        if self.counter <= self.p1 {
            self.build.delta.record(c);
            let remaining = self.p1 - self.counter + 1;
            self.step_units += self.build.slice(remaining, self.cfg.mode);
            if self.counter == self.p1 {
                self.build.flip(self.cfg.mode);
            }
        } else if let Ok(work) = &mut self.build.outcome {
            let maintainer = work.maintainer.as_mut().expect("flip created maintainer");
            maintainer.update_special(c);
            if let Some(buffered) = self.build.delta.pop_smallest() {
                maintainer.update_special(buffered);
            }
        }
        self.phase = if self.counter < self.p1 {
            Phase::Recomputing
        } else if self.counter < self.f {
            Phase::Replaying
        } else {
            Phase::Serving
        };

        if self.counter >= self.f {
            let fresh = match &mut self.build.outcome {
                Err(e) => return Err(e.clone().into()),
                Ok(work) => {
                    assert!(
                        self.build.delta.is_empty(),
                        "buffered changes must drain by the handover"
                    );
                    work.maintainer
                        .take()
                        .expect("maintainer ready at handover")
                }
            };
            let mut fresh = fresh;
            if self.check_handover {
                if let Some(old) = self.live.as_mut() {
                    for plugin in self.cfg.properties.clone() {
                        let (a_old, _, _) = old.query(&self.graph, plugin)?;
                        let (a_new, _, _) = fresh.query(&self.graph, plugin)?;
                        assert_eq!(
                            a_old,
                            a_new,
                            "handover disagreement for {} at version {}",
                            plugin,
                            self.graph.version()
                        );
                    }
                }
            }
            self.live = Some(fresh);
            let (build, units) = BuildState::new(self.graph.snapshot(), &self.cfg, self.p1);
            self.build = build;
            self.step_units += units;
            self.counter = 0;
        }
        Ok(())
    }

    pub fn query(&mut self, plugin: Plugin) -> Result<Answer, EngineError> {
        match &mut self.live {
            Some(live) => {
                let (ans, rows, units) = live.query(&self.graph, plugin)?;
                self.step_rows += rows;
                self.step_units += units;
                Ok(ans)
            }
            None => {
                let (ans, units) = bootstrap_answer(&self.graph, self.cfg.width_budget, plugin)?;
                self.step_units += units;
                Ok(ans)
            }
        }
    }

    /// Per-step counters; resets the work accumulators.
    pub fn take_step_counters(&mut self) -> StepCounters {
        let counters = StepCounters {
            table_units_built: self.step_units,
            special_bags: self.live.as_ref().map_or(0, |l| l.special.len()),
            center_size: self.live.as_ref().map_or(0, |l| l.center.size()),
            skeleton_dp_states: self.step_rows,
        };
        self.step_units = 0;
        self.step_rows = 0;
        counters
    }
}

/// Full recomputation on the current graph: used before the first epoch
/// completes. Returns the answer and the table units built.
pub fn bootstrap_answer(
    g: &DynamicGraph,
    width_budget: usize,
    plugin: Plugin,
) -> Result<(Answer, u64), EngineError> {
    let ntd = build_nice(g, width_budget)?;
    let mut store = compute_tables(g, &ntd, plugin);
    let units = store.units_built;
    let ans = query_static(g, &ntd, &mut store).expect("fresh tables");
    Ok((ans, units))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexId;

    fn ins(u: u32, v: u32) -> EdgeChange {
        EdgeChange::insert(VertexId(u), VertexId(v)).unwrap()
    }

    fn del(u: u32, v: u32) -> EdgeChange {
        EdgeChange::delete(VertexId(u), VertexId(v)).unwrap()
    }

    #[test]
    fn epoch_length_examples() {
        assert_eq!(epoch_length(1024, 1.0), 10);
        assert_eq!(epoch_length(1, 2.5), 1);
        assert_eq!(epoch_length(100, 2.0), 14);
    }

    #[test]
    fn phase_arithmetic_f8() {
        // n = 256 gives f = 8, p1 = 4
        let cfg = EngineConfig::new(256, 8);
        let mut eng = EpochEngine::new(cfg);
        assert_eq!(eng.f(), 8);
        let script = [
            ins(0, 1),
            ins(1, 2),
            ins(2, 3),
            ins(3, 4),
            ins(4, 5),
            ins(5, 6),
            ins(6, 7),
            ins(7, 8),
        ];
        let mut phases = Vec::new();
        for c in script {
            eng.on_change(c).unwrap();
            phases.push(eng.phase());
        }
        assert_eq!(
            phases,
            vec![
                Phase::Recomputing,
                Phase::Recomputing,
                Phase::Recomputing,
                Phase::Replaying,
                Phase::Replaying,
                Phase::Replaying,
                Phase::Replaying,
                Phase::Serving,
            ]
        );
        assert!(eng.live().is_some());
        assert_eq!(eng.epoch_counter(), 0);
    }

    #[test]
    fn delta_bounded_and_cancelling() {
        let cfg = EngineConfig::new(256, 8);
        let mut eng = EpochEngine::new(cfg);
        eng.on_change(ins(0, 1)).unwrap();
        eng.on_change(del(0, 1)).unwrap();
        // insert-then-delete of the same edge in phase 1: buffer empty
        assert_eq!(eng.delta_len(), 0);
        eng.on_change(ins(2, 3)).unwrap();
        assert_eq!(eng.delta_len(), 1);
    }

    #[test]
    fn early_queries_bootstrap() {
        let cfg = EngineConfig::new(64, 4);
        let mut eng = EpochEngine::new(cfg);
        eng.on_change(ins(0, 1)).unwrap();
        let ans = eng.query(Plugin::ThreeCol).unwrap();
        assert_eq!(ans, Answer::Decision(true));
        let ans = eng.query(Plugin::VertexCover).unwrap();
        assert_eq!(ans.as_optimum().unwrap().0, 1);
    }
}
