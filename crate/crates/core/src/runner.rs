//! Script execution with per-step records, oracle verification, and the
//! work-accounting benchmark comparing the epoch engine against full
//! recomputation.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::decompose::{build_nice, NiceTreeDecomposition};
use crate::dp::{compute_tables, query_static, Answer, Plugin, TableStore};
use crate::engine::{EngineConfig, EngineError, EpochEngine, Mode, Phase, StepCounters};
use crate::graph::{ChangeKind, DynamicGraph, EdgeChange};
use crate::oracle::{
    brute_min_dominating_set, brute_min_vertex_cover, brute_threecol, is_dominating_set,
    is_vertex_cover, OracleAnswer, OracleError,
};
use crate::script::{Script, ScriptError, ScriptOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Inline,
    Background,
    FullRecompute,
}

impl std::str::FromStr for RunMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inline" => Ok(RunMode::Inline),
            "background" => Ok(RunMode::Background),
            "full-recompute" | "full" => Ok(RunMode::FullRecompute),
            other => Err(format!(
                "unknown mode '{}' (expected inline|background|full-recompute)",
                other
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub n: u32,
    pub width_budget: usize,
    pub epoch_factor: f64,
    pub mode: RunMode,
    pub verify: bool,
    pub check_handover: bool,
}

impl RunConfig {
    pub fn new(n: u32, width_budget: usize) -> RunConfig {
        RunConfig {
            n,
            width_budget,
            epoch_factor: 1.0,
            mode: RunMode::Inline,
            verify: false,
            check_handover: false,
        }
    }
}

#[derive(Error, Debug)]
pub enum RunError {
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error("step {step}: {source}")]
    Engine { step: usize, source: EngineError },
    #[error("step {step}: oracle failed: {source}")]
    Oracle { step: usize, source: OracleError },
    #[error("step {step}: {property} mismatch: engine answered {engine}, oracle {oracle}")]
    VerifyMismatch {
        step: usize,
        property: Plugin,
        engine: String,
        oracle: String,
    },
}

#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecordCounters {
    pub table_units_built: u64,
    pub special_bags: usize,
    pub center_size: usize,
    pub skeleton_dp_states: u64,
}

impl From<StepCounters> for RecordCounters {
    fn from(c: StepCounters) -> Self {
        RecordCounters {
            table_units_built: c.table_units_built,
            special_bags: c.special_bags,
            center_size: c.center_size,
            skeleton_dp_states: c.skeleton_dp_states,
        }
    }
}

#[derive(Serialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum AnswerJson {
    Decision(bool),
    Optimum { optimum: u64, witness: Vec<u32> },
}

impl From<&Answer> for AnswerJson {
    fn from(a: &Answer) -> Self {
        match a {
            Answer::Decision(b) => AnswerJson::Decision(*b),
            Answer::Optimum { value, witness } => AnswerJson::Optimum {
                optimum: *value,
                witness: witness.iter().map(|v| v.0).collect(),
            },
        }
    }
}

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub step: usize,
    pub op: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub property: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer: Option<AnswerJson>,
    pub phase: &'static str,
    pub counters: RecordCounters,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RunTotals {
    pub steps: usize,
    pub changes: usize,
    pub queries: usize,
    pub table_units_total: u64,
    /// Highest per-change table unit count seen while the engine was serving.
    pub serving_change_units_max: u64,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub records: Vec<RunRecord>,
    pub totals: RunTotals,
}

impl RunOutcome {
    /// One JSON object per record, newline-separated; byte-deterministic for
    /// a fixed (script, config).
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serialises"));
            out.push('\n');
        }
        out
    }
}

/// Driver that rebuilds the decomposition and all tables after every change.
struct FullRecompute {
    graph: DynamicGraph,
    width_budget: usize,
    properties: Vec<Plugin>,
    state: Option<(NiceTreeDecomposition, HashMap<Plugin, TableStore>)>,
    step_units: u64,
}

impl FullRecompute {
    fn new(n: u32, width_budget: usize, properties: Vec<Plugin>) -> FullRecompute {
        FullRecompute {
            graph: DynamicGraph::new(n),
            width_budget,
            properties,
            state: None,
            step_units: 0,
        }
    }

    fn rebuild(&mut self) -> Result<(), EngineError> {
        let ntd = build_nice(&self.graph, self.width_budget)?;
        let mut stores = HashMap::new();
        for &p in &self.properties {
            let store = compute_tables(&self.graph, &ntd, p);
            self.step_units += store.units_built;
            stores.insert(p, store);
        }
        self.state = Some((ntd, stores));
        Ok(())
    }

    fn on_change(&mut self, c: EdgeChange) -> Result<(), EngineError> {
        self.graph.apply_change(c)?;
        self.rebuild()
    }

    fn query(&mut self, plugin: Plugin) -> Result<Answer, EngineError> {
        let stale = match &self.state {
            Some((_, stores)) => stores
                .get(&plugin)
                .map_or(true, |s| s.version != self.graph.version()),
            None => true,
        };
        if stale {
            if !self.properties.contains(&plugin) {
                self.properties.push(plugin);
            }
            self.rebuild()?;
        }
        let (ntd, stores) = self.state.as_mut().expect("state rebuilt");
        let store = stores.get_mut(&plugin).expect("store for property");
        Ok(query_static(&self.graph, ntd, store).expect("fresh tables"))
    }

    fn take_counters(&mut self) -> StepCounters {
        let c = StepCounters {
            table_units_built: self.step_units,
            ..StepCounters::default()
        };
        self.step_units = 0;
        c
    }
}

enum Driver {
    Epoch(Box<EpochEngine>),
    Full(FullRecompute),
}

impl Driver {
    fn on_change(&mut self, c: EdgeChange) -> Result<(), EngineError> {
        match self {
            Driver::Epoch(e) => e.on_change(c),
            Driver::Full(f) => f.on_change(c),
        }
    }

    fn query(&mut self, p: Plugin) -> Result<Answer, EngineError> {
        match self {
            Driver::Epoch(e) => e.query(p),
            Driver::Full(f) => f.query(p),
        }
    }

    fn take_counters(&mut self) -> StepCounters {
        match self {
            Driver::Epoch(e) => e.take_step_counters(),
            Driver::Full(f) => f.take_counters(),
        }
    }

    fn phase_name(&self) -> &'static str {
        match self {
            Driver::Epoch(e) => e.phase().name(),
            Driver::Full(_) => "full",
        }
    }

    fn phase(&self) -> Option<Phase> {
        match self {
            Driver::Epoch(e) => Some(e.phase()),
            Driver::Full(_) => None,
        }
    }

    fn graph(&self) -> &DynamicGraph {
        match self {
            Driver::Epoch(e) => e.graph(),
            Driver::Full(f) => &f.graph,
        }
    }
}

fn verify_against_oracle(
    step: usize,
    plugin: Plugin,
    g: &DynamicGraph,
    answer: &Answer,
) -> Result<(), RunError> {
    let oracle = match plugin {
        Plugin::ThreeCol => brute_threecol(g),
        Plugin::VertexCover => brute_min_vertex_cover(g),
        Plugin::DomSet => brute_min_dominating_set(g),
    }
    .map_err(|source| RunError::Oracle { step, source })?;
    let mismatch = |engine: String, oracle: String| RunError::VerifyMismatch {
        step,
        property: plugin,
        engine,
        oracle,
    };
    match (answer, &oracle) {
        (Answer::Decision(got), OracleAnswer::Decision(want)) => {
            if got != want {
                return Err(mismatch(got.to_string(), want.to_string()));
            }
        }
        (Answer::Optimum { value, witness }, OracleAnswer::Optimum { value: want, .. }) => {
            if value != want {
                return Err(mismatch(value.to_string(), want.to_string()));
            }
            if witness.len() as u64 != *value {
                return Err(mismatch(
                    format!("witness of size {}", witness.len()),
                    format!("optimum {}", want),
                ));
            }
            let valid = match plugin {
                Plugin::VertexCover => is_vertex_cover(g, witness),
                Plugin::DomSet => is_dominating_set(g, witness),
                Plugin::ThreeCol => unreachable!(),
            };
            if !valid {
                return Err(mismatch("invalid witness".into(), "valid witness".into()));
            }
        }
        _ => {
            return Err(mismatch(
                "answer kind".into(),
                "different answer kind".into(),
            ))
        }
    }
    Ok(())
}

/// Executes a script, producing one record per line. With `verify`, every
/// query is checked against the brute-force oracle and the first mismatch
/// aborts the run.
pub fn run_script(script: &Script, cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let properties = {
        let mut props = script.queried_properties();
        if props.is_empty() {
            props = vec![Plugin::ThreeCol];
        }
        props
    };
    let mut driver = match cfg.mode {
        RunMode::FullRecompute => {
            Driver::Full(FullRecompute::new(cfg.n, cfg.width_budget, properties))
        }
        RunMode::Inline | RunMode::Background => {
            let mut ecfg = EngineConfig::new(cfg.n, cfg.width_budget);
            ecfg.epoch_factor = cfg.epoch_factor;
            ecfg.mode = if cfg.mode == RunMode::Inline {
                Mode::Inline
            } else {
                Mode::Background
            };
            ecfg.properties = properties;
            let mut engine = EpochEngine::new(ecfg);
            engine.set_check_handover(cfg.check_handover);
            Driver::Epoch(Box::new(engine))
        }
    };

    let mut records = Vec::with_capacity(script.ops.len());
    let mut totals = RunTotals::default();
    for (idx, op) in script.ops.iter().enumerate() {
        let step = idx + 1;
        let record = match op {
            ScriptOp::Change(c) => {
                driver
                    .on_change(*c)
                    .map_err(|source| RunError::Engine { step, source })?;
                let counters: RecordCounters = driver.take_counters().into();
                totals.changes += 1;
                totals.table_units_total += counters.table_units_built;
                if driver.phase() == Some(Phase::Serving) {
                    totals.serving_change_units_max = totals
                        .serving_change_units_max
                        .max(counters.table_units_built);
                }
                let (u, v) = c.edge.endpoints();
                RunRecord {
                    step,
                    op: match c.kind {
                        ChangeKind::Insert => "insert",
                        ChangeKind::Delete => "delete",
                    },
                    u: Some(u.0),
                    v: Some(v.0),
                    property: None,
                    answer: None,
                    phase: driver.phase_name(),
                    counters,
                }
            }
            ScriptOp::Query(plugin) => {
                let answer = driver
                    .query(*plugin)
                    .map_err(|source| RunError::Engine { step, source })?;
                if cfg.verify {
                    verify_against_oracle(step, *plugin, driver.graph(), &answer)?;
                }
                let counters: RecordCounters = driver.take_counters().into();
                totals.queries += 1;
                totals.table_units_total += counters.table_units_built;
                RunRecord {
                    step,
                    op: "query",
                    u: None,
                    v: None,
                    property: Some(plugin.name()),
                    answer: Some(AnswerJson::from(&answer)),
                    phase: driver.phase_name(),
                    counters,
                }
            }
        };
        records.push(record);
    }
    totals.steps = records.len();
    Ok(RunOutcome { records, totals })
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchSummary {
    pub steps: usize,
    pub epoch_units_total: u64,
    pub full_units_total: u64,
    /// full / epoch; at least 1 means the epoch engine saved work.
    pub saving_ratio: f64,
    pub epoch_serving_change_units_max: u64,
    pub epoch_units_per_step_max: u64,
    pub full_units_per_step_max: u64,
    pub epoch_units_per_step_mean: f64,
    pub full_units_per_step_mean: f64,
}

impl BenchSummary {
    pub fn human(&self) -> String {
        format!(
            "steps: {}\nepoch-mode table units: {} (max/step {}, mean/step {:.1})\n\
             full-recompute table units: {} (max/step {}, mean/step {:.1})\n\
             saving ratio (full/epoch): {:.2}\n\
             serving-phase change-step units max: {}\n",
            self.steps,
            self.epoch_units_total,
            self.epoch_units_per_step_max,
            self.epoch_units_per_step_mean,
            self.full_units_total,
            self.full_units_per_step_max,
            self.full_units_per_step_mean,
            self.saving_ratio,
            self.epoch_serving_change_units_max,
        )
    }
}

/// Runs the script in the configured epoch mode and in full-recompute mode
/// and compares total table work.
pub fn bench(script: &Script, cfg: &RunConfig) -> Result<BenchSummary, RunError> {
    let mut epoch_cfg = cfg.clone();
    epoch_cfg.verify = false;
    if epoch_cfg.mode == RunMode::FullRecompute {
        epoch_cfg.mode = RunMode::Inline;
    }
    let epoch = run_script(script, &epoch_cfg)?;

    let mut full_cfg = cfg.clone();
    full_cfg.verify = false;
    full_cfg.mode = RunMode::FullRecompute;
    let full = run_script(script, &full_cfg)?;

    let per_step = |o: &RunOutcome| -> (u64, f64) {
        let max = o
            .records
            .iter()
            .map(|r| r.counters.table_units_built)
            .max()
            .unwrap_or(0);
        let mean = if o.records.is_empty() {
            0.0
        } else {
            o.totals.table_units_total as f64 / o.records.len() as f64
        };
        (max, mean)
    };
    let (epoch_max, epoch_mean) = per_step(&epoch);
    let (full_max, full_mean) = per_step(&full);
    let ratio = if epoch.totals.table_units_total == 0 {
        f64::INFINITY
    } else {
        full.totals.table_units_total as f64 / epoch.totals.table_units_total as f64
    };
    Ok(BenchSummary {
        steps: epoch.totals.steps,
        epoch_units_total: epoch.totals.table_units_total,
        full_units_total: full.totals.table_units_total,
        saving_ratio: ratio,
        epoch_serving_change_units_max: epoch.totals.serving_change_units_max,
        epoch_units_per_step_max: epoch_max,
        full_units_per_step_max: full_max,
        epoch_units_per_step_mean: epoch_mean,
        full_units_per_step_mean: full_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::{gen_partial_ktree, GenParams};

    #[test]
    fn simple_script_runs_and_verifies() {
        let script = Script::parse("insert 0 1\nquery threecol\n").unwrap();
        let mut cfg = RunConfig::new(8, 4);
        cfg.verify = true;
        let out = run_script(&script, &cfg).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[1].answer, Some(AnswerJson::Decision(true)));
    }

    #[test]
    fn k4_script_answers_false() {
        let text = "insert 0 1\ninsert 0 2\ninsert 0 3\ninsert 1 2\ninsert 1 3\ninsert 2 3\nquery threecol\n";
        let script = Script::parse(text).unwrap();
        let mut cfg = RunConfig::new(8, 4);
        cfg.verify = true;
        let out = run_script(&script, &cfg).unwrap();
        assert_eq!(
            out.records.last().unwrap().answer,
            Some(AnswerJson::Decision(false))
        );
    }

    #[test]
    fn inline_mode_is_deterministic() {
        let mut params = GenParams::new(24, 2, 0.8, 5);
        params.delete_prob = 0.15;
        params.query_every = 4;
        params.properties = vec![Plugin::ThreeCol, Plugin::VertexCover];
        let script = gen_partial_ktree(&params).unwrap();
        let cfg = RunConfig::new(24, 6);
        let a = run_script(&script, &cfg).unwrap().to_jsonl();
        let b = run_script(&script, &cfg).unwrap().to_jsonl();
        assert_eq!(a, b);
    }

    #[test]
    fn generated_script_verifies_end_to_end() {
        let mut params = GenParams::new(24, 2, 0.8, 12);
        params.delete_prob = 0.2;
        params.query_every = 3;
        params.properties = vec![Plugin::ThreeCol, Plugin::VertexCover, Plugin::DomSet];
        params.max_ops = Some(40);
        let script = gen_partial_ktree(&params).unwrap();
        let mut cfg = RunConfig::new(24, 6);
        cfg.verify = true;
        cfg.check_handover = true;
        let out = run_script(&script, &cfg).unwrap();
        assert_eq!(out.records.len(), script.ops.len());
    }

    #[test]
    fn bench_reports_saving() {
        let mut params = GenParams::new(32, 2, 0.9, 9);
        params.query_every = 5;
        let script = gen_partial_ktree(&params).unwrap();
        let cfg = RunConfig::new(32, 6);
        let summary = bench(&script, &cfg).unwrap();
        assert_eq!(summary.epoch_serving_change_units_max, 0);
        assert!(
            summary.saving_ratio >= 1.0,
            "ratio {}",
            summary.saving_ratio
        );
    }
}
