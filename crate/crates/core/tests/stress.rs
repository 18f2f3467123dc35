//! Heavier runs than the oracle can follow: large active graphs where the
//! answers are checked by definitional witness validation, handover
//! cross-checks, flat-enumeration equality whenever the center is small
//! enough, and the structural bounds at every step.

use dyntw::decompose::DecomposeError;
use dyntw::dp::{Answer, Plugin};
use dyntw::engine::{epoch_length, EngineConfig, EngineError, EpochEngine, Mode};
use dyntw::graph::{EdgeChange, VertexId};
use dyntw::oracle::{is_dominating_set, is_vertex_cover};
use dyntw::runner::{run_script, RunConfig, RunMode};
use dyntw::script::{gen_partial_ktree, GenParams, ScriptOp};

#[test]
fn large_active_graphs_stay_consistent() {
    for &(n, k, seed) in &[(96u32, 3usize, 1u64), (128, 3, 2), (128, 2, 3)] {
        let f = epoch_length(n, 1.0);
        let mut params = GenParams::new(n, k, 0.9, seed);
        params.delete_prob = 0.1;
        params.max_ops = Some(15 * f);
        let script = gen_partial_ktree(&params).unwrap();

        let mut cfg = EngineConfig::new(n, 3 * k + 2);
        cfg.properties = Plugin::ALL.to_vec();
        let mut engine = EpochEngine::new(cfg);
        engine.set_check_handover(true);
        let mut step = 0usize;
        for op in &script.ops {
            if let ScriptOp::Change(c) = op {
                engine.on_change(*c).unwrap();
                step += 1;
                if step % 5 != 0 {
                    continue;
                }
                // answers are self-validated: witnesses must be feasible and
                // of the reported size; 3-colourings must exist iff claimed
                // (checked against flat enumeration when the center allows)
                let vc = engine.query(Plugin::VertexCover).unwrap();
                let (value, witness) = vc.as_optimum().unwrap();
                assert!(is_vertex_cover(engine.graph(), witness));
                assert_eq!(witness.len() as u64, value);

                let ds = engine.query(Plugin::DomSet).unwrap();
                let (value, witness) = ds.as_optimum().unwrap();
                assert!(is_dominating_set(engine.graph(), witness));
                assert_eq!(witness.len() as u64, value);

                let tc = engine.query(Plugin::ThreeCol).unwrap();
                let graph = engine.graph().clone();
                let Some(live) = engine.live_mut() else {
                    continue; // still bootstrapping before the first handover
                };
                if live.center.size() <= 14 {
                    for plugin in Plugin::ALL {
                        let (skel, _, _) = live.query(&graph, plugin).unwrap();
                        let flat = live.query_flat(&graph, plugin).unwrap();
                        assert_eq!(skel, flat, "n={} seed={} {}", n, seed, plugin);
                    }
                    let flat_tc = live.query_flat(&graph, Plugin::ThreeCol).unwrap();
                    assert_eq!(tc, flat_tc);
                }
            }
        }
        assert!(step >= 10 * f, "script long enough (got {} changes)", step);
    }
}

#[test]
fn background_mode_matches_inline_on_large_runs() {
    for seed in 0..4u64 {
        let n = 128u32;
        let mut params = GenParams::new(n, 3, 0.9, 100 + seed);
        params.delete_prob = 0.15;
        params.query_every = 3;
        params.properties = Plugin::ALL.to_vec();
        params.max_ops = Some(12 * epoch_length(n, 1.0));
        let script = gen_partial_ktree(&params).unwrap();
        let mut cfg = RunConfig::new(n, 12);
        cfg.mode = RunMode::Inline;
        let a = run_script(&script, &cfg).unwrap().to_jsonl();
        cfg.mode = RunMode::Background;
        let b = run_script(&script, &cfg).unwrap().to_jsonl();
        assert_eq!(a, b, "seed {}", seed);
    }
}

#[test]
fn epoch_factor_variants_verify() {
    for &factor in &[0.5f64, 2.0] {
        let n = 48u32;
        let f = epoch_length(n, factor);
        assert!(f >= 1);
        let mut params = GenParams::new(n, 2, 0.85, 5);
        params.delete_prob = 0.25;
        params.query_every = 1;
        params.properties = Plugin::ALL.to_vec();
        params.max_ops = Some(8 * f.max(4));
        params.max_vertices = Some(10);
        let script = gen_partial_ktree(&params).unwrap();
        let mut cfg = RunConfig::new(n, 8);
        cfg.epoch_factor = factor;
        cfg.verify = true;
        cfg.check_handover = true;
        run_script(&script, &cfg).unwrap();
    }
}

#[test]
fn minimal_epoch_length_still_answers_correctly() {
    // n = 2 forces f = 1: no buffering phase at all, rebuild every change
    let mut cfg = EngineConfig::new(2, 2);
    cfg.properties = vec![Plugin::VertexCover];
    let mut engine = EpochEngine::new(cfg);
    assert_eq!(engine.f(), 1);
    let ins = EdgeChange::insert(VertexId(0), VertexId(1)).unwrap();
    let del = EdgeChange::delete(VertexId(0), VertexId(1)).unwrap();
    engine.on_change(ins).unwrap();
    assert_eq!(
        engine.query(Plugin::VertexCover).unwrap(),
        Answer::Optimum { value: 1, witness: vec![VertexId(0)] }
    );
    engine.on_change(del).unwrap();
    assert_eq!(
        engine.query(Plugin::VertexCover).unwrap(),
        Answer::Optimum { value: 0, witness: vec![] }
    );
}

#[test]
fn width_violation_surfaces_at_epoch_boundary() {
    // n = 4 gives f = 2; with budget 1 the snapshot taken after the triangle
    // is complete cannot be decomposed, and the failure surfaces exactly at
    // the next handover
    let mut cfg = EngineConfig::new(4, 1);
    cfg.properties = vec![Plugin::ThreeCol];
    let mut engine = EpochEngine::new(cfg);
    assert_eq!(engine.f(), 2);
    let ins = |a: u32, b: u32| EdgeChange::insert(VertexId(a), VertexId(b)).unwrap();
    engine.on_change(ins(0, 1)).unwrap();
    engine.on_change(ins(1, 2)).unwrap(); // boundary; next snapshot is a path
    engine.on_change(ins(0, 2)).unwrap(); // triangle, width 2
    engine.on_change(ins(0, 3)).unwrap(); // boundary; next snapshot has width 2
    engine.on_change(ins(1, 3)).unwrap();
    // the epoch that started on the over-budget snapshot cannot hand over
    let err = engine.on_change(ins(2, 3)).unwrap_err();
    assert!(matches!(
        err,
        EngineError::Decompose(DecomposeError::WidthExceeded { found: 2, budget: 1 })
    ));
}

#[test]
fn background_mode_survives_minimal_epochs() {
    let mut cfg = EngineConfig::new(2, 2);
    cfg.mode = Mode::Background;
    cfg.properties = vec![Plugin::ThreeCol];
    let mut engine = EpochEngine::new(cfg);
    let ins = EdgeChange::insert(VertexId(0), VertexId(1)).unwrap();
    engine.on_change(ins).unwrap();
    assert_eq!(engine.query(Plugin::ThreeCol).unwrap(), Answer::Decision(true));
}

#[test]
fn full_universe_run_at_n256() {
    let n = 256u32;
    let f = epoch_length(n, 1.0);
    assert_eq!(f, 8);
    let mut params = GenParams::new(n, 3, 0.9, 77);
    params.delete_prob = 0.1;
    params.query_every = 4;
    params.properties = Plugin::ALL.to_vec();
    params.max_ops = Some(12 * f);
    let script = gen_partial_ktree(&params).unwrap();
    let mut cfg = RunConfig::new(n, 12);
    cfg.check_handover = true;
    let out = run_script(&script, &cfg).unwrap();
    assert_eq!(out.records.len(), script.ops.len());
    assert_eq!(out.totals.serving_change_units_max, 0);
    // witnesses of every optimisation answer are definitionally valid
    let mut g = dyntw::graph::DynamicGraph::new(n);
    let mut idx = 0;
    for op in &script.ops {
        match op {
            ScriptOp::Change(c) => {
                g.apply_change(*c).unwrap();
            }
            ScriptOp::Query(p) => {
                if let Some(dyntw::runner::AnswerJson::Optimum { optimum, witness }) =
                    &out.records[idx].answer
                {
                    let w: Vec<VertexId> = witness.iter().map(|&v| VertexId(v)).collect();
                    assert_eq!(w.len() as u64, *optimum);
                    match p {
                        Plugin::VertexCover => assert!(is_vertex_cover(&g, &w)),
                        Plugin::DomSet => assert!(is_dominating_set(&g, &w)),
                        Plugin::ThreeCol => {}
                    }
                }
            }
        }
        idx += 1;
    }
}
