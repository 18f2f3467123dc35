//! Python bindings: the dynamic graph, the epoch engine, the script
//! generator/runner, and the brute-force oracles.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dyntw::decompose::build_nice;
use dyntw::dp::{Answer, Plugin};
use dyntw::engine::{epoch_length, EngineConfig, EpochEngine, Mode};
use dyntw::graph::{DynamicGraph, EdgeChange, VertexId};
use dyntw::oracle;
use dyntw::runner::{run_script, RunConfig, RunMode};
use dyntw::script::{gen_partial_ktree, GenParams, Script};

fn to_py_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_plugin(name: &str) -> PyResult<Plugin> {
    name.parse::<Plugin>().map_err(to_py_err)
}

fn answer_to_py(py: Python<'_>, a: &Answer) -> PyObject {
    match a {
        Answer::Decision(b) => b.into_py(py),
        Answer::Optimum { value, witness } => {
            let w: Vec<u32> = witness.iter().map(|v| v.0).collect();
            (*value, w).into_py(py)
        }
    }
}

/// Mutable undirected graph over a fixed vertex universe.
#[pyclass(name = "Graph")]
struct PyGraph {
    inner: DynamicGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: u32) -> Self {
        PyGraph {
            inner: DynamicGraph::new(n),
        }
    }

    fn insert(&mut self, u: u32, v: u32) -> PyResult<()> {
        let c = EdgeChange::insert(VertexId(u), VertexId(v)).map_err(to_py_err)?;
        self.inner.apply_change(c).map_err(to_py_err)
    }

    fn delete(&mut self, u: u32, v: u32) -> PyResult<()> {
        let c = EdgeChange::delete(VertexId(u), VertexId(v)).map_err(to_py_err)?;
        self.inner.apply_change(c).map_err(to_py_err)
    }

    fn edges(&self) -> Vec<(u32, u32)> {
        self.inner
            .edges()
            .map(|e| {
                let (u, v) = e.endpoints();
                (u.0, v.0)
            })
            .collect()
    }

    fn active_domain(&self) -> Vec<u32> {
        self.inner
            .active_domain()
            .into_iter()
            .map(|v| v.0)
            .collect()
    }

    #[getter]
    fn version(&self) -> u64 {
        self.inner.version()
    }

    /// Builds a balanced nice tree decomposition and reports its shape.
    fn decompose<'py>(&self, py: Python<'py>, width_budget: usize) -> PyResult<Bound<'py, PyDict>> {
        let ntd = build_nice(&self.inner, width_budget).map_err(to_py_err)?;
        let d = PyDict::new_bound(py);
        d.set_item("nodes", ntd.num_nodes())?;
        d.set_item("width", ntd.td().width())?;
        d.set_item("depth", ntd.depth())?;
        d.set_item("depth_factor", ntd.d_factor())?;
        d.set_item("max_bag_size", ntd.max_bag_size())?;
        Ok(d)
    }
}

/// The dynamic query engine: feed changes, ask queries at any point.
#[pyclass(name = "Engine")]
struct PyEngine {
    inner: EpochEngine,
}

#[pymethods]
impl PyEngine {
    #[new]
    #[pyo3(signature = (n, width_budget, epoch_factor=1.0, background=false))]
    fn new(n: u32, width_budget: usize, epoch_factor: f64, background: bool) -> Self {
        let mut cfg = EngineConfig::new(n, width_budget);
        cfg.epoch_factor = epoch_factor;
        cfg.mode = if background {
            Mode::Background
        } else {
            Mode::Inline
        };
        PyEngine {
            inner: EpochEngine::new(cfg),
        }
    }

    fn insert(&mut self, u: u32, v: u32) -> PyResult<()> {
        let c = EdgeChange::insert(VertexId(u), VertexId(v)).map_err(to_py_err)?;
        self.inner.on_change(c).map_err(to_py_err)
    }

    fn delete(&mut self, u: u32, v: u32) -> PyResult<()> {
        let c = EdgeChange::delete(VertexId(u), VertexId(v)).map_err(to_py_err)?;
        self.inner.on_change(c).map_err(to_py_err)
    }

    /// `query("threecol") -> bool`; `query("vertexcover"|"domset") ->
    /// (optimum, witness)`.
    fn query(&mut self, py: Python<'_>, property: &str) -> PyResult<PyObject> {
        let plugin = parse_plugin(property)?;
        let ans = self.inner.query(plugin).map_err(to_py_err)?;
        Ok(answer_to_py(py, &ans))
    }

    #[getter]
    fn phase(&self) -> &'static str {
        self.inner.phase().name()
    }

    #[getter]
    fn epoch_len(&self) -> usize {
        self.inner.f()
    }

    #[getter]
    fn special_bags(&self) -> usize {
        self.inner.live().map_or(0, |l| l.special.len())
    }

    #[getter]
    fn center_size(&self) -> usize {
        self.inner.live().map_or(0, |l| l.center.size())
    }
}

/// Generates a partial k-tree change script (deterministic in the seed).
#[pyfunction]
#[pyo3(signature = (n, k, keep_prob=1.0, seed=0, delete_prob=0.0, query_every=0,
                    properties=vec!["threecol".to_string()], steps=None, max_vertices=None))]
#[allow(clippy::too_many_arguments)]
fn generate_script(
    n: u32,
    k: usize,
    keep_prob: f64,
    seed: u64,
    delete_prob: f64,
    query_every: usize,
    properties: Vec<String>,
    steps: Option<usize>,
    max_vertices: Option<usize>,
) -> PyResult<String> {
    let props = properties
        .iter()
        .map(|s| parse_plugin(s))
        .collect::<PyResult<Vec<_>>>()?;
    let params = GenParams {
        n,
        k,
        keep_prob,
        seed,
        delete_prob,
        query_every,
        properties: props,
        max_ops: steps,
        max_vertices,
    };
    Ok(gen_partial_ktree(&params).map_err(to_py_err)?.to_text())
}

/// Runs a script text and returns the JSON-lines records; with `verify` every
/// query is checked against the brute-force oracle.
#[pyfunction]
#[pyo3(signature = (script, n, width_budget, epoch_factor=1.0, mode="inline", verify=false))]
fn run_script_text(
    script: &str,
    n: u32,
    width_budget: usize,
    epoch_factor: f64,
    mode: &str,
    verify: bool,
) -> PyResult<String> {
    let script = Script::parse(script).map_err(to_py_err)?;
    let cfg = RunConfig {
        n,
        width_budget,
        epoch_factor,
        mode: mode.parse::<RunMode>().map_err(to_py_err)?,
        verify,
        check_handover: false,
    };
    let outcome = run_script(&script, &cfg).map_err(to_py_err)?;
    Ok(outcome.to_jsonl())
}

/// Brute-force reference answers on an explicit edge list.
#[pyfunction]
fn brute_force(
    py: Python<'_>,
    property: &str,
    n: u32,
    edges: Vec<(u32, u32)>,
) -> PyResult<PyObject> {
    let plugin = parse_plugin(property)?;
    let mut g = DynamicGraph::new(n);
    for (u, v) in edges {
        let c = EdgeChange::insert(VertexId(u), VertexId(v)).map_err(to_py_err)?;
        g.apply_change(c).map_err(to_py_err)?;
    }
    let ans = match plugin {
        Plugin::ThreeCol => oracle::brute_threecol(&g),
        Plugin::VertexCover => oracle::brute_min_vertex_cover(&g),
        Plugin::DomSet => oracle::brute_min_dominating_set(&g),
    }
    .map_err(to_py_err)?;
    Ok(match ans {
        oracle::OracleAnswer::Decision(b) => b.into_py(py),
        oracle::OracleAnswer::Optimum { value, witness } => {
            let w: Vec<u32> = witness.iter().map(|v| v.0).collect();
            (value, w).into_py(py)
        }
    })
}

#[pyfunction]
fn epoch_len(n: u32, c_factor: f64) -> usize {
    epoch_length(n, c_factor)
}

#[pymodule]
fn dyntw_py(_py: Python<'_>, m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyEngine>()?;
    m.add_function(wrap_pyfunction!(generate_script, m)?)?;
    m.add_function(wrap_pyfunction!(run_script_text, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(epoch_len, m)?)?;
    Ok(())
}
