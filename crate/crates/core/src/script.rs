//! Change scripts: the text format, and the seeded partial k-tree generator.
//!
//! A script line is `insert u v`, `delete u v`, or `query <property>`;
//! blank lines and `#` comments are ignored. The generator emits a script
//! that builds a random subgraph of a k-tree, so every prefix has treewidth
//! at most k: insertions follow a k-tree construction order, deletions only
//! remove present edges (subgraphs of k-trees are closed under deletion).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dp::Plugin;
use crate::graph::{Edge, EdgeChange, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScriptOp {
    Change(EdgeChange),
    Query(Plugin),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Script {
    pub ops: Vec<ScriptOp>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ScriptError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("bad generator parameters: {0}")]
    BadParams(String),
}

impl Script {
    pub fn parse(text: &str) -> Result<Script, ScriptError> {
        let mut ops = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut it = trimmed.split_whitespace();
            let op = it.next().unwrap();
            let parse_vertex = |tok: Option<&str>| -> Result<VertexId, ScriptError> {
                tok.ok_or(ScriptError::Parse {
                    line,
                    msg: "missing vertex".into(),
                })?
                .parse::<u32>()
                .map(VertexId)
                .map_err(|e| ScriptError::Parse {
                    line,
                    msg: e.to_string(),
                })
            };
            let parsed = match op {
                "insert" | "delete" => {
                    let u = parse_vertex(it.next())?;
                    let v = parse_vertex(it.next())?;
                    let change = if op == "insert" {
                        EdgeChange::insert(u, v)
                    } else {
                        EdgeChange::delete(u, v)
                    }
                    .map_err(|e| ScriptError::Parse {
                        line,
                        msg: e.to_string(),
                    })?;
                    ScriptOp::Change(change)
                }
                "query" => {
                    let name = it.next().ok_or(ScriptError::Parse {
                        line,
                        msg: "missing property".into(),
                    })?;
                    let plugin = name
                        .parse::<Plugin>()
                        .map_err(|msg| ScriptError::Parse { line, msg })?;
                    ScriptOp::Query(plugin)
                }
                other => {
                    return Err(ScriptError::Parse {
                        line,
                        msg: format!("unknown operation '{}'", other),
                    })
                }
            };
            if it.next().is_some() {
                return Err(ScriptError::Parse {
                    line,
                    msg: "trailing tokens".into(),
                });
            }
            ops.push(parsed);
        }
        Ok(Script { ops })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for op in &self.ops {
            match op {
                ScriptOp::Change(c) => out.push_str(&format!("{}\n", c)),
                ScriptOp::Query(p) => out.push_str(&format!("query {}\n", p)),
            }
        }
        out
    }

    /// Properties queried anywhere in the script, in first-seen order.
    pub fn queried_properties(&self) -> Vec<Plugin> {
        let mut props: Vec<Plugin> = Vec::new();
        for op in &self.ops {
            if let ScriptOp::Query(p) = op {
                if !props.contains(p) {
                    props.push(*p);
                }
            }
        }
        props
    }

    pub fn change_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, ScriptOp::Change(_)))
            .count()
    }
}

#[derive(Clone, Debug)]
pub struct GenParams {
    pub n: u32,
    pub k: usize,
    pub keep_prob: f64,
    pub seed: u64,
    /// Chance, per kept insertion, of also emitting a deletion of a random
    /// present edge.
    pub delete_prob: f64,
    /// Emit a query after this many changes; 0 disables queries.
    pub query_every: usize,
    /// Properties cycled through by the emitted queries.
    pub properties: Vec<Plugin>,
    /// Truncate the script to this many lines. When the k-tree construction
    /// runs out before the limit, the script continues by deleting present
    /// edges and re-inserting absent skeleton edges, which keeps every prefix
    /// a k-tree subgraph.
    pub max_ops: Option<usize>,
    /// Cap on distinct vertices used by the construction; bounds the active
    /// domain of every prefix.
    pub max_vertices: Option<usize>,
}

impl GenParams {
    pub fn new(n: u32, k: usize, keep_prob: f64, seed: u64) -> GenParams {
        GenParams {
            n,
            k,
            keep_prob,
            seed,
            delete_prob: 0.0,
            query_every: 0,
            properties: vec![Plugin::ThreeCol],
            max_ops: None,
            max_vertices: None,
        }
    }
}

/// Deterministic partial-k-tree change script. Every prefix of the produced
/// script keeps the graph a subgraph of a k-tree, hence of treewidth <= k.
pub fn gen_partial_ktree(params: &GenParams) -> Result<Script, ScriptError> {
    let GenParams {
        n,
        k,
        keep_prob,
        seed,
        delete_prob,
        query_every,
        ref properties,
        max_ops,
        max_vertices,
    } = *params;
    if k == 0 || (k as u64) >= n as u64 {
        return Err(ScriptError::BadParams(format!(
            "need 1 <= k < n, got k={} n={}",
            k, n
        )));
    }
    if !(keep_prob > 0.0 && keep_prob <= 1.0) {
        return Err(ScriptError::BadParams(format!(
            "keep_prob must be in (0, 1], got {}",
            keep_prob
        )));
    }
    if query_every > 0 && properties.is_empty() {
        return Err(ScriptError::BadParams(
            "queries requested but no properties given".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u32> = (0..n).collect();
    order.shuffle(&mut rng);

    struct Emitter<'a> {
        script: Script,
        present: Vec<Edge>,
        changes_since_query: usize,
        query_cursor: usize,
        query_every: usize,
        delete_prob: f64,
        properties: &'a [Plugin],
        max_ops: Option<usize>,
    }
    impl Emitter<'_> {
        fn full(&self) -> bool {
            self.max_ops.is_some_and(|m| self.script.ops.len() >= m)
        }
        fn change(&mut self, rng: &mut ChaCha8Rng, c: EdgeChange) {
            self.script.ops.push(ScriptOp::Change(c));
            self.changes_since_query += 1;
            if self.query_every > 0 && self.changes_since_query >= self.query_every {
                self.changes_since_query = 0;
                let p = self.properties[self.query_cursor % self.properties.len()];
                self.query_cursor += 1;
                self.script.ops.push(ScriptOp::Query(p));
            }
            if self.delete_prob > 0.0 && !self.present.is_empty() && rng.gen_bool(self.delete_prob)
            {
                let at = rng.gen_range(0..self.present.len());
                let e = self.present.swap_remove(at);
                let (u, v) = e.endpoints();
                self.script
                    .ops
                    .push(ScriptOp::Change(EdgeChange::delete(u, v).unwrap()));
                self.changes_since_query += 1;
            }
        }
        fn insert(&mut self, rng: &mut ChaCha8Rng, a: u32, b: u32) {
            let c = EdgeChange::insert(VertexId(a), VertexId(b)).unwrap();
            self.present.push(c.edge);
            self.change(rng, c);
        }
    }

    let mut em = Emitter {
        script: Script::default(),
        present: Vec::new(),
        changes_since_query: 0,
        query_cursor: 0,
        query_every,
        delete_prob,
        properties,
        max_ops,
    };

    // seed clique on the first k+1 vertices of the random order
    let used = max_vertices.unwrap_or(n as usize).clamp(k + 1, n as usize);
    let clique: Vec<u32> = order[..=k].to_vec();
    let mut skeleton: Vec<Edge> = Vec::new();
    'outer: {
        for (i, &a) in clique.iter().enumerate() {
            for &b in clique.iter().skip(i + 1) {
                skeleton.push(Edge::new(VertexId(a), VertexId(b)).unwrap());
                if em.full() {
                    continue;
                }
                if rng.gen_bool(keep_prob) {
                    em.insert(&mut rng, a, b);
                }
            }
        }
        // the k-cliques a later vertex may attach to: initially all k-subsets
        // of the seed clique
        let mut cliques: Vec<Vec<u32>> = clique
            .iter()
            .map(|&m| clique.iter().copied().filter(|&x| x != m).collect())
            .collect();
        for &v in order.iter().take(used).skip(k + 1) {
            let base = cliques[rng.gen_range(0..cliques.len())].clone();
            for &m in &base {
                skeleton.push(Edge::new(VertexId(v), VertexId(m)).unwrap());
                if em.full() {
                    continue;
                }
                if rng.gen_bool(keep_prob) {
                    em.insert(&mut rng, v, m);
                }
            }
            for &m in &base {
                let mut next: Vec<u32> = base.iter().copied().filter(|&x| x != m).collect();
                next.push(v);
                cliques.push(next);
            }
        }
        // churn: keep the script going with deletions and re-insertions of
        // skeleton edges until the requested length
        while !em.full() && max_ops.is_some() {
            let absent: Vec<Edge> = skeleton
                .iter()
                .copied()
                .filter(|e| !em.present.contains(e))
                .collect();
            let delete = !em.present.is_empty() && (absent.is_empty() || rng.gen_bool(0.5));
            if delete {
                let at = rng.gen_range(0..em.present.len());
                let e = em.present.swap_remove(at);
                let (u, v) = e.endpoints();
                em.change(&mut rng, EdgeChange::delete(u, v).unwrap());
            } else if !absent.is_empty() {
                let e = absent[rng.gen_range(0..absent.len())];
                let (u, v) = e.endpoints();
                em.insert(&mut rng, u.0, v.0);
            } else {
                break 'outer; // no edges at all to churn
            }
        }
    }
    let mut script = em.script;
    if let Some(m) = max_ops {
        script.ops.truncate(m);
    }
    Ok(script)
}
