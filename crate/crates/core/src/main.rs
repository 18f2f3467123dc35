use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dyntw::decompose::build_nice;
use dyntw::dp::{compute_tables, Plugin};
use dyntw::graph::DynamicGraph;
use dyntw::runner::{bench, run_script, RunConfig, RunMode};
use dyntw::script::{gen_partial_ktree, GenParams, Script, ScriptOp};

#[derive(Parser)]
#[command(
    name = "dyntw",
    about = "Dynamic 3-colourability / vertex cover / dominating set queries on bounded-treewidth graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a partial k-tree change script
    Gen(GenArgs),
    /// Execute a change script, one JSON record per line
    Run(RunArgs),
    /// Compare table work of the epoch engine against full recomputation
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Universe size
    #[arg(long)]
    n: u32,
    /// Treewidth bound of the construction
    #[arg(long)]
    k: usize,
    /// Probability of keeping each k-tree edge
    #[arg(long, default_value_t = 1.0)]
    keep_prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Chance of a deletion after each insertion
    #[arg(long, default_value_t = 0.0)]
    delete_prob: f64,
    /// Emit a query after this many changes (0 = never)
    #[arg(long, default_value_t = 0)]
    query_every: usize,
    /// Comma-separated properties to cycle through in queries
    #[arg(long, value_delimiter = ',', default_value = "threecol")]
    props: Vec<Plugin>,
    /// Truncate the script to this many lines, churning edges if needed
    #[arg(long)]
    steps: Option<usize>,
    /// Cap on distinct vertices touched by the construction
    #[arg(long)]
    max_vertices: Option<usize>,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct EngineArgs {
    /// Universe size
    #[arg(long)]
    n: u32,
    /// Width budget for the decomposition heuristic
    #[arg(long)]
    k_budget: usize,
    /// Epoch length factor: an epoch lasts ceil(factor * log2 n) changes
    #[arg(long, default_value_t = 1.0)]
    epoch_factor: f64,
    /// inline | background | full-recompute
    #[arg(long, default_value = "inline")]
    mode: RunMode,
    /// Generator seed echoed into derived artifacts; unused by the engine
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// Script file
    #[arg(long)]
    script: PathBuf,
    /// Check every query against the brute-force oracle
    #[arg(long)]
    verify: bool,
    /// Write JSON-lines records here instead of stdout
    #[arg(long)]
    json: Option<PathBuf>,
    /// Dump the final graph's nice tree decomposition to this file
    #[arg(long)]
    dump_td: Option<PathBuf>,
    /// Dump per-triangle table entry counts for the final graph
    #[arg(long)]
    dump_tables: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// Script file
    #[arg(long)]
    script: PathBuf,
    /// Write the JSON summary here instead of stdout
    #[arg(long)]
    json: Option<PathBuf>,
}

fn write_out(path: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}

fn final_graph(script: &Script, n: u32) -> Result<DynamicGraph, String> {
    let mut g = DynamicGraph::new(n);
    for op in &script.ops {
        if let ScriptOp::Change(c) = op {
            g.apply_change(*c).map_err(|e| e.to_string())?;
        }
    }
    Ok(g)
}

fn run_main() -> Result<(), String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen(args) => {
            let params = GenParams {
                n: args.n,
                k: args.k,
                keep_prob: args.keep_prob,
                seed: args.seed,
                delete_prob: args.delete_prob,
                query_every: args.query_every,
                properties: args.props,
                max_ops: args.steps,
                max_vertices: args.max_vertices,
            };
            let script = gen_partial_ktree(&params).map_err(|e| e.to_string())?;
            write_out(&args.out, &script.to_text()).map_err(|e| e.to_string())?;
            eprintln!(
                "generated {} ops ({} changes, {} queries)",
                script.ops.len(),
                script.change_count(),
                script.ops.len() - script.change_count()
            );
            Ok(())
        }
        Command::Run(args) => {
            let text = std::fs::read_to_string(&args.script).map_err(|e| e.to_string())?;
            let script = Script::parse(&text).map_err(|e| e.to_string())?;
            let cfg = RunConfig {
                n: args.engine.n,
                width_budget: args.engine.k_budget,
                epoch_factor: args.engine.epoch_factor,
                mode: args.engine.mode,
                verify: args.verify,
                check_handover: false,
            };
            let outcome = run_script(&script, &cfg).map_err(|e| e.to_string())?;
            write_out(&args.json, &outcome.to_jsonl()).map_err(|e| e.to_string())?;
            eprintln!(
                "{} steps ({} changes, {} queries), {} table units{}",
                outcome.totals.steps,
                outcome.totals.changes,
                outcome.totals.queries,
                outcome.totals.table_units_total,
                if cfg.verify {
                    ", all queries verified"
                } else {
                    ""
                }
            );
            if args.dump_td.is_some() || args.dump_tables.is_some() {
                let g = final_graph(&script, cfg.n)?;
                let ntd = build_nice(&g, cfg.width_budget).map_err(|e| e.to_string())?;
                if let Some(path) = &args.dump_td {
                    std::fs::write(path, ntd.td().dump()).map_err(|e| e.to_string())?;
                }
                if let Some(path) = &args.dump_tables {
                    let mut dump = String::new();
                    let mut props = script.queried_properties();
                    if props.is_empty() {
                        props.push(Plugin::ThreeCol);
                    }
                    for plugin in props {
                        let store = compute_tables(&g, &ntd, plugin);
                        for ((tri, pin), count) in store.entry_summary() {
                            dump.push_str(&format!(
                                "{} {} pin:{} entries:{}\n",
                                plugin,
                                tri,
                                pin.map_or("-".to_string(), |v| v.to_string()),
                                count
                            ));
                        }
                    }
                    std::fs::write(path, dump).map_err(|e| e.to_string())?;
                }
            }
            Ok(())
        }
        Command::Bench(args) => {
            let text = std::fs::read_to_string(&args.script).map_err(|e| e.to_string())?;
            let script = Script::parse(&text).map_err(|e| e.to_string())?;
            let cfg = RunConfig {
                n: args.engine.n,
                width_budget: args.engine.k_budget,
                epoch_factor: args.engine.epoch_factor,
                mode: args.engine.mode,
                verify: false,
                check_handover: false,
            };
            let summary = bench(&script, &cfg).map_err(|e| e.to_string())?;
            eprintln!("{}", summary.human());
            let json = serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?;
            write_out(&args.json, &format!("{}\n", json)).map_err(|e| e.to_string())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::FAILURE
        }
    }
}
