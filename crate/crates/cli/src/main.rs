mod report;
mod suites;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Value};

use locdec::canon::{compare_equal, compare_subset, neighbourhood_multiset, ClassFile, ClassMode, Comparison};
use locdec::graph::{random_id_assignment, BoundFunction, GraphView, IdAssignment, LabelledGraph, Params};
use locdec::local::{run_decider_seeded, DeciderMode, LocalDecider};
use locdec::registry::decider_by_name;
use locdec::table::checker::StructureChecker;
use locdec::table::deciders::separation_probe;
use locdec::table::gadget::build_g;
use locdec::table::generator::neighbourhood_generator;
use locdec::tree::{build_t, enumerate_small_instances, family_summary, TreeChecker};
use locdec::turing::{fixtures, run, RunOutcome, TuringMachine};

use report::{usage, CliResult, Outcome, Report};
use suites::{run_suite, SuiteOptions, SUITES};

/// Local decision experiments: gadgets, checkers, deciders and class sets.
///
/// Exit codes: 0 pass, 1 a claim failed, 2 usage or input error.
/// Resource caps: LOCDEC_MAX_NODES, LOCDEC_MAX_FRAGMENTS.
#[derive(Parser, Debug)]
#[command(name = "locdec", version)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a gadget graph.
    #[command(subcommand)]
    Gadget(GadgetCommand),
    /// Run a machine from the blank tape.
    Run {
        #[arg(long)]
        machine: String,
        #[arg(long, default_value_t = 1000)]
        budget: u64,
    },
    /// Neighbourhood classes of G(N, r) computed without a halting oracle.
    #[command(name = "gen-B")]
    GenB {
        #[arg(long)]
        machine: String,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radius-t class multiset of one or more graphs (summed).
    Classes {
        #[arg(long = "graph", required = true)]
        graphs: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        t: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the structural checker matching the graph's parameters.
    Check {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Run a named decider on a graph.
    Decide(DecideArgs),
    /// Run an oblivious decider on every class B emits for (machine, t).
    Probe {
        #[arg(long)]
        decider: String,
        #[arg(long)]
        machine: String,
        #[arg(long, default_value_t = 1)]
        t: usize,
        #[arg(long, value_enum)]
        expect: Option<Expect>,
    },
    /// Compare two class files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = CompareMode::Equal)]
        mode: CompareMode,
    },
    /// Run a named suite.
    Suite {
        name: String,
        /// Machine path or fixture name; repeatable.
        #[arg(long = "machine")]
        machines: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 60)]
        per_kind: usize,
    },
    /// Graphviz rendering of a graph file.
    ExportDot {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List deciders, suites and fixture machines.
    List,
}

#[derive(Subcommand, Debug, serde::Serialize)]
#[serde(tag = "gadget", rename_all = "kebab-case")]
enum GadgetCommand {
    /// The large layered tree T_r.
    Tree {
        #[arg(long)]
        r: u32,
        #[arg(long, default_value = "n")]
        f: BoundFunction,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The small instances H_r, one file per member.
    TreeFamily {
        #[arg(long)]
        r: u32,
        #[arg(long, default_value = "n")]
        f: BoundFunction,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// G(M, r) for a halting machine.
    Table {
        #[arg(long)]
        machine: String,
        #[arg(long, default_value_t = 1)]
        r: u32,
        /// Write the full graph, not just its summary.
        #[arg(long)]
        materialize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct DecideArgs {
    /// Decider name, e.g. table-ld, table-rand, tree-P:n.
    #[arg(long)]
    algo: String,
    #[arg(long)]
    graph: PathBuf,
    /// `seed` for a random bounded assignment, `none`, or a JSON file of integers.
    #[arg(long, default_value = "seed")]
    ids: String,
    /// Identifier bound for seeded assignments when the decider declares none.
    #[arg(long, default_value = "n")]
    f: BoundFunction,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long, value_enum)]
    expect: Option<Expect>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
enum Expect {
    Accept,
    Reject,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
enum CompareMode {
    Subset,
    Equal,
}

/// A machine file, or a fixture name such as `HALT0` or `COUNT2`.
fn load_machine(spec: &str) -> CliResult<TuringMachine> {
    if Path::new(spec).exists() {
        return Ok(TuringMachine::load(spec)?);
    }
    fixtures::by_name(spec).ok_or_else(|| usage(format!("`{spec}` is neither a machine file nor a fixture name")))
}

fn load_graph(path: &Path) -> CliResult<LabelledGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(LabelledGraph::from_json_str(&text)?)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    std::fs::write(path, serde_json::to_string(value)? + "\n")?;
    Ok(())
}

fn expectation(expect: Option<Expect>, accepted: bool) -> Option<bool> {
    expect.map(|e| (e == Expect::Accept) == accepted)
}

fn gadget(cmd: &GadgetCommand) -> CliResult<Outcome> {
    match cmd {
        GadgetCommand::Tree { r, f, out } => {
            let g = build_t(*r, *f)?;
            if let Some(p) = out {
                write_json(p, &g.to_json())?;
            }
            Outcome::info(json!({ "nodes": g.node_count(), "edges": g.edges().len(), "out": out }))
        }
        GadgetCommand::TreeFamily { r, f, out_dir } => {
            let summary = family_summary(*r, *f)?;
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(dir)?;
                for inst in enumerate_small_instances(*r, *f)? {
                    let (x, y) = inst.root;
                    write_json(&dir.join(format!("h_{y}_{x}.json")), &inst.graph.to_json())?;
                }
            }
            Outcome::info(summary)
        }
        GadgetCommand::Table { machine, r, materialize, out } => {
            let m = load_machine(machine)?;
            let g = build_g(&m, *r)?;
            if let Some(p) = out {
                if !materialize {
                    return Err(usage("--out needs --materialize"));
                }
                write_json(p, &g.materialize()?.to_json())?;
            }
            Outcome::info(json!({
                "machine": m.name(),
                "r": r,
                "table_side": g.table().len(),
                "fragments": g.fragments().len(),
                "nodes": g.node_count(),
                "glue_edges": g.glue_endpoints().len(),
                "out": out,
            }))
        }
    }
}

fn check(path: &Path) -> CliResult<Outcome> {
    let g = load_graph(path)?;
    let d: Box<dyn LocalDecider> = match g.common_params() {
        Some(Params::Tree { r: _ }) => Box::new(TreeChecker { f: BoundFunction::Linear }),
        Some(Params::Table { .. }) => Box::new(StructureChecker),
        _ => return Err(usage("graph carries neither tree nor table parameters")),
    };
    let v = run_decider_seeded(d.as_ref(), &g, None, 0, 0)?;
    let accepted = v.accepted();
    Outcome::claim(json!({ "checker": d.name(), "answer": v.answer, "rejecting_nodes": v.rejecting_nodes }), accepted)
}

fn assignment(args: &DecideArgs, d: &dyn LocalDecider, n: usize, seed: u64) -> CliResult<Option<IdAssignment>> {
    match args.ids.as_str() {
        "none" => Ok(None),
        "seed" if d.mode() == DeciderMode::UsesIds || d.bound().is_some() => {
            Ok(Some(random_id_assignment(n, d.bound().unwrap_or(args.f), seed)?))
        }
        "seed" => Ok(None),
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}")))?;
            let ids: Vec<BigUint> = serde_json::from_str(&text)?;
            Ok(Some(IdAssignment::new(ids, d.bound())?))
        }
    }
}

fn decide(args: &DecideArgs, seed: u64) -> CliResult<Outcome> {
    let d = decider_by_name(&args.algo)?;
    let g = load_graph(&args.graph)?;
    let ids = assignment(args, d.as_ref(), g.node_count(), seed)?;
    let v = run_decider_seeded(d.as_ref(), &g, ids.as_ref(), seed, args.trial)?;
    let accepted = v.accepted();
    let result = json!({
        "decider": d.name(),
        "answer": v.answer,
        "rejecting_nodes": v.rejecting_nodes,
        "off_promise_nodes": v.off_promise_nodes,
        "per_node": v.per_node,
    });
    match expectation(args.expect, accepted) {
        Some(pass) => Outcome::claim(result, pass),
        None => Outcome::info(result),
    }
}

fn classes(paths: &[PathBuf], t: usize, out: Option<&Path>) -> CliResult<Outcome> {
    let mut total = BTreeMap::new();
    for p in paths {
        let g = load_graph(p)?;
        for (c, k) in neighbourhood_multiset(&g, None, t, ClassMode::Oblivious) {
            *total.entry(c).or_insert(0) += k;
        }
    }
    let file = ClassFile::from_multiset(ClassMode::Oblivious, t, &total);
    if let Some(p) = out {
        write_json(p, &file)?;
    }
    Outcome::info(json!({ "graphs": paths.len(), "classes": total.len(), "nodes": total.values().sum::<usize>(), "out": out }))
}

fn compare(a: &Path, b: &Path, mode: CompareMode) -> CliResult<Outcome> {
    let read = |p: &Path| -> CliResult<ClassFile> {
        let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))
    };
    let (fa, fb) = (read(a)?, read(b)?);
    let (ma, mb) = (fa.to_multiset(), fb.to_multiset());
    let cmp = match mode {
        CompareMode::Subset => compare_subset(&ma, &mb),
        CompareMode::Equal => compare_equal(&ma, &mb),
    };
    let (holds, witness) = match &cmp {
        Comparison::Holds => (true, Value::Null),
        Comparison::MissingFromRight(c) => (false, json!({ "missing_from": "b", "class": c.to_hex() })),
        Comparison::MissingFromLeft(c) => (false, json!({ "missing_from": "a", "class": c.to_hex() })),
    };
    Outcome::claim(json!({ "mode": mode, "a_classes": ma.len(), "b_classes": mb.len(), "witness": witness }), holds)
}

fn execute(cli: &Cli) -> CliResult<(String, Value, Outcome)> {
    let seed = cli.seed;
    let (name, config, outcome) = match &cli.command {
        Command::Gadget(g) => ("gadget", serde_json::to_value(g)?, gadget(g)?),
        Command::Run { machine, budget } => {
            let m = load_machine(machine)?;
            let o = match run(&m, *budget)? {
                RunOutcome::Halted { output, steps } => json!({ "status": "halted", "output": output, "steps": steps }),
                RunOutcome::Running { steps } => json!({ "status": "running", "steps": steps }),
            };
            ("run", json!({ "machine": m.name(), "budget": budget }), Outcome::info(o)?)
        }
        Command::GenB { machine, r, out } => {
            let m = load_machine(machine)?;
            let gen = neighbourhood_generator(&m, *r)?;
            let set = gen.class_set();
            if let Some(p) = out {
                write_json(p, &ClassFile::from_set(ClassMode::Oblivious, gen.radius, &set))?;
            }
            let o = Outcome::info(json!({ "branch": gen.branch, "classes": set.len(), "out": out }))?;
            ("gen-B", json!({ "machine": m.name(), "r": r }), o)
        }
        Command::Classes { graphs, t, out } => {
            ("classes", json!({ "graphs": graphs, "t": t }), classes(graphs, *t, out.as_deref())?)
        }
        Command::Check { graph } => ("check", json!({ "graph": graph }), check(graph)?),
        Command::Decide(args) => {
            let config = json!({
                "algo": args.algo, "graph": args.graph, "ids": args.ids, "f": args.f.to_string(),
                "seed": seed, "trial": args.trial, "expect": args.expect,
            });
            ("decide", config, decide(args, seed)?)
        }
        Command::Probe { decider, machine, t, expect } => {
            let d = decider_by_name(decider)?;
            let m = load_machine(machine)?;
            let p = separation_probe(d.as_ref(), &m, *t)?;
            let pass = expectation(*expect, p.accepted);
            let config = json!({ "decider": decider, "machine": m.name(), "t": t, "expect": expect });
            ("probe", config, Outcome { result: serde_json::to_value(&p)?, pass })
        }
        Command::Compare { a, b, mode } => ("compare", json!({ "a": a, "b": b, "mode": mode }), compare(a, b, *mode)?),
        Command::Suite { name, machines, trials, per_kind } => {
            let opts = SuiteOptions {
                machines: machines.iter().map(|m| load_machine(m)).collect::<CliResult<_>>()?,
                trials: *trials,
                per_kind: *per_kind,
                seed,
            };
            let config = json!({ "suite": name, "machines": machines, "trials": trials, "per_kind": per_kind, "seed": seed });
            ("suite", config, run_suite(name, &opts)?)
        }
        Command::ExportDot { graph, out } => {
            let g = load_graph(graph)?;
            let dot = g.to_dot();
            match out {
                Some(p) => std::fs::write(p, &dot)?,
                None => {
                    let _ = std::io::Write::write_all(&mut std::io::stdout(), dot.as_bytes());
                    std::process::exit(0);
                }
            }
            ("export-dot", json!({ "graph": graph, "out": out }), Outcome::info(json!({ "nodes": g.node_count() }))?)
        }
        Command::List => {
            let o = json!({
                "deciders": locdec::registry::NAMES,
                "suites": SUITES,
                "fixtures": ["HALT0", "HALT1", "LOOP", "WALK1", "BB2", "COUNT<k>"],
            });
            ("list", Value::Null, Outcome::info(o)?)
        }
    };
    let mut config = config;
    if let Value::Object(map) = &mut config {
        map.entry("seed").or_insert(json!(seed));
    }
    Ok((name.to_string(), config, outcome))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let started = Instant::now();
    let (name, config, outcome) = match execute(&cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let pass = outcome.pass;
    let report = Report::new(&name, config, started, outcome);
    if let Err(e) = report.emit(cli.report.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match pass {
        Some(false) => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    }
}
