//! Browser bindings for a few small experiments. Every export takes plain
//! values and returns a JSON string; failures come back as `{"error": ...}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use locdec::graph::{BoundFunction, GraphView};
use locdec::local::run_decider;
use locdec::table::gadget::build_g;
use locdec::tree::{build_t, enumerate_small_instances, family_summary, TreeChecker};
use locdec::turing::{fixtures, run, RunOutcome, TuringMachine};

fn machine(spec: &str) -> Result<TuringMachine, String> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        TuringMachine::from_json(spec).map_err(|e| e.to_string())
    } else {
        fixtures::by_name(spec).ok_or_else(|| format!("unknown fixture `{spec}`"))
    }
}

fn respond(r: Result<Value, String>) -> String {
    r.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

pub fn run_machine_json(spec: &str, budget: u64) -> Result<Value, String> {
    let m = machine(spec)?;
    Ok(match run(&m, budget).map_err(|e| e.to_string())? {
        RunOutcome::Halted { output, steps } => json!({ "machine": m.name(), "status": "halted", "output": output, "steps": steps }),
        RunOutcome::Running { steps } => json!({ "machine": m.name(), "status": "running", "steps": steps }),
    })
}

pub fn tree_family_json(r: u32, f: &str) -> Result<Value, String> {
    let f: BoundFunction = f.parse().map_err(|e: locdec::Error| e.to_string())?;
    let summary = family_summary(r, f).map_err(|e| e.to_string())?;
    let checker = TreeChecker { f };
    let t = build_t(r, f).map_err(|e| e.to_string())?;
    let t_ok = run_decider(&checker, &t, None).map_err(|e| e.to_string())?.accepted();
    let mut h_ok = 0;
    let family = enumerate_small_instances(r, f).map_err(|e| e.to_string())?;
    for inst in &family {
        h_ok += usize::from(run_decider(&checker, &inst.graph, None).map_err(|e| e.to_string())?.accepted());
    }
    Ok(json!({ "summary": summary, "checker_accepts_t": t_ok, "checker_accepts_h": format!("{h_ok}/{}", family.len()) }))
}

pub fn table_gadget_json(spec: &str, r: u32) -> Result<Value, String> {
    let m = machine(spec)?;
    let g = build_g(&m, r).map_err(|e| e.to_string())?;
    Ok(json!({
        "machine": m.name(),
        "table_side": g.table().len(),
        "fragments": g.fragments().len(),
        "nodes": g.node_count(),
        "glue_edges": g.glue_endpoints().len(),
    }))
}

/// Runs a machine (fixture name or JSON spec) for at most `budget` steps.
#[wasm_bindgen]
pub fn run_machine(spec: &str, budget: u32) -> String {
    respond(run_machine_json(spec, budget as u64))
}

/// Tree family summary and the oblivious checker's verdicts.
#[wasm_bindgen]
pub fn tree_family(r: u32, f: &str) -> String {
    respond(tree_family_json(r, f))
}

/// Size of `G(M, r)` for a halting machine.
#[wasm_bindgen]
pub fn table_gadget(spec: &str, r: u32) -> String {
    respond(table_gadget_json(spec, r))
}
