//! Named end-to-end suites for `locdec suite`.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};

use locdec::ball::Ball;
use locdec::canon::{neighbourhood_multiset, ClassMode};
use locdec::graph::{builders, random_id_assignment, BoundFunction, GraphView, LabelledGraph};
use locdec::local::{any_rejects, estimate_pq, prepare, run_decider, simulate_oblivious, Coins, LocalDecider};
use locdec::registry::decider_by_name;
use locdec::table::checker::check_graph;
use locdec::table::deciders::TableRand;
use locdec::table::gadget::{build_g, embed_table};
use locdec::table::generator::neighbourhood_generator;
use locdec::table::mutation::mutation_campaign;
use locdec::tree::{build_t, enumerate_small_instances, TreeChecker, TreeDecider};
use locdec::turing::{fixtures, TuringMachine};

use crate::report::{usage, CliResult, Outcome};

pub const SUITES: &[&str] = &[
    "tree-separation",
    "table-P1",
    "table-P2",
    "table-P3",
    "mutation",
    "randomized-decider",
    "astar-equivalence",
];

pub struct SuiteOptions {
    pub machines: Vec<TuringMachine>,
    pub trials: u64,
    pub per_kind: usize,
    pub seed: u64,
}

#[derive(Serialize)]
struct Check {
    name: String,
    pass: bool,
    detail: Value,
}

fn finish(checks: Vec<Check>) -> CliResult<Outcome> {
    let pass = checks.iter().all(|c| c.pass);
    Outcome::claim(json!({ "checks": checks }), pass)
}

pub fn run_suite(name: &str, opts: &SuiteOptions) -> CliResult<Outcome> {
    match name {
        "tree-separation" => tree_separation(opts.seed),
        "table-P1" => table_p1(opts),
        "table-P2" => table_p2(opts),
        "table-P3" => table_p3(opts),
        "mutation" => mutation(opts),
        "randomized-decider" => randomized(opts),
        "astar-equivalence" => astar(),
        _ => Err(usage(format!("unknown suite `{name}`; known: {}", SUITES.join(", ")))),
    }
}

/// The given machines, or the two halting fixtures.
fn machines_or_default(opts: &SuiteOptions) -> Vec<TuringMachine> {
    if opts.machines.is_empty() {
        vec![fixtures::halt0(), fixtures::counter(2, 1)]
    } else {
        opts.machines.clone()
    }
}

fn accepts_everywhere(d: &dyn LocalDecider, g: &dyn GraphView) -> bool {
    !any_rejects(prepare(d, g).as_ref(), g.node_count(), None, 0, 0)
}

fn tree_separation(seed: u64) -> CliResult<Outcome> {
    let f = BoundFunction::Linear;
    let mut checks = vec![];
    for r in 0..=1 {
        let t = build_t(r, f)?;
        let family = enumerate_small_instances(r, f)?;
        let checker = TreeChecker { f };
        let oblivious_ok = accepts_everywhere(&checker, &t) && family.iter().all(|i| accepts_everywhere(&checker, &i.graph));
        checks.push(Check {
            name: format!("checker accepts T_{r} and H_{r}"),
            pass: oblivious_ok,
            detail: json!({ "instances": family.len() + 1 }),
        });
        let d = TreeDecider { f };
        let mut wrong = 0;
        for s in 0..10 {
            let ids = random_id_assignment(t.node_count(), f, seed + s)?;
            wrong += usize::from(run_decider(&d, &t, Some(&ids))?.accepted());
            for inst in &family {
                let ids = random_id_assignment(inst.graph.node_count(), f, seed + s)?;
                wrong += usize::from(!run_decider(&d, &inst.graph, Some(&ids))?.accepted());
            }
        }
        checks.push(Check {
            name: format!("decider separates T_{r} from H_{r}"),
            pass: wrong == 0,
            detail: json!({ "assignments": 10, "wrong_answers": wrong }),
        });
    }
    finish(checks)
}

fn table_p1(opts: &SuiteOptions) -> CliResult<Outcome> {
    let mut checks = vec![];
    for m in machines_or_default(opts) {
        let g = build_g(&m, 1)?.materialize()?;
        let image = embed_table(&m, &g)?;
        checks.push(Check {
            name: format!("table of {} embeds", m.name()),
            pass: image.is_some(),
            detail: json!({ "cells": image.map(|i| i.len()), "nodes": g.node_count() }),
        });
    }
    finish(checks)
}

fn table_p2(opts: &SuiteOptions) -> CliResult<Outcome> {
    let mut checks = vec![];
    for m in machines_or_default(opts) {
        let g = build_g(&m, 1)?;
        let bad = check_graph(&g);
        checks.push(Check {
            name: format!("structure check accepts G({}, 1)", m.name()),
            pass: bad.is_empty(),
            detail: json!({ "nodes": g.node_count(), "rejecting": bad.len(), "first": bad.first() }),
        });
    }
    finish(checks)
}

fn table_p3(opts: &SuiteOptions) -> CliResult<Outcome> {
    let machines = if opts.machines.is_empty() { vec![fixtures::halt0()] } else { opts.machines.clone() };
    let mut checks = vec![];
    for m in machines {
        let gen = neighbourhood_generator(&m, 1)?;
        let g = build_g(&m, 1)?;
        let want: BTreeSet<_> = neighbourhood_multiset(&g, None, 1, ClassMode::Oblivious).into_keys().collect();
        let got = gen.class_set();
        let witness = got.symmetric_difference(&want).next().map(|c| c.to_hex());
        checks.push(Check {
            name: format!("generator matches G({}, 1)", m.name()),
            pass: witness.is_none(),
            detail: json!({ "branch": gen.branch, "generated": got.len(), "gadget": want.len(), "witness": witness }),
        });
    }
    finish(checks)
}

fn mutation(opts: &SuiteOptions) -> CliResult<Outcome> {
    let m = opts.machines.first().cloned().unwrap_or_else(fixtures::halt0);
    let g = build_g(&m, 1)?.materialize()?;
    let outcomes = mutation_campaign(&g, opts.per_kind, opts.seed);
    let missed: Vec<_> = outcomes.iter().filter(|o| o.rejected_at.is_none()).collect();
    let check = Check {
        name: format!("single edits of G({}, 1) are rejected", m.name()),
        pass: missed.is_empty() && outcomes.len() >= 200,
        detail: json!({
            "mutations": outcomes.len(),
            "missed": missed.len(),
            "first_missed": missed.first().map(|o| &o.description),
            "max_nodes_checked": outcomes.iter().map(|o| o.nodes_checked).max(),
        }),
    };
    finish(vec![check])
}

fn randomized(opts: &SuiteOptions) -> CliResult<Outcome> {
    let d = TableRand::default();
    let yes = build_g(&fixtures::halt0(), 1)?;
    let no = build_g(&fixtures::counter(2, 1), 1)?;
    let est = estimate_pq(&d, &[&yes], &[&no], opts.trials, opts.seed)?;
    let n = no.node_count() as f64;
    let q = 1.0 - (1.0 - 1.0 / n.sqrt()).powf(n);
    let threshold = q - 3.0 * est.q_sigma(q);
    let check = Check {
        name: "table-rand is one-sided and rejects the no-instance".into(),
        pass: est.p_hat == 1.0 && est.q_hat >= threshold,
        detail: json!({ "estimate": est, "q_bound": q, "q_threshold": threshold }),
    };
    finish(vec![check])
}

fn injections(k: usize, u: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u64>| (0..u).filter(|x| !p.contains(x)).map(|x| [p.as_slice(), &[x]].concat()).collect::<Vec<_>>())
            .collect();
    }
    out
}

fn astar() -> CliResult<Outcome> {
    let universe = 7u64;
    let mut graphs: Vec<LabelledGraph> = vec![];
    for n in 2..=5 {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        graphs.push(builders::opaque(&vec![1; n], &edges)?);
    }
    graphs.push(builders::opaque(&[0, 1, 2, 3], &[(0, 1), (1, 2), (2, 3), (3, 0)])?);
    let mut checks = vec![];
    for name in ["id-threshold:5", "id-parity", "nbr-sum:9"] {
        let inner = decider_by_name(name)?;
        let sim = simulate_oblivious(Arc::clone(&inner), (0..universe).map(BigUint::from).collect());
        let mut disagreements = 0;
        for g in &graphs {
            let n = g.node_count();
            let balls: Vec<Ball> = (0..n).map(|v| Ball::extract(g, None, v, inner.horizon())).collect::<Result<_, _>>()?;
            let mut no = vec![false; n];
            for ids in injections(n, universe) {
                for (v, b) in balls.iter().enumerate() {
                    if !no[v] {
                        let local = b.origin().iter().map(|&u| BigUint::from(ids[u])).collect();
                        no[v] = inner.decide(&b.with_ids(Some(local)), &mut Coins::new(0, 0, 0)).is_no();
                    }
                }
            }
            let got = run_decider(&sim, g, None)?;
            disagreements += (0..n).filter(|&v| got.per_node[v].is_no() != no[v]).count();
        }
        checks.push(Check {
            name: format!("oblivious simulation of {name} matches brute force"),
            pass: disagreements == 0,
            detail: json!({ "graphs": graphs.len(), "universe": universe, "disagreements": disagreements }),
        });
    }
    finish(checks)
}
