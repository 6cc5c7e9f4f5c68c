//! Deciders on table gadgets and the separation probe.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::ball::{LazyBall, LocalView};
use crate::error::{Error, Result};
use crate::graph::{GraphView, IdAssignment, Params};
use crate::local::{Coins, DeciderMode, LocalDecider, LocalOutput, PreparedDecider};
use crate::table::checker::{check_view, CHECK_HORIZON};
use crate::table::generator::{neighbourhood_generator, Branch};
use crate::turing::{run, RunOutcome, TuringMachine};

/// Remembers the furthest simulation of each machine so that many nodes
/// asking for budgets of the same machine share one run.
#[derive(Default)]
pub struct SimMemo {
    runs: Mutex<HashMap<Vec<u8>, RunOutcome>>,
}

impl SimMemo {
    /// Output of `m` if it halts within `budget` steps.
    pub fn halts_within(&self, m: &TuringMachine, budget: u64) -> Option<u8> {
        let known = self.runs.lock().unwrap().get(m.encoded()).copied();
        let outcome = match known {
            Some(RunOutcome::Halted { output, steps }) => return (steps <= budget).then_some(output),
            Some(RunOutcome::Running { steps }) if steps >= budget => return None,
            Some(RunOutcome::Running { steps }) => {
                let o = run(m, budget.max(steps.saturating_mul(2))).ok()?;
                self.runs.lock().unwrap().insert(m.encoded().to_vec(), o);
                o
            }
            None => {
                let o = run(m, budget).ok()?;
                self.runs.lock().unwrap().insert(m.encoded().to_vec(), o);
                o
            }
        };
        match outcome {
            RunOutcome::Halted { output, steps } if steps <= budget => Some(output),
            _ => None,
        }
    }
}

fn machine_of(view: &dyn LocalView) -> Option<Arc<TuringMachine>> {
    view.label(0).params.machine().cloned()
}

/// `4^l`, saturating.
pub fn coin_budget(tosses: u32) -> u64 {
    if tosses >= 32 {
        u64::MAX
    } else {
        1u64 << (2 * tosses)
    }
}

fn stage_two(memo: &SimMemo, m: &TuringMachine, budget: u64) -> LocalOutput {
    match memo.halts_within(m, budget) {
        Some(out) if out != 0 => LocalOutput::No,
        _ => LocalOutput::Yes,
    }
}

/// Stage-one results cached per instance; stage two runs per call.
struct Staged<'a, F: Fn(usize, Option<&IdAssignment>, &mut Coins) -> u64 + Sync> {
    g: &'a dyn GraphView,
    stage_one: Vec<OnceLock<Option<Arc<TuringMachine>>>>,
    memo: &'a SimMemo,
    budget: F,
}

impl<F: Fn(usize, Option<&IdAssignment>, &mut Coins) -> u64 + Sync> PreparedDecider for Staged<'_, F> {
    fn output(&self, v: usize, ids: Option<&IdAssignment>, coins: &mut Coins) -> LocalOutput {
        let machine = self.stage_one[v].get_or_init(|| {
            let view = LazyBall::new(self.g, None, v, CHECK_HORIZON);
            if check_view(&view) {
                machine_of(&view)
            } else {
                None
            }
        });
        match machine {
            None => LocalOutput::No,
            Some(m) => stage_two(self.memo, m, (self.budget)(v, ids, coins)),
        }
    }
}

fn id_budget(view: &dyn LocalView) -> u64 {
    view.id(0).and_then(|i| i.to_u64()).unwrap_or(u64::MAX)
}

fn assigned_budget(v: usize, ids: Option<&IdAssignment>) -> u64 {
    ids.and_then(|a| a.get(v).to_u64()).unwrap_or(u64::MAX)
}

/// Structure check, then simulate the machine for as many steps as the
/// node's identifier; reject on a non-zero output.
#[derive(Default)]
pub struct TableLd {
    memo: SimMemo,
}

impl LocalDecider for TableLd {
    fn name(&self) -> String {
        "table-ld".into()
    }

    fn horizon(&self) -> usize {
        CHECK_HORIZON
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::UsesIds
    }

    fn decide(&self, view: &dyn LocalView, _coins: &mut Coins) -> LocalOutput {
        match machine_of(view) {
            Some(m) if check_view(view) => stage_two(&self.memo, &m, id_budget(view)),
            _ => LocalOutput::No,
        }
    }

    fn prepare<'a>(&'a self, g: &'a dyn GraphView) -> Option<Box<dyn PreparedDecider + 'a>> {
        Some(Box::new(Staged {
            g,
            stage_one: (0..g.node_count()).map(|_| OnceLock::new()).collect(),
            memo: &self.memo,
            budget: |v: usize, ids: Option<&IdAssignment>, _: &mut Coins| assigned_budget(v, ids),
        }))
    }
}

/// Structure check, then toss coins until the first head (`l` tosses) and
/// simulate for `4^l` steps; reject on a non-zero output.
#[derive(Default)]
pub struct TableRand {
    memo: SimMemo,
}

impl LocalDecider for TableRand {
    fn name(&self) -> String {
        "table-rand".into()
    }

    fn horizon(&self) -> usize {
        CHECK_HORIZON
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::Randomized
    }

    fn decide(&self, view: &dyn LocalView, coins: &mut Coins) -> LocalOutput {
        match machine_of(view) {
            Some(m) if check_view(view) => stage_two(&self.memo, &m, coin_budget(coins.tosses_until_head())),
            _ => LocalOutput::No,
        }
    }

    fn prepare<'a>(&'a self, g: &'a dyn GraphView) -> Option<Box<dyn PreparedDecider + 'a>> {
        Some(Box::new(Staged {
            g,
            stage_one: (0..g.node_count()).map(|_| OnceLock::new()).collect(),
            memo: &self.memo,
            budget: |_: usize, _: Option<&IdAssignment>, coins: &mut Coins| coin_budget(coins.tosses_until_head()),
        }))
    }
}

/// Reads the machine from the parameter block and simulates it for a fixed
/// budget; rejects on a non-zero output. No structure check.
pub struct BudgetSim {
    pub budget: u64,
    memo: SimMemo,
}

impl BudgetSim {
    pub fn new(budget: u64) -> Self {
        BudgetSim { budget, memo: SimMemo::default() }
    }
}

impl LocalDecider for BudgetSim {
    fn name(&self) -> String {
        format!("budget-sim:{}", self.budget)
    }

    fn horizon(&self) -> usize {
        0
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::Oblivious
    }

    fn decide(&self, view: &dyn LocalView, _coins: &mut Coins) -> LocalOutput {
        match machine_of(view) {
            Some(m) => stage_two(&self.memo, &m, self.budget),
            None => LocalOutput::Yes,
        }
    }
}

/// Rejects when its own cell or a neighbouring cell shows a head in the
/// `halt1` state.
#[derive(Clone, Copy, Debug, Default)]
pub struct Halt1Spotter;

impl LocalDecider for Halt1Spotter {
    fn name(&self) -> String {
        "halt1-spotter".into()
    }

    fn horizon(&self) -> usize {
        1
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::Oblivious
    }

    fn decide(&self, view: &dyn LocalView, _coins: &mut Coins) -> LocalOutput {
        let Some(m) = machine_of(view) else { return LocalOutput::Yes };
        let halt1 = |h: usize| {
            matches!(view.label(h).role.cell().and_then(|c| c.head), Some(hd) if hd.state == m.halt1())
        };
        let mut seen = halt1(0);
        if !seen && view.radius() >= 1 {
            seen = view.neighbours(0).into_iter().any(halt1);
        }
        LocalOutput::from_bool(!seen)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub decider: String,
    pub machine: String,
    pub t: usize,
    pub branch: Branch,
    pub classes: usize,
    pub accepted: bool,
    /// Hex class of the first rejecting representative.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Runs an oblivious decider on one representative of every class produced
/// by the generator for `(n, t)`; accepts iff all say yes.
pub fn separation_probe(d: &dyn LocalDecider, n: &TuringMachine, t: usize) -> Result<ProbeReport> {
    if d.mode() == DeciderMode::UsesIds {
        return Err(Error::Input(format!("decider `{}` reads identifiers", d.name())));
    }
    if t == 0 || d.horizon() > t {
        return Err(Error::Input(format!("probe radius {t} must be positive and cover horizon {}", d.horizon())));
    }
    let gen = neighbourhood_generator(n, t as u32)?;
    let mut witness = None;
    for (class, ball) in &gen.classes {
        let mut coins = Coins::new(0, 0, 0);
        if d.decide(ball, &mut coins).is_no() {
            witness = Some(class.to_hex());
            break;
        }
    }
    Ok(ProbeReport {
        decider: d.name(),
        machine: n.name().to_string(),
        t,
        branch: gen.branch,
        classes: gen.classes.len(),
        accepted: witness.is_none(),
        witness,
    })
}

/// The parameter block's machine, if the graph carries one.
pub fn graph_machine(g: &dyn GraphView) -> Option<Arc<TuringMachine>> {
    match g.label(0).params {
        Params::Table { machine, .. } | Params::Machine { machine } => Some(machine),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deciders::AlwaysYes;
    use crate::graph::{random_id_assignment, BoundFunction};
    use crate::local::{run_decider, run_decider_seeded};
    use crate::table::gadget::build_g;
    use crate::turing::fixtures;

    #[test]
    fn coin_budget_examples() {
        assert_eq!(coin_budget(3), 64);
        assert_eq!(coin_budget(1), 4);
        assert_eq!(coin_budget(40), u64::MAX);
    }

    #[test]
    fn memo_extends_runs() {
        let memo = SimMemo::default();
        let m = fixtures::counter(5, 1);
        assert_eq!(memo.halts_within(&m, 3), None);
        assert_eq!(memo.halts_within(&m, 5), Some(1));
        assert_eq!(memo.halts_within(&m, 4), None);
        assert_eq!(memo.halts_within(&fixtures::looping(), 100), None);
    }

    #[test]
    fn table_ld_on_both_fixtures() {
        let d = TableLd::default();
        let g0 = build_g(&fixtures::halt0(), 1).unwrap();
        let ids = random_id_assignment(g0.node_count(), BoundFunction::Double, 3).unwrap();
        assert!(run_decider(&d, &g0, Some(&ids)).unwrap().accepted());
        let g1 = build_g(&fixtures::counter(2, 1), 1).unwrap();
        let ids = random_id_assignment(g1.node_count(), BoundFunction::Linear, 3).unwrap();
        let v = run_decider(&d, &g1, Some(&ids)).unwrap();
        assert!(!v.accepted());
    }

    #[test]
    fn randomized_decider_is_one_sided_on_halt0() {
        let d = TableRand::default();
        let g0 = build_g(&fixtures::halt0(), 1).unwrap();
        for trial in 0..3 {
            assert!(run_decider_seeded(&d, &g0, None, 9, trial).unwrap().accepted());
        }
    }

    #[test]
    fn probes() {
        let yes = separation_probe(&AlwaysYes, &fixtures::looping(), 1).unwrap();
        assert!(yes.accepted);
        let d = BudgetSim::new(1 << 10);
        assert!(separation_probe(&d, &fixtures::halt0(), 1).unwrap().accepted);
        let r = separation_probe(&d, &fixtures::halt1(), 1).unwrap();
        assert!(!r.accepted && r.witness.is_some());
        // fragments carry stationary halt1 heads whatever the machine outputs
        assert!(!separation_probe(&Halt1Spotter, &fixtures::halt0(), 1).unwrap().accepted);
        assert!(!separation_probe(&Halt1Spotter, &fixtures::halt1(), 1).unwrap().accepted);
    }
}
