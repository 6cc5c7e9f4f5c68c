//! Local deciders: evaluation, verdicts, the obliviousness audit, the
//! finite-universe oblivious simulation and Monte-Carlo (p, q) estimation.

use std::sync::Arc;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{Ball, LazyBall, LocalView};
use crate::error::{Error, Result};
use crate::graph::{random_id_assignment, BoundFunction, GraphView, IdAssignment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeciderMode {
    UsesIds,
    Oblivious,
    Randomized,
}

/// Per-node output. `OffPromise` marks inputs outside the decider's promise;
/// it counts as acceptance but is reported separately.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalOutput {
    Yes,
    No,
    OffPromise,
}

impl LocalOutput {
    pub fn from_bool(yes: bool) -> Self {
        if yes {
            LocalOutput::Yes
        } else {
            LocalOutput::No
        }
    }

    pub fn is_no(self) -> bool {
        self == LocalOutput::No
    }
}

/// Per-node fair coins, derived from (seed, node, trial) by a counter hash.
#[derive(Clone, Debug)]
pub struct Coins {
    key: u64,
    counter: u64,
    word: u64,
    left: u32,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl Coins {
    pub fn new(seed: u64, node: u64, trial: u64) -> Self {
        let key = splitmix64(splitmix64(seed ^ 0x5151_5151) ^ splitmix64(node.wrapping_mul(0x2545_f491_4f6c_dd1d)))
            ^ splitmix64(trial.wrapping_add(0x1234_5678_9abc_def0));
        Coins { key, counter: 0, word: 0, left: 0 }
    }

    pub fn bit(&mut self) -> bool {
        if self.left == 0 {
            self.word = splitmix64(self.key ^ splitmix64(self.counter));
            self.counter += 1;
            self.left = 64;
        }
        let b = self.word & 1 == 1;
        self.word >>= 1;
        self.left -= 1;
        b
    }

    /// Number of tosses up to and including the first head.
    pub fn tosses_until_head(&mut self) -> u32 {
        let mut n = 1;
        while !self.bit() {
            n += 1;
        }
        n
    }
}

pub trait LocalDecider: Send + Sync {
    fn name(&self) -> String;

    fn horizon(&self) -> usize;

    fn mode(&self) -> DeciderMode;

    /// Identifier bound the decider relies on, if any.
    fn bound(&self) -> Option<BoundFunction> {
        None
    }

    fn decide(&self, view: &dyn LocalView, coins: &mut Coins) -> LocalOutput;

    /// Instance-level preconditions beyond the id bound.
    fn validate(&self, _g: &dyn GraphView) -> Result<()> {
        Ok(())
    }

    /// Optional per-instance precomputation (e.g. caching a coin- and
    /// id-independent stage). `None` means evaluate balls directly.
    fn prepare<'a>(&'a self, _g: &'a dyn GraphView) -> Option<Box<dyn PreparedDecider + 'a>> {
        None
    }
}

/// A decider bound to one instance.
pub trait PreparedDecider: Sync {
    fn output(&self, v: usize, ids: Option<&IdAssignment>, coins: &mut Coins) -> LocalOutput;
}

struct Direct<'a> {
    d: &'a dyn LocalDecider,
    g: &'a dyn GraphView,
}

impl PreparedDecider for Direct<'_> {
    fn output(&self, v: usize, ids: Option<&IdAssignment>, coins: &mut Coins) -> LocalOutput {
        let view = LazyBall::new(self.g, ids, v, self.d.horizon());
        self.d.decide(&view, coins)
    }
}

pub fn prepare<'a>(d: &'a dyn LocalDecider, g: &'a dyn GraphView) -> Box<dyn PreparedDecider + 'a> {
    d.prepare(g).unwrap_or_else(|| Box::new(Direct { d, g }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Answer {
    Accept,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub answer: Answer,
    pub rejecting_nodes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub off_promise_nodes: Vec<usize>,
    pub per_node: Vec<LocalOutput>,
}

impl Verdict {
    pub fn from_outputs(per_node: Vec<LocalOutput>) -> Self {
        let rejecting_nodes: Vec<usize> = (0..per_node.len()).filter(|&v| per_node[v].is_no()).collect();
        let off_promise_nodes = (0..per_node.len()).filter(|&v| per_node[v] == LocalOutput::OffPromise).collect();
        let answer = if rejecting_nodes.is_empty() { Answer::Accept } else { Answer::Reject };
        Verdict { answer, rejecting_nodes, off_promise_nodes, per_node }
    }

    pub fn accepted(&self) -> bool {
        self.answer == Answer::Accept
    }
}

fn check_ids(d: &dyn LocalDecider, g: &dyn GraphView, ids: Option<&IdAssignment>) -> Result<()> {
    if let Some(a) = ids {
        if a.len() != g.node_count() {
            return Err(Error::Input(format!("{} identifiers for {} nodes", a.len(), g.node_count())));
        }
    }
    if let Some(f) = d.bound() {
        match ids {
            Some(a) => a.check_bound(f)?,
            None => return Err(Error::Input(format!("decider `{}` needs identifiers", d.name()))),
        }
    }
    if d.mode() == DeciderMode::UsesIds && ids.is_none() {
        return Err(Error::Input(format!("decider `{}` needs identifiers", d.name())));
    }
    d.validate(g)
}

/// Evaluates every node on its radius-`t` ball; accept iff all say yes.
pub fn run_decider(d: &dyn LocalDecider, g: &dyn GraphView, ids: Option<&IdAssignment>) -> Result<Verdict> {
    run_decider_seeded(d, g, ids, 0, 0)
}

pub fn run_decider_seeded(
    d: &dyn LocalDecider,
    g: &dyn GraphView,
    ids: Option<&IdAssignment>,
    seed: u64,
    trial: u64,
) -> Result<Verdict> {
    check_ids(d, g, ids)?;
    let p = prepare(d, g);
    Ok(run_prepared(p.as_ref(), g.node_count(), ids, seed, trial))
}

pub fn run_prepared(
    p: &dyn PreparedDecider,
    n: usize,
    ids: Option<&IdAssignment>,
    seed: u64,
    trial: u64,
) -> Verdict {
    let outputs: Vec<LocalOutput> = (0..n)
        .into_par_iter()
        .map(|v| p.output(v, ids, &mut Coins::new(seed, v as u64, trial)))
        .collect();
    Verdict::from_outputs(outputs)
}

/// Whether any node rejects; stops at the first rejection.
pub fn any_rejects(p: &dyn PreparedDecider, n: usize, ids: Option<&IdAssignment>, seed: u64, trial: u64) -> bool {
    (0..n).any(|v| p.output(v, ids, &mut Coins::new(seed, v as u64, trial)).is_no())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuditResult {
    Ok { samples: usize },
    Violation { first: IdAssignment, second: IdAssignment, node: usize },
}

/// Samples bounded assignments and looks for two giving different per-node
/// outputs. Finding none is evidence, not proof.
pub fn audit_oblivious(
    d: &dyn LocalDecider,
    g: &dyn GraphView,
    id_bound: BoundFunction,
    samples: usize,
    seed: u64,
) -> Result<AuditResult> {
    let n = g.node_count();
    let p = prepare(d, g);
    let mut reference: Option<(IdAssignment, Vec<LocalOutput>)> = None;
    for s in 0..samples {
        let ids = random_id_assignment(n, id_bound, seed.wrapping_add(s as u64))?;
        let out = run_prepared(p.as_ref(), n, Some(&ids), seed, 0).per_node;
        match &reference {
            None => reference = Some((ids, out)),
            Some((first, ref_out)) => {
                if let Some(node) = (0..n).find(|&v| ref_out[v] != out[v]) {
                    return Ok(AuditResult::Violation { first: first.clone(), second: ids, node });
                }
            }
        }
    }
    Ok(AuditResult::Ok { samples })
}

/// The oblivious simulation over a finite identifier universe: a node says no
/// iff some injective assignment of universe ids to its ball makes the
/// wrapped decider say no.
pub struct ObliviousSimulation {
    inner: Arc<dyn LocalDecider>,
    universe: Vec<BigUint>,
}

pub fn simulate_oblivious(inner: Arc<dyn LocalDecider>, universe: Vec<BigUint>) -> ObliviousSimulation {
    let mut universe = universe;
    universe.sort();
    universe.dedup();
    ObliviousSimulation { inner, universe }
}

impl ObliviousSimulation {
    pub fn universe(&self) -> &[BigUint] {
        &self.universe
    }

    pub fn evaluate(&self, ball: &Ball) -> Result<LocalOutput> {
        let k = ball.len();
        if k > self.universe.len() {
            return Err(Error::Infeasible(format!(
                "ball of {k} nodes exceeds an identifier universe of {}",
                self.universe.len()
            )));
        }
        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        let mut used = vec![false; self.universe.len()];
        let mut off_promise = false;
        let found = self.search(ball, &mut chosen, &mut used, &mut off_promise);
        Ok(if found {
            LocalOutput::No
        } else if off_promise {
            LocalOutput::OffPromise
        } else {
            LocalOutput::Yes
        })
    }

    fn search(&self, ball: &Ball, chosen: &mut Vec<usize>, used: &mut [bool], off: &mut bool) -> bool {
        if chosen.len() == ball.len() {
            let ids = chosen.iter().map(|&i| self.universe[i].clone()).collect();
            let out = self.inner.decide(&ball.with_ids(Some(ids)), &mut Coins::new(0, 0, 0));
            *off |= out == LocalOutput::OffPromise;
            return out.is_no();
        }
        for i in 0..self.universe.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            chosen.push(i);
            let hit = self.search(ball, chosen, used, off);
            chosen.pop();
            used[i] = false;
            if hit {
                return true;
            }
        }
        false
    }
}

impl LocalDecider for ObliviousSimulation {
    fn name(&self) -> String {
        format!("oblivious({})", self.inner.name())
    }

    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::Oblivious
    }

    fn validate(&self, g: &dyn GraphView) -> Result<()> {
        for v in 0..g.node_count() {
            let b = Ball::extract(g, None, v, self.horizon())?;
            if b.len() > self.universe.len() {
                return Err(Error::Infeasible(format!(
                    "ball of node {v} has {} nodes, identifier universe has {}",
                    b.len(),
                    self.universe.len()
                )));
            }
        }
        Ok(())
    }

    fn decide(&self, view: &dyn LocalView, _coins: &mut Coins) -> LocalOutput {
        let ball = Ball::from_view(view).with_ids(None);
        self.evaluate(&ball).expect("ball fits the identifier universe")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PQEstimate {
    /// Fraction of yes-instance runs in which every node accepted.
    pub p_hat: f64,
    /// Fraction of no-instance runs in which some node rejected.
    pub q_hat: f64,
    pub yes_runs: u64,
    pub yes_accepted: u64,
    pub no_runs: u64,
    pub no_rejected: u64,
    pub trials: u64,
    pub seed: u64,
}

impl PQEstimate {
    /// Binomial standard deviation of `q_hat` around a true value `q`.
    pub fn q_sigma(&self, q: f64) -> f64 {
        (q * (1.0 - q) / self.no_runs.max(1) as f64).sqrt()
    }

    pub fn p_sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.yes_runs.max(1) as f64).sqrt()
    }
}

/// Monte-Carlo estimate of acceptance on yes-instances and rejection on
/// no-instances with fresh coins per trial.
pub fn estimate_pq(
    d: &dyn LocalDecider,
    yes_instances: &[&dyn GraphView],
    no_instances: &[&dyn GraphView],
    trials: u64,
    seed: u64,
) -> Result<PQEstimate> {
    if yes_instances.is_empty() && no_instances.is_empty() {
        return Err(Error::Input("no instances given".into()));
    }
    if trials == 0 {
        return Err(Error::Input("need at least one trial".into()));
    }
    let run = |instances: &[&dyn GraphView], tag: u64| -> Result<u64> {
        let mut rejected = 0;
        for (k, g) in instances.iter().enumerate() {
            d.validate(*g)?;
            let p = prepare(d, *g);
            let inst_seed = seed ^ (tag << 62) ^ ((k as u64) << 40);
            for t in 0..trials {
                if any_rejects(p.as_ref(), g.node_count(), None, inst_seed, t) {
                    rejected += 1;
                }
            }
        }
        Ok(rejected)
    };
    let yes_rej = run(yes_instances, 1)?;
    let no_rej = run(no_instances, 2)?;
    let yes_runs = trials * yes_instances.len() as u64;
    let no_runs = trials * no_instances.len() as u64;
    let ratio = |a: u64, b: u64| if b == 0 { f64::NAN } else { a as f64 / b as f64 };
    Ok(PQEstimate {
        p_hat: ratio(yes_runs - yes_rej, yes_runs),
        q_hat: ratio(no_rej, no_runs),
        yes_runs,
        yes_accepted: yes_runs - yes_rej,
        no_runs,
        no_rejected: no_rej,
        trials,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deciders::{AlwaysYes, CoinAtMarked, IdParity, IdThreshold, NeighbourSum, OpaqueOdd};
    use crate::graph::builders::{cycle, opaque, path};
    use crate::graph::NodeLabel;

    #[test]
    fn coins_are_reproducible_and_fair() {
        let mut a = Coins::new(1, 2, 3);
        let mut b = Coins::new(1, 2, 3);
        let xs: Vec<bool> = (0..200).map(|_| a.bit()).collect();
        let ys: Vec<bool> = (0..200).map(|_| b.bit()).collect();
        assert_eq!(xs, ys);
        let mut heads = 0;
        for node in 0..20000u64 {
            heads += u32::from(Coins::new(7, node, 0).bit());
        }
        assert!((heads as f64 - 10000.0).abs() < 4.0 * 70.8);
    }

    #[test]
    fn verdict_aggregation() {
        let g = path(3, NodeLabel::opaque(0));
        let v = run_decider(&AlwaysYes, &g, None).unwrap();
        assert!(v.accepted() && v.rejecting_nodes.is_empty());
        let d = IdThreshold { k: 10 };
        assert!(run_decider(&d, &g, Some(&IdAssignment::from_u64(&[0, 1, 2]).unwrap())).unwrap().accepted());
        let v = run_decider(&d, &g, Some(&IdAssignment::from_u64(&[0, 1, 11]).unwrap())).unwrap();
        assert_eq!(v.rejecting_nodes, vec![2]);
        assert!(run_decider(&d, &g, None).is_err());
    }

    #[test]
    fn adding_a_rejection_never_accepts() {
        let mut outs = vec![LocalOutput::Yes, LocalOutput::No, LocalOutput::OffPromise];
        assert!(!Verdict::from_outputs(outs.clone()).accepted());
        outs[0] = LocalOutput::No;
        assert!(!Verdict::from_outputs(outs).accepted());
    }

    #[test]
    fn audit_finds_parity_violations_but_not_label_readers() {
        let g = cycle(4, NodeLabel::opaque(3));
        assert!(matches!(
            audit_oblivious(&IdParity, &g, BoundFunction::Square, 10, 1).unwrap(),
            AuditResult::Violation { .. }
        ));
        let g = opaque(&[1, 2, 3, 4], &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(
            audit_oblivious(&OpaqueOdd, &g, BoundFunction::Square, 1000, 5).unwrap(),
            AuditResult::Ok { samples: 1000 }
        );
        assert_eq!(
            audit_oblivious(&AlwaysYes, &g, BoundFunction::Linear, 50, 5).unwrap(),
            AuditResult::Ok { samples: 50 }
        );
    }

    #[test]
    fn label_reader_is_oblivious_over_an_exhaustive_universe() {
        let g = opaque(&[1, 2, 3], &[(0, 1), (1, 2)]).unwrap();
        let universe: Vec<u64> = (0..5).collect();
        let mut outputs = std::collections::BTreeSet::new();
        for a in 0..5 {
            for b in 0..5 {
                for c in 0..5 {
                    if a == b || b == c || a == c {
                        continue;
                    }
                    let ids = IdAssignment::from_u64(&[universe[a], universe[b], universe[c]]).unwrap();
                    outputs.insert(run_decider(&OpaqueOdd, &g, Some(&ids)).unwrap().per_node);
                }
            }
        }
        assert_eq!(outputs.len(), 1);
    }

    fn universe(k: u64) -> Vec<BigUint> {
        (0..k).map(BigUint::from).collect()
    }

    #[test]
    fn simulation_of_an_id_free_decider_changes_nothing() {
        let g = opaque(&[1, 2, 3, 5], &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let sim = simulate_oblivious(Arc::new(OpaqueOdd), universe(6));
        assert_eq!(
            run_decider(&sim, &g, None).unwrap().per_node,
            run_decider(&OpaqueOdd, &g, Some(&IdAssignment::sequential(4))).unwrap().per_node
        );
    }

    #[test]
    fn simulation_cannot_exceed_the_universe() {
        let g = path(3, NodeLabel::opaque(0));
        let sim = simulate_oblivious(Arc::new(IdThreshold { k: 10 }), universe(5));
        assert!(run_decider(&sim, &g, None).unwrap().accepted());
        let small = simulate_oblivious(Arc::new(NeighbourSum { k: 3 }), universe(2));
        assert!(matches!(run_decider(&small, &g, None), Err(Error::Infeasible(_))));
    }

    #[test]
    fn pq_of_deterministic_and_single_coin_deciders() {
        let yes = opaque(&[0, 2, 4], &[(0, 1), (1, 2)]).unwrap();
        let no = opaque(&[0, 3, 4], &[(0, 1), (1, 2)]).unwrap();
        let est = estimate_pq(&OpaqueOdd, &[&yes], &[&no], 50, 9).unwrap();
        assert_eq!((est.p_hat, est.q_hat), (1.0, 1.0));

        let marked = opaque(&[0, 1, 0], &[(0, 1), (1, 2)]).unwrap();
        let est = estimate_pq(&CoinAtMarked, &[&marked], &[], 4000, 3).unwrap();
        assert!((est.p_hat - 0.5).abs() <= 3.0 * est.p_sigma(0.5), "{est:?}");
        assert_eq!(estimate_pq(&CoinAtMarked, &[&marked], &[], 4000, 3).unwrap().yes_accepted, est.yes_accepted);
        assert!(estimate_pq(&CoinAtMarked, &[], &[], 10, 3).is_err());
    }
}
