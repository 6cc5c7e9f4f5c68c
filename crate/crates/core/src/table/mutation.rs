//! Single-edit mutations of a materialized gadget and the search for a node
//! that notices them.

use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{GraphView, LabelledGraph, NodeLabel, Params, Role};
use crate::table::checker::{check_node, CHECK_HORIZON};
use crate::turing::{Arrival, Cell, Head, TuringMachine};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationKind {
    LabelEdit,
    EdgeDeletion,
    EdgeInsertion,
    GlueRemoval,
}

impl MutationKind {
    pub const ALL: [MutationKind; 4] =
        [MutationKind::LabelEdit, MutationKind::EdgeDeletion, MutationKind::EdgeInsertion, MutationKind::GlueRemoval];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationOutcome {
    pub kind: MutationKind,
    pub description: String,
    /// First node found rejecting, if any.
    pub rejected_at: Option<usize>,
    pub nodes_checked: usize,
}

enum Edit {
    Label(usize, NodeLabel),
    Removed(usize, usize),
    Added(usize, usize),
}

fn random_cell_edit(m: &TuringMachine, c: Cell, rng: &mut ChaCha8Rng) -> Cell {
    loop {
        let mut d = c;
        match rng.gen_range(0..4) {
            0 => d.xm = rng.gen_range(0..3),
            1 => d.ym = rng.gen_range(0..3),
            2 => d.symbol = rng.gen_range(0..m.num_symbols() as u16),
            _ => {
                let heads = m.head_labels();
                d.head = if rng.gen_bool(0.25) { None } else { Some(*heads.choose(rng).unwrap()) };
            }
        }
        if d != c {
            return d;
        }
    }
}

fn random_label_edit(label: &NodeLabel, rng: &mut ChaCha8Rng) -> NodeLabel {
    let Params::Table { machine, r } = &label.params else {
        return NodeLabel::opaque(rng.gen());
    };
    let mut out = label.clone();
    match (rng.gen_range(0..10), label.role) {
        (0, _) => out.params = Params::Table { machine: machine.clone(), r: r + 1 },
        (1, Role::TableCell(_)) => out.role = Role::PyramidNode,
        (1, _) | (2, Role::PyramidNode) => {
            let head = rng.gen_bool(0.5).then(|| Head { state: machine.start(), arrival: Arrival::Start });
            let c = Cell { xm: rng.gen_range(0..3), ym: rng.gen_range(0..3), symbol: 0, head };
            out.role = Role::TableCell(c);
        }
        (_, Role::TableCell(c)) => out.role = Role::TableCell(random_cell_edit(machine, c, rng)),
        (_, _) => out.role = Role::Pivot,
    }
    out
}

fn apply(g: &mut LabelledGraph, kind: MutationKind, rng: &mut ChaCha8Rng) -> Option<(Edit, Vec<usize>, String)> {
    let n = g.node_count();
    match kind {
        MutationKind::LabelEdit => {
            let u = rng.gen_range(0..n);
            let old = g.label_ref(u).clone();
            let new = random_label_edit(&old, rng);
            let desc = format!("node {u}: {:?} -> {:?}", old.role, new.role);
            g.set_label(u, new);
            Some((Edit::Label(u, old), vec![u], desc))
        }
        MutationKind::EdgeDeletion => {
            let u = rng.gen_range(0..n);
            let v = *g.adjacency(u).choose(rng)? as usize;
            g.remove_edge(u, v).ok()?;
            Some((Edit::Removed(u, v), vec![u, v], format!("delete edge ({u},{v})")))
        }
        MutationKind::EdgeInsertion => {
            let u = rng.gen_range(0..n);
            // half of the insertions join nodes at distance two
            let v = if rng.gen_bool(0.5) {
                let mid = *g.adjacency(u).choose(rng)? as usize;
                let far: Vec<usize> = g
                    .adjacency(mid)
                    .iter()
                    .map(|&x| x as usize)
                    .filter(|&x| x != u && !g.has_edge(u, x))
                    .collect();
                *far.choose(rng)?
            } else {
                rng.gen_range(0..n)
            };
            g.add_edge(u, v).ok()?;
            Some((Edit::Added(u, v), vec![u, v], format!("insert edge ({u},{v})")))
        }
        MutationKind::GlueRemoval => {
            let v = *g.adjacency(0).iter().filter(|&&x| g.label_ref(x as usize).role.cell().is_some()).collect::<Vec<_>>().choose(rng)?;
            let v = *v as usize;
            g.remove_edge(0, v).ok()?;
            Some((Edit::Removed(0, v), vec![0, v], format!("remove pivot edge (0,{v})")))
        }
    }
}

fn revert(g: &mut LabelledGraph, e: Edit) {
    match e {
        Edit::Label(u, l) => g.set_label(u, l),
        Edit::Removed(u, v) => g.add_edge(u, v).expect("edge was removed"),
        Edit::Added(u, v) => g.remove_edge(u, v).expect("edge was added"),
    }
}

/// Nodes within `CHECK_HORIZON` of any touched node, nearest first.
fn nearby(g: &dyn GraphView, touched: &[usize], seen: &mut HashSet<usize>, out: &mut Vec<usize>) {
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    for &t in touched {
        if seen.insert(t) {
            out.push(t);
        }
        queue.push_back((t, 0));
    }
    let mut local: HashSet<usize> = touched.iter().copied().collect();
    while let Some((u, d)) = queue.pop_front() {
        if d == CHECK_HORIZON {
            continue;
        }
        for v in g.neighbours(u) {
            if local.insert(v) {
                if seen.insert(v) {
                    out.push(v);
                }
                queue.push_back((v, d + 1));
            }
        }
    }
}

/// First node (nearest the edit, in the mutated or the original graph)
/// whose check fails, and how many nodes were checked.
fn find_rejection(g: &LabelledGraph, original: &LabelledGraph, touched: &[usize]) -> (Option<usize>, usize) {
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    nearby(g, touched, &mut seen, &mut order);
    nearby(original, touched, &mut seen, &mut order);
    for (i, &v) in order.iter().enumerate() {
        if !check_node(g, v) {
            return (Some(v), i + 1);
        }
    }
    (None, order.len())
}

/// Applies `per_kind` random mutations of each kind to `g`, one at a time,
/// and reports where each was caught.
pub fn mutation_campaign(g: &LabelledGraph, per_kind: usize, seed: u64) -> Vec<MutationOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let original = g.clone();
    let mut work = g.clone();
    let mut out = Vec::new();
    for kind in MutationKind::ALL {
        let mut done = 0;
        let mut attempts = 0;
        while done < per_kind && attempts < per_kind * 20 {
            attempts += 1;
            let Some((edit, touched, description)) = apply(&mut work, kind, &mut rng) else { continue };
            let (rejected_at, nodes_checked) = find_rejection(&work, &original, &touched);
            revert(&mut work, edit);
            out.push(MutationOutcome { kind, description, rejected_at, nodes_checked });
            done += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::gadget::build_g;
    use crate::turing::fixtures;

    #[test]
    fn small_campaign_on_halt0() {
        let g = build_g(&fixtures::halt0(), 1).unwrap().materialize().unwrap();
        let outcomes = mutation_campaign(&g, 5, 1);
        assert_eq!(outcomes.len(), 20);
        for o in &outcomes {
            assert!(o.rejected_at.is_some(), "{o:?}");
        }
    }
}
