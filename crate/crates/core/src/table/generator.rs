//! The neighbourhood generator: the oblivious `r`-ball classes that
//! `G(N, r)` would have, computed without knowing whether `N` halts.
//!
//! `N` is run for fewer than `R = 2^{4r}` steps. If it halts in time, the
//! gadget is built from its own table. Otherwise the first `R` rows and
//! columns of the run get a height-`4r` pyramid, the fragment collection is
//! glued on, and only balls that stay clear of the cut (the right and bottom
//! edge of every pyramid level) are reported.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ball::Ball;
use crate::canon::{class_representatives, NeighbourhoodClass};
use crate::error::{Error, Result};
use crate::graph::GraphView;
use crate::table::fragments::{fragments_cached, Form};
use crate::table::gadget::{build_g_with_budget, Gadget};
use crate::turing::{run, table_prefix, RunOutcome, TuringMachine};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "branch")]
pub enum Branch {
    /// `N` halted after `steps < R` steps.
    Halted { steps: u64 },
    /// `N` was still running after `R - 1` steps; the table was cut at `side`.
    Truncated { side: usize },
}

pub struct Generated {
    pub branch: Branch,
    pub radius: usize,
    pub classes: BTreeMap<NeighbourhoodClass, Ball>,
}

impl Generated {
    pub fn class_set(&self) -> BTreeSet<NeighbourhoodClass> {
        self.classes.keys().cloned().collect()
    }
}

/// `R = 2^{4r}`.
pub fn cut_side(r: u32) -> Result<usize> {
    if r == 0 || 4 * r >= usize::BITS / 2 {
        return Err(Error::Input(format!("generator radius {r} out of range")));
    }
    Ok(1usize << (4 * r))
}

/// The gadget on the first `R` rows and columns of `N`'s run.
pub fn truncated_gadget(n: &TuringMachine, r: u32) -> Result<Gadget> {
    let side = cut_side(r)?;
    let rows = table_prefix(n, side, side)?;
    let fragments = fragments_cached(n, r, Form::Pyramidal)?;
    Gadget::new(Arc::new(n.clone()), r, rows, fragments)
}

/// Table-pyramid nodes on the right or bottom edge of their level.
pub fn cut_nodes(g: &Gadget) -> Vec<usize> {
    let shape = g.table_shape();
    (0..shape.size())
        .filter(|&u| {
            let (x, y, z) = shape.coords(u);
            let s = shape.side(z);
            x + 1 == s || y + 1 == s
        })
        .collect()
}

/// Nodes whose radius-`t` ball contains none of `blocked`.
pub fn nodes_clear_of(g: &dyn GraphView, blocked: &[usize], t: usize) -> Vec<usize> {
    let n = g.node_count();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for &b in blocked {
        dist[b] = 0;
        queue.push_back(b);
    }
    while let Some(u) = queue.pop_front() {
        if dist[u] == t {
            continue;
        }
        for v in g.neighbours(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    (0..n).filter(|&v| dist[v] == usize::MAX).collect()
}

/// Runs the generator with ball radius `r`.
pub fn neighbourhood_generator(n: &TuringMachine, r: u32) -> Result<Generated> {
    let side = cut_side(r)?;
    let t = r as usize;
    match run(n, side as u64 - 1)? {
        RunOutcome::Halted { steps, .. } => {
            let g = build_g_with_budget(n, r, steps)?;
            let classes = class_representatives(&g, 0..g.node_count(), t);
            Ok(Generated { branch: Branch::Halted { steps }, radius: t, classes })
        }
        RunOutcome::Running { .. } => {
            let g = truncated_gadget(n, r)?;
            let clear = nodes_clear_of(&g, &cut_nodes(&g), t);
            let classes = class_representatives(&g, clear, t);
            Ok(Generated { branch: Branch::Truncated { side }, radius: t, classes })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::{neighbourhood_multiset, ClassMode};
    use crate::table::gadget::build_g;
    use crate::turing::fixtures;

    #[test]
    fn halting_branch_matches_the_gadget() {
        let m = fixtures::halt0();
        let b = neighbourhood_generator(&m, 1).unwrap();
        assert_eq!(b.branch, Branch::Halted { steps: 1 });
        let g = build_g(&m, 1).unwrap().materialize().unwrap();
        let want: BTreeSet<_> = neighbourhood_multiset(&g, None, 1, ClassMode::Oblivious).into_keys().collect();
        assert_eq!(b.class_set(), want);
    }

    #[test]
    fn loop_terminates_and_is_deterministic() {
        let m = fixtures::looping();
        let a = neighbourhood_generator(&m, 1).unwrap();
        assert_eq!(a.branch, Branch::Truncated { side: 16 });
        assert!(!a.classes.is_empty());
        let b = neighbourhood_generator(&m, 1).unwrap();
        assert_eq!(a.class_set(), b.class_set());
    }

    #[test]
    fn cut_avoidance() {
        let g = truncated_gadget(&fixtures::looping(), 1).unwrap();
        let cut = cut_nodes(&g);
        // level sides 16, 8, 4, 2, 1
        assert_eq!(cut.len(), 31 + 15 + 7 + 3 + 1);
        let clear = nodes_clear_of(&g, &cut, 1);
        assert!(clear.contains(&0));
        assert!(!clear.contains(&g.table_shape().index(14, 3, 0)));
        assert!(clear.contains(&g.table_shape().index(13, 3, 0)));
    }
}
