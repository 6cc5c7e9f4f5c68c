//! Deciders by name, for the command line and reports.
//!
//! Names take an optional `:argument`, e.g. `id-threshold:10`,
//! `tree-P:n`, `budget-sim:4096`. Tree and cycle deciders default to
//! `f(n) = n`.

use std::sync::Arc;

use crate::deciders::{AlwaysYes, CoinAtMarked, IdParity, IdThreshold, NeighbourSum, OpaqueOdd};
use crate::error::{Error, Result};
use crate::graph::BoundFunction;
use crate::local::LocalDecider;
use crate::table::checker::StructureChecker;
use crate::table::deciders::{BudgetSim, Halt1Spotter, TableLd, TableRand};
use crate::tree::{CyclePromiseDecider, TreeChecker, TreeDecider};

pub const NAMES: &[&str] = &[
    "always-yes",
    "id-threshold:K",
    "id-parity",
    "nbr-sum:K",
    "opaque-odd",
    "coin-at-marked",
    "cycle-promise[:F]",
    "tree-P[:F]",
    "tree-Pprime[:F]",
    "table-ld",
    "table-rand",
    "budget-sim:B",
    "halt1-spotter",
    "structure",
];

pub fn decider_by_name(name: &str) -> Result<Arc<dyn LocalDecider>> {
    let (base, arg) = match name.split_once(':') {
        Some((b, a)) => (b, Some(a)),
        None => (name, None),
    };
    let number = || -> Result<u64> {
        arg.ok_or_else(|| Error::Input(format!("decider `{base}` needs a numeric argument")))?
            .parse()
            .map_err(|_| Error::Input(format!("bad argument in `{name}`")))
    };
    let bound = || -> Result<BoundFunction> { arg.map_or(Ok(BoundFunction::Linear), str::parse) };
    let no_arg = |d: Arc<dyn LocalDecider>| -> Result<Arc<dyn LocalDecider>> {
        match arg {
            None => Ok(d),
            Some(_) => Err(Error::Input(format!("decider `{base}` takes no argument"))),
        }
    };
    match base {
        "always-yes" => no_arg(Arc::new(AlwaysYes)),
        "id-threshold" => Ok(Arc::new(IdThreshold { k: number()? })),
        "id-parity" => no_arg(Arc::new(IdParity)),
        "nbr-sum" => Ok(Arc::new(NeighbourSum { k: number()? })),
        "opaque-odd" => no_arg(Arc::new(OpaqueOdd)),
        "coin-at-marked" => no_arg(Arc::new(CoinAtMarked)),
        "cycle-promise" => Ok(Arc::new(CyclePromiseDecider { f: bound()? })),
        "tree-P" => Ok(Arc::new(TreeDecider { f: bound()? })),
        "tree-Pprime" => Ok(Arc::new(TreeChecker { f: bound()? })),
        "table-ld" => no_arg(Arc::new(TableLd::default())),
        "table-rand" => no_arg(Arc::new(TableRand::default())),
        "budget-sim" => Ok(Arc::new(BudgetSim::new(number()?))),
        "halt1-spotter" => no_arg(Arc::new(Halt1Spotter)),
        "structure" => no_arg(Arc::new(StructureChecker)),
        _ => Err(Error::Input(format!("unknown decider `{name}`; known: {}", NAMES.join(", ")))),
    }
}
