//! Small reference deciders used in tests and from the command line.

use num_bigint::BigUint;

use crate::ball::LocalView;
use crate::graph::Role;
use crate::local::{Coins, DeciderMode, LocalDecider, LocalOutput};

fn id_of(view: &dyn LocalView, h: usize) -> BigUint {
    view.id(h).expect("identifiers present")
}

fn opaque_value(view: &dyn LocalView, h: usize) -> Option<u64> {
    match view.label(h).role {
        Role::Opaque { value } => Some(value),
        _ => None,
    }
}

/// Accepts everywhere.
#[derive(Clone, Copy, Debug, Default)]
pub struct AlwaysYes;

impl LocalDecider for AlwaysYes {
    fn name(&self) -> String {
        "always-yes".into()
    }

    fn horizon(&self) -> usize {
        0
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::Oblivious
    }

    fn decide(&self, _view: &dyn LocalView, _coins: &mut Coins) -> LocalOutput {
        LocalOutput::Yes
    }
}

/// Rejects at a node whose identifier is at least `k`.
#[derive(Clone, Copy, Debug)]
pub struct IdThreshold {
    pub k: u64,
}

impl LocalDecider for IdThreshold {
    fn name(&self) -> String {
        format!("id-threshold:{}", self.k)
    }

    fn horizon(&self) -> usize {
        0
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::UsesIds
    }

    fn decide(&self, view: &dyn LocalView, _coins: &mut Coins) -> LocalOutput {
        LocalOutput::from_bool(id_of(view, 0) < BigUint::from(self.k))
    }
}

/// Rejects at a node with an odd identifier.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdParity;

impl LocalDecider for IdParity {
    fn name(&self) -> String {
        "id-parity".into()
    }

    fn horizon(&self) -> usize {
        0
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::UsesIds
    }

    fn decide(&self, view: &dyn LocalView, _coins: &mut Coins) -> LocalOutput {
        LocalOutput::from_bool(!id_of(view, 0).bit(0))
    }
}

/// Rejects when the identifiers of a node and its neighbours sum to at least `k`.
#[derive(Clone, Copy, Debug)]
pub struct NeighbourSum {
    pub k: u64,
}

impl LocalDecider for NeighbourSum {
    fn name(&self) -> String {
        format!("nbr-sum:{}", self.k)
    }

    fn horizon(&self) -> usize {
        1
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::UsesIds
    }

    fn decide(&self, view: &dyn LocalView, _coins: &mut Coins) -> LocalOutput {
        let mut sum = id_of(view, 0);
        for h in view.neighbours(0) {
            sum += id_of(view, h);
        }
        LocalOutput::from_bool(sum < BigUint::from(self.k))
    }
}

/// Rejects at an opaque node carrying an odd value. Reads labels only.
#[derive(Clone, Copy, Debug, Default)]
pub struct OpaqueOdd;

impl LocalDecider for OpaqueOdd {
    fn name(&self) -> String {
        "opaque-odd".into()
    }

    fn horizon(&self) -> usize {
        0
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::Oblivious
    }

    fn decide(&self, view: &dyn LocalView, _coins: &mut Coins) -> LocalOutput {
        LocalOutput::from_bool(opaque_value(view, 0).is_none_or(|v| v % 2 == 0))
    }
}

/// Nodes labelled `opaque 1` toss one fair coin and reject on heads.
#[derive(Clone, Copy, Debug, Default)]
pub struct CoinAtMarked;

impl LocalDecider for CoinAtMarked {
    fn name(&self) -> String {
        "coin-at-marked".into()
    }

    fn horizon(&self) -> usize {
        0
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::Randomized
    }

    fn decide(&self, view: &dyn LocalView, coins: &mut Coins) -> LocalOutput {
        if opaque_value(view, 0) == Some(1) {
            LocalOutput::from_bool(!coins.bit())
        } else {
            LocalOutput::Yes
        }
    }
}
