//! Local decision in the LOCAL model.
//!
//! Labelled graphs and radius-`t` views, local deciders with and without
//! identifiers, the finite-universe oblivious simulation, layered-tree
//! gadgets, Turing-machine execution tables and the table gadget with its
//! local checker and randomized decider.

pub mod ball;
pub mod canon;
pub mod deciders;
pub mod error;
pub mod graph;
pub mod local;
pub mod registry;
pub mod table;
pub mod tree;
pub mod turing;

pub use error::{Error, Result};
