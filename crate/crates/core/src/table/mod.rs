//! Execution-table gadgets: fragment collections, layered quadtrees, the
//! glued graph `G(M, r)`, its local structure checker, the neighbourhood
//! generator and the deciders built on top.

pub mod fragments;
pub mod gadget;
pub mod pyramid;
pub mod checker;
pub mod generator;
pub mod deciders;
pub mod mutation;
