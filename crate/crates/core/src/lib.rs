//! Numerical laboratory for bosons hopping on a lattice with power-law
//! couplings: exact and cluster-decomposed dynamics, transfer and gate
//! protocols, Haar statistics and the easy/hard phase map.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod gates;
pub mod haar;
pub mod harness;
pub mod hhkl;
pub mod lattice;
pub mod phase;
pub mod propagator;
pub mod transfer;

pub use error::{Error, Result};
