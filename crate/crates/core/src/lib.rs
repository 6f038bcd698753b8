//! Finite-dimensional toolkit for set transversality.
//!
//! The crate certifies and estimates transversality, tangential
//! transversality and subtransversality of closed sets in `R^n`, solves
//! two-set feasibility problems by gap reduction, checks tangent-cone
//! intersection properties and computes Lagrange multipliers by cone
//! separation.

pub mod cones;
pub mod error;
pub mod gapreduce;
pub mod intersection;
pub mod lagrange;
pub mod numkernel;
pub mod sets;
pub mod transversality;

pub use error::{Error, Result};
