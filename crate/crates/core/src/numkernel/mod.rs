//! Numeric substrate: vectors, norms, a small LP solver and polyhedral
//! projection.

mod lp;
mod qp;
mod vector;

pub use lp::{lp_feasible_point, lp_solve, Bound, LpProblem, LpResult, LpStatus};
pub use qp::{project_onto, project_polyhedron, Polyhedron, Projection};
pub use vector::{distance, norm, NormKind, Vector};
pub(crate) use vector::{dot, norm2};

use serde::{Deserialize, Serialize};

/// Default feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-9;
/// Default optimality tolerance.
pub const OPT_TOL: f64 = 1e-7;

/// Tolerance pair threaded through operations that accept an override.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub feasibility: f64,
    pub optimality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { feasibility: FEAS_TOL, optimality: OPT_TOL }
    }
}
