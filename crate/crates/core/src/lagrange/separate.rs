//! Strict separation of a closed convex cone from an open cone over a ball.

use serde::{Deserialize, Serialize};

use crate::cones::{direction_net, PolyCone};
use crate::error::{check_dim, Error, Result};
use crate::numkernel::Vector;

/// Relative strictness required on `D`: `⟨ξ, d⟩ ≤ −STRICT ‖ξ‖ ‖d‖`.
pub const STRICT: f64 = 1e-9;
/// Tolerance on `⟨ξ, g⟩ ≥ 0` for unit generators `g` of `C`.
const GEN_TOL: f64 = 1e-9;
const BALL_SAMPLES: usize = 360;

/// A unit functional `ξ` with `⟨ξ, ·⟩ ≥ 0` on `C` and `< 0` on `D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub xi: Vector,
    /// `sup ⟨ξ, y⟩` over `y ∈ D_dir + r B̄`, negative.
    pub bound: f64,
    /// `dist(D_dir, C)`.
    pub distance: f64,
    /// Number of ball points checked for strictness.
    pub samples: usize,
}

/// Separates `C` from the open cone generated by `D_dir + r B`.
///
/// The functional is `ξ = (P_C(d) − d)/‖P_C(d) − d‖`, for which
/// `⟨ξ, d⟩ = −dist(d, C)`. Returns `None` when `C` is the whole space or the
/// ball is not separated from `C` with the required strictness.
pub fn separate_cones(c: &PolyCone, d_dir: &Vector, d_radius: f64) -> Result<Option<Separation>> {
    if !(d_radius > 0.0 && d_radius.is_finite()) {
        return Err(Error::InvalidArgument("D is degenerate: radius must be positive".into()));
    }
    check_dim(c.dim(), d_dir.dim())?;
    if d_dir.norm() == 0.0 || !d_dir.is_finite() {
        return Err(Error::InvalidArgument("D is degenerate: zero direction".into()));
    }
    if c.is_whole() {
        return Ok(None);
    }
    let p = c.project(d_dir)?;
    let gap = &p - d_dir;
    let distance = gap.norm();
    if distance - d_radius <= STRICT * (d_dir.norm() + d_radius) {
        return Ok(None);
    }
    let xi = gap.scale(1.0 / distance);
    for g in c.generators() {
        if xi.dot(&g) < -GEN_TOL {
            return Err(Error::NonConvergence { what: "cone separation", iterations: 1 });
        }
    }
    let ball = direction_net(c.dim(), BALL_SAMPLES, 0);
    for u in &ball {
        let y = d_dir.axpy(d_radius, u);
        if xi.dot(&y) > -STRICT * y.norm() {
            return Err(Error::NonConvergence { what: "cone separation", iterations: 1 });
        }
    }
    Ok(Some(Separation { bound: xi.dot(d_dir) + d_radius, xi, distance, samples: ball.len() }))
}
