//! Density test of the Clarke cone difference, with an empirical cross-check.

use super::estimate::estimate_tangential_constants;
use super::{Budget, Evidence, Notion, Status, TransversalityCertificate};
use crate::cones::{clarke_cone_convex, is_dense_difference, PolyCone, TangentCone};
use crate::error::{Error, Result};
use crate::numkernel::{Vector, FEAS_TOL};
use crate::sets::SetSpec;

/// Radius used for the sampled cross-check.
const CROSS_CHECK_DELTA: f64 = 0.5;

fn exact_clarke(s: &SetSpec, x0: &Vector, name: &str) -> Result<PolyCone> {
    match clarke_cone_convex(s, x0)? {
        TangentCone::Exact(c) => Ok(c),
        TangentCone::Sampled(_) => {
            Err(Error::Unsupported(format!("Clarke cone of {name} has no exact description")))
        }
    }
}

/// CERTIFIED exactly when `T̂_A(x0) − T̂_B(x0)` is dense.
///
/// In finite dimensions every closed set is massive (take a small ball as the
/// compact set), so density is the only hypothesis left to check. The result
/// carries an empirical tangential-constant estimate as `cross_check`.
pub fn certify_massive_dense(a: &SetSpec, b: &SetSpec, x0: &Vector) -> Result<TransversalityCertificate> {
    for (s, name) in [(a, "A"), (b, "B")] {
        let d = s.distance(x0)?;
        if d > FEAS_TOL {
            return Err(Error::Precondition(format!("x0 is not in {name} (distance {d:e})")));
        }
    }
    let ca = exact_clarke(a, x0, "A")?;
    let cb = exact_clarke(b, x0, "B")?;
    let density = is_dense_difference(&ca, &cb)?;
    let status = if density.dense {
        Status::Certified
    } else {
        let w = density.witness.as_ref().map(|w| format!("{:?}", w.as_slice())).unwrap_or_default();
        Status::Inconclusive {
            reason: format!("cone difference is not dense; {w} separates it from the origin"),
        }
    };
    let mut c = TransversalityCertificate::new(Notion::MassiveDense, x0, status, Evidence::Exact);
    c.notes.push("finite dimension: every closed set is massive with K a small closed ball".into());
    let cross = estimate_tangential_constants(a, b, x0, CROSS_CHECK_DELTA, Budget::default())?;
    c.notes.push(format!("empirical cross-check: {}", status_word(&cross.status)));
    c.cross_check = Some(Box::new(cross));
    Ok(c)
}

fn status_word(s: &Status) -> &'static str {
    match s {
        Status::Certified => "certified",
        Status::Refuted { .. } => "refuted",
        Status::Inconclusive { .. } => "inconclusive",
    }
}
