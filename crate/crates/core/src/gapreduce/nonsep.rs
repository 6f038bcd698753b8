//! Points of `A ∩ B` accumulating at `x0` along nearby tangent directions.

use serde::{Deserialize, Serialize};

use crate::cones::{tangent_cone, Membership, TangentCone};
use crate::error::{Error, Result};
use crate::numkernel::Vector;
use crate::sets::{intersect, project_intersection, SetSpec};
use crate::transversality::{nearest, TransversalityCertificate};

/// Largest step `t_1` of the sequence `t_m = t_1 2^{1-m}`.
const FIRST_STEP: f64 = 0.5;
const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonseparationPoint {
    pub t: f64,
    #[serde(rename = "xA")]
    pub x_a: Vector,
    #[serde(rename = "xB")]
    pub x_b: Vector,
    #[serde(rename = "xAB")]
    pub x_ab: Vector,
    /// `‖xAB − x0‖ ≤ 2 ‖xA − x0‖` and `xAB ≠ x0`.
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonseparationReport {
    #[serde(rename = "K")]
    pub k: f64,
    pub epsilon: f64,
    pub points: Vec<NonseparationPoint>,
}

impl NonseparationReport {
    pub fn valid_points(&self) -> impl Iterator<Item = &NonseparationPoint> {
        self.points.iter().filter(|p| p.valid)
    }
}

/// The subtransversality constant of a certified certificate.
pub fn k_from_certificate(cert: &TransversalityCertificate) -> Result<f64> {
    match (&cert.status, cert.constants.k) {
        (s, Some(k)) if s.is_certified() => Ok(k),
        _ => Err(Error::Precondition("no certified subtransversality constant".into())),
    }
}

fn check_direction(cone: &TangentCone, v: &Vector, derivable: bool, what: &str) -> Result<()> {
    let m = match cone {
        TangentCone::Exact(c) => {
            if c.contains(v) {
                Membership::In
            } else {
                Membership::Out
            }
        }
        TangentCone::Sampled(s) => {
            let p = s.classify(v)?;
            if derivable {
                p.derivable
            } else {
                p.bouligand
            }
        }
    };
    if m == Membership::In {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{what} is not classified as a tangent direction ({m:?})")))
    }
}

/// Builds `count` points of `A ∩ B` converging to `x0`.
///
/// Requires unit `vA` tangent to `A` (Bouligand), unit `vB` derivable for
/// `B`, and `‖vA − vB‖ < 1/K`. For `t_m = ½·2^{1-m}` the points
/// `xA = P_A(x0 + t_m vA)`, `xB = P_B(x0 + t_m vB)` are formed and `xA` is
/// projected onto `A ∩ B`. Each point is re-checked against
/// `0 < ‖xAB − x0‖ ≤ 2‖xA − x0‖`; failures are kept and marked invalid.
#[allow(clippy::too_many_arguments)]
pub fn nonseparation_sequence(
    a: &SetSpec,
    b: &SetSpec,
    x0: &Vector,
    v_a: &Vector,
    v_b: &Vector,
    k: f64,
    count: usize,
) -> Result<NonseparationReport> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument("K must be positive and finite".into()));
    }
    for (v, name) in [(v_a, "vA"), (v_b, "vB")] {
        if (v.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::Precondition(format!("{name} must have unit norm")));
        }
    }
    let gap = v_a.dist(v_b);
    if gap >= 1.0 / k {
        return Err(Error::Precondition(format!("‖vA − vB‖ = {gap:e} is not below 1/K = {:e}", 1.0 / k)));
    }
    check_direction(&tangent_cone(a, x0)?, v_a, false, "vA")?;
    check_direction(&tangent_cone(b, x0)?, v_b, true, "vB")?;
    let epsilon = 0.5 * (1.0 / k - gap);
    let exact = match intersect(a, b) {
        Ok(s) => Some(s),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let mut points = Vec::with_capacity(count);
    let mut t = FIRST_STEP;
    for _ in 0..count {
        let x_a = nearest(a, &x0.axpy(t, v_a))?;
        let x_b = nearest(b, &x0.axpy(t, v_b))?;
        let x_ab = match &exact {
            Some(s) => nearest(s, &x_a)?,
            None => project_intersection(a, b, &x_a)?.point,
        };
        let r = x_ab.dist(x0);
        let valid = r > 0.0 && r <= 2.0 * x_a.dist(x0) * (1.0 + 1e-12);
        points.push(NonseparationPoint { t, x_a, x_b, x_ab, valid });
        t *= 0.5;
    }
    Ok(NonseparationReport { k, epsilon, points })
}
