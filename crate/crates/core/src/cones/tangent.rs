//! Exact tangent cones of convex sets with closed-form descriptions.

use serde::{Deserialize, Serialize};

use super::exact::int_from_f64;
use super::polycone::{PolyCone, DEFAULT_RAY_CAP};
use super::sampled::{tangent_cone_sampled, Membership, SampledCone, DEFAULT_BUDGET};
use crate::error::{check_dim, Error, Result};
use crate::numkernel::{Polyhedron, Vector, FEAS_TOL};
use crate::sets::SetSpec;

/// Threshold on `|a·x0 − b|` under which a constraint counts as active.
pub const ACTIVITY_TOL: f64 = 1e-9;

/// A tangent cone computed exactly or approximated by sampling.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TangentCone {
    Exact(PolyCone),
    Sampled(SampledCone),
}

impl TangentCone {
    pub fn as_exact(&self) -> Option<&PolyCone> {
        match self {
            TangentCone::Exact(c) => Some(c),
            TangentCone::Sampled(_) => None,
        }
    }

    /// Bouligand membership of a direction.
    pub fn classify(&self, v: &Vector) -> Result<Membership> {
        match self {
            TangentCone::Exact(c) => Ok(if c.contains(v) { Membership::In } else { Membership::Out }),
            TangentCone::Sampled(s) => Ok(s.classify(v)?.bouligand),
        }
    }
}

/// Tangent cone of a polyhedron: `{v : a_i·v ≤ 0 for active i}` with equality rows as `±`.
pub fn tangent_cone_polyhedron(p: &Polyhedron, x0: &Vector) -> Result<PolyCone> {
    check_dim(p.dim, x0.dim())?;
    let residual = p.residual(x0.as_slice());
    if residual > FEAS_TOL {
        return Err(Error::NotMember { residual });
    }
    let x = x0.as_slice();
    let mut ineq = Vec::new();
    for (row, b) in p.a.iter().zip(&p.b) {
        let s: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
        if (s - b).abs() <= ACTIVITY_TOL {
            ineq.push(int_from_f64(row)?);
        }
    }
    let eq = p.a_eq.iter().map(|r| int_from_f64(r)).collect::<Result<Vec<_>>>()?;
    PolyCone::from_halfspaces_exact(p.dim, ineq, eq, DEFAULT_RAY_CAP)
}

/// Tangent cone of a set with a polyhedral description at one of its points.
pub fn tangent_cone_polyhedral(s: &SetSpec, x0: &Vector) -> Result<PolyCone> {
    match s {
        SetSpec::Polyhedron(p) => tangent_cone_polyhedron(p, x0),
        SetSpec::Translate { inner, shift } => {
            check_dim(shift.dim(), x0.dim())?;
            tangent_cone_polyhedral(inner, &(x0 - shift))
        }
        other => match other.as_polyhedron() {
            Some(p) => tangent_cone_polyhedron(&p, x0),
            None => Err(Error::Unsupported("set has no polyhedral description".into())),
        },
    }
}

/// Closed-form tangent cone of a convex set; `None` when no closed form applies.
pub fn exact_convex_cone(s: &SetSpec, x0: &Vector) -> Result<Option<PolyCone>> {
    check_dim(s.dim(), x0.dim())?;
    match s {
        SetSpec::Polyhedron(p) => tangent_cone_polyhedron(p, x0).map(Some),
        SetSpec::Ball { center, radius } => {
            let d = x0.dist(center);
            if d > radius + FEAS_TOL {
                return Err(Error::NotMember { residual: d - radius });
            }
            let n = x0.dim();
            if *radius == 0.0 {
                return Ok(Some(PolyCone::zero(n)));
            }
            if d < radius - FEAS_TOL {
                return Ok(Some(PolyCone::whole(n)));
            }
            let normal = x0 - center;
            Ok(Some(PolyCone::from_halfspaces(n, &[normal])?))
        }
        SetSpec::Affine { base, directions } => {
            let p = crate::sets::project_affine(base, directions, x0);
            let residual = p.dist(x0);
            if residual > FEAS_TOL {
                return Err(Error::NotMember { residual });
            }
            Ok(Some(PolyCone::from_generators_with_lineality(x0.dim(), &[], directions)?))
        }
        SetSpec::Translate { inner, shift } => exact_convex_cone(inner, &(x0 - shift)),
        SetSpec::Product { factors } => {
            let mut offset = 0;
            let mut acc: Option<PolyCone> = None;
            for f in factors {
                let k = f.dim();
                let piece = Vector::from_slice(&x0.as_slice()[offset..offset + k]);
                offset += k;
                let Some(c) = exact_convex_cone(f, &piece)? else {
                    return Ok(None);
                };
                acc = Some(match acc {
                    None => c,
                    Some(a) => a.product(&c)?,
                });
            }
            Ok(Some(acc.unwrap_or_else(|| PolyCone::whole(0))))
        }
        SetSpec::Union { members } if members.len() == 1 => exact_convex_cone(&members[0], x0),
        other => match other.as_polyhedron() {
            Some(p) => tangent_cone_polyhedron(&p, x0).map(Some),
            None => Ok(None),
        },
    }
}

/// Clarke tangent cone of a convex set, exact whenever a closed form exists
/// and sampled otherwise.
pub fn clarke_cone_convex(s: &SetSpec, x0: &Vector) -> Result<TangentCone> {
    if !s.is_convex() {
        return Err(Error::Unsupported("Clarke cone requested for a nonconvex set".into()));
    }
    match exact_convex_cone(s, x0)? {
        Some(c) => Ok(TangentCone::Exact(c)),
        None => Ok(TangentCone::Sampled(tangent_cone_sampled(s, x0, DEFAULT_BUDGET)?)),
    }
}

/// Bouligand tangent cone: exact for convex sets with a closed form, sampled otherwise.
pub fn tangent_cone(s: &SetSpec, x0: &Vector) -> Result<TangentCone> {
    if s.is_convex() {
        if let Some(c) = exact_convex_cone(s, x0)? {
            return Ok(TangentCone::Exact(c));
        }
    }
    Ok(TangentCone::Sampled(tangent_cone_sampled(s, x0, DEFAULT_BUDGET)?))
}
