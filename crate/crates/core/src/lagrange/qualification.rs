//! Four equivalent forms of the qualification condition for two polyhedral epigraphs.

use serde::{Deserialize, Serialize};

use crate::cones::{cone_diff, cone_intersect, tangent_cone_polyhedron, IntVec, PolyCone, DEFAULT_RAY_CAP};
use crate::error::{check_dim, Error, Result};
use crate::numkernel::{Polyhedron, Vector};
use crate::sets::SetSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualificationReport {
    pub x0: Vector,
    /// `f1(x0)`, `f2(x0)`.
    pub values: (f64, f64),
    /// (i) `T̂_{epi f1} − T̂_{epi f2}` is dense in `X × R`.
    pub dense_epigraphs: bool,
    /// (ii) `T̂_{C1} − T̂_{C2}` is dense in `X × R × R`.
    pub dense_lifted: bool,
    /// (iii) `N_{C1} ∩ (−N_{C2}) = {0}`.
    pub normals_trivial: bool,
    /// (iv) `∂^∞ f1(x0) ∩ (−∂^∞ f2(x0)) = {0}`.
    pub singular_trivial: bool,
    /// Singular subdifferentials of `f1` and `f2` at `x0`.
    pub singular: (PolyCone, PolyCone),
    /// Cones are Clarke cones standing in for the G-objects.
    pub clarke_realized: bool,
}

impl QualificationReport {
    pub fn verdicts(&self) -> [bool; 4] {
        [self.dense_epigraphs, self.dense_lifted, self.normals_trivial, self.singular_trivial]
    }

    /// All four conditions agree.
    pub fn agree(&self) -> bool {
        let v = self.verdicts();
        v.iter().all(|b| *b == v[0])
    }

    pub fn holds(&self) -> bool {
        self.verdicts().iter().all(|b| *b)
    }
}

fn epigraph_data(epi: &SetSpec, x0: &Vector) -> Result<(Polyhedron, f64)> {
    let SetSpec::Epigraph { f } = epi else {
        return Err(Error::InvalidArgument("expected an epigraph".into()));
    };
    check_dim(f.dim(), x0.dim())?;
    let p = f.epigraph_polyhedron().ok_or_else(|| Error::Unsupported("non-polyhedral epigraph".into()))?;
    let v = f.eval(x0.as_slice()).ok_or_else(|| Error::Precondition("x0 outside the domain".into()))?;
    Ok((p, v))
}

/// Inserts a zero column at `at`.
fn insert_column(p: &Polyhedron, at: usize) -> Polyhedron {
    let widen = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| {
                let mut r = r.clone();
                r.insert(at, 0.0);
                r
            })
            .collect()
    };
    Polyhedron { dim: p.dim + 1, a: widen(&p.a), b: p.b.clone(), a_eq: widen(&p.a_eq), b_eq: p.b_eq.clone() }
}

/// `{x* : (x*, 0) ∈ N}` for a normal cone `N ⊂ X × R`.
fn singular_part(normal: &PolyCone) -> Result<PolyCone> {
    let n = normal.dim() - 1;
    let horizontal = PolyCone::from_constraints(n + 1, &[], &[Vector::unit(n + 1, n)])?;
    let h = cone_intersect(normal, &horizontal)?;
    let drop = |vs: &[IntVec]| -> Vec<IntVec> { vs.iter().map(|v| v[..n].to_vec()).collect() };
    PolyCone::from_generators_exact(n, drop(h.rays_exact()), drop(h.lineality_exact()), DEFAULT_RAY_CAP)
}

/// Evaluates the four qualification conditions independently.
///
/// (i) and (ii) are decided on generators (Minkowski difference equals the
/// whole space); (iii) and (iv) on halfspace data through polarity.
pub fn qualification_equivalences(f1: &SetSpec, f2: &SetSpec, x0: &Vector) -> Result<QualificationReport> {
    let (p1, v1) = epigraph_data(f1, x0)?;
    let (p2, v2) = epigraph_data(f2, x0)?;
    let n = x0.dim();

    let t1 = tangent_cone_polyhedron(&p1, &x0.concat(&[v1]))?;
    let t2 = tangent_cone_polyhedron(&p2, &x0.concat(&[v2]))?;
    let dense_epigraphs = cone_diff(&t1, &t2)?.is_whole();

    // C1 = {r1 ≥ f1(x)} and C2 = {r2 ≥ f2(x)} in X × R × R.
    let lifted = x0.concat(&[v1, v2]);
    let c1 = tangent_cone_polyhedron(&insert_column(&p1, n + 1), &lifted)?;
    let c2 = tangent_cone_polyhedron(&insert_column(&p2, n), &lifted)?;
    let dense_lifted = cone_diff(&c1, &c2)?.is_whole();
    let normals_trivial = cone_intersect(&c1.polar(), &c2.polar().negate())?.is_zero();

    let s1 = singular_part(&t1.polar())?;
    let s2 = singular_part(&t2.polar())?;
    let singular_trivial = cone_intersect(&s1, &s2.negate())?.is_zero();

    Ok(QualificationReport {
        x0: x0.clone(),
        values: (v1, v2),
        dense_epigraphs,
        dense_lifted,
        normals_trivial,
        singular_trivial,
        singular: (s1, s2),
        clarke_realized: true,
    })
}
