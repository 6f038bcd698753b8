//! Polyhedral convex cones held in both generator and halfspace form.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::exact::{
    canonical_basis, double_description, idot, int_from_f64, is_zero, neg, project_out, unit_f64, IntVec,
};
use crate::error::{check_dim, Error, Result};
use crate::numkernel::{project_onto, Polyhedron, Vector};

/// Default cap on the number of extreme rays kept by any cone operation.
pub const DEFAULT_RAY_CAP: usize = 256;

/// A closed convex polyhedral cone `span(L) + cone(R) = {v : a·v ≤ 0, e·v = 0}`.
///
/// Both descriptions are kept in a canonical exact form: the lineality basis
/// is in reduced echelon form, rays are projected onto the orthogonal
/// complement of the lineality space, and every vector is a primitive integer
/// vector. Two cones are equal iff their canonical forms coincide.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyCone {
    dim: usize,
    lineality: Vec<IntVec>,
    rays: Vec<IntVec>,
    /// Normals `e` of the equalities `e·v = 0` (lineality of the polar).
    equalities: Vec<IntVec>,
    /// Normals `a` of the inequalities `a·v ≤ 0` (rays of the polar).
    inequalities: Vec<IntVec>,
}

impl fmt::Debug for PolyCone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |vs: &[IntVec]| -> Vec<String> {
            vs.iter()
                .map(|v| format!("({})", v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")))
                .collect()
        };
        f.debug_struct("PolyCone")
            .field("dim", &self.dim)
            .field("lineality", &show(&self.lineality))
            .field("rays", &show(&self.rays))
            .field("equalities", &show(&self.equalities))
            .field("inequalities", &show(&self.inequalities))
            .finish()
    }
}

fn canonical(dim: usize, lineality: &[IntVec], rays: &[IntVec]) -> (Vec<IntVec>, Vec<IntVec>) {
    let lin = canonical_basis(lineality, dim);
    let mut r: Vec<IntVec> = rays
        .iter()
        .map(|v| project_out(v, &lin))
        .filter(|v| !is_zero(v))
        .collect();
    r.sort();
    r.dedup();
    (lin, r)
}

fn with_negations(rays: &[IntVec], lin: &[IntVec]) -> Vec<IntVec> {
    rays.iter().cloned().chain(lin.iter().cloned()).chain(lin.iter().map(|l| neg(l))).collect()
}

impl PolyCone {
    /// Cone generated by `rays` plus the linear span of `lineality`.
    pub fn from_generators_exact(dim: usize, rays: Vec<IntVec>, lineality: Vec<IntVec>, cap: usize) -> Result<Self> {
        for v in rays.iter().chain(&lineality) {
            check_dim(dim, v.len())?;
        }
        // The H-form is the generator form of the polar.
        let polar = double_description(dim, &with_negations(&rays, &lineality), cap)?;
        let (eq, ineq) = canonical(dim, &polar.lineality, &polar.rays);
        // Irredundant generators from the H-form.
        let primal = double_description(dim, &with_negations(&ineq, &eq), cap)?;
        let (lin, r) = canonical(dim, &primal.lineality, &primal.rays);
        Ok(Self { dim, lineality: lin, rays: r, equalities: eq, inequalities: ineq })
    }

    /// `{v : a·v ≤ 0 for a in inequalities, e·v = 0 for e in equalities}`.
    pub fn from_halfspaces_exact(
        dim: usize,
        inequalities: Vec<IntVec>,
        equalities: Vec<IntVec>,
        cap: usize,
    ) -> Result<Self> {
        for v in inequalities.iter().chain(&equalities) {
            check_dim(dim, v.len())?;
        }
        let primal = double_description(dim, &with_negations(&inequalities, &equalities), cap)?;
        let (lin, r) = canonical(dim, &primal.lineality, &primal.rays);
        let polar = double_description(dim, &with_negations(&r, &lin), cap)?;
        let (eq, ineq) = canonical(dim, &polar.lineality, &polar.rays);
        Ok(Self { dim, lineality: lin, rays: r, equalities: eq, inequalities: ineq })
    }

    /// Conic hull of float generators (converted exactly).
    pub fn from_generators(dim: usize, generators: &[Vector]) -> Result<Self> {
        let rays = generators.iter().map(|g| int_from_f64(g.as_slice())).collect::<Result<_>>()?;
        Self::from_generators_exact(dim, rays, vec![], DEFAULT_RAY_CAP)
    }

    /// Cone generated by `rays` and the span of `lineality`.
    pub fn from_generators_with_lineality(dim: usize, rays: &[Vector], lineality: &[Vector]) -> Result<Self> {
        let r = rays.iter().map(|g| int_from_f64(g.as_slice())).collect::<Result<_>>()?;
        let l = lineality.iter().map(|g| int_from_f64(g.as_slice())).collect::<Result<_>>()?;
        Self::from_generators_exact(dim, r, l, DEFAULT_RAY_CAP)
    }

    /// `{v : a·v ≤ 0}` for the given float normals (converted exactly).
    pub fn from_halfspaces(dim: usize, normals: &[Vector]) -> Result<Self> {
        let h = normals.iter().map(|g| int_from_f64(g.as_slice())).collect::<Result<_>>()?;
        Self::from_halfspaces_exact(dim, h, vec![], DEFAULT_RAY_CAP)
    }

    /// `{v : a·v ≤ 0, e·v = 0}`.
    pub fn from_constraints(dim: usize, inequalities: &[Vector], equalities: &[Vector]) -> Result<Self> {
        let h = inequalities.iter().map(|g| int_from_f64(g.as_slice())).collect::<Result<_>>()?;
        let e = equalities.iter().map(|g| int_from_f64(g.as_slice())).collect::<Result<_>>()?;
        Self::from_halfspaces_exact(dim, h, e, DEFAULT_RAY_CAP)
    }

    pub fn whole(dim: usize) -> Self {
        Self::from_halfspaces_exact(dim, vec![], vec![], DEFAULT_RAY_CAP).expect("whole space")
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_generators_exact(dim, vec![], vec![], DEFAULT_RAY_CAP).expect("zero cone")
    }

    /// Nonnegative orthant.
    pub fn orthant(dim: usize) -> Self {
        let rays = (0..dim).map(|i| Vector::unit(dim, i)).collect::<Vec<_>>();
        Self::from_generators(dim, &rays).expect("orthant")
    }

    pub fn ray(v: &Vector) -> Result<Self> {
        Self::from_generators(v.dim(), std::slice::from_ref(v))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lineality_dim(&self) -> usize {
        self.lineality.len()
    }

    pub fn is_zero(&self) -> bool {
        self.lineality.is_empty() && self.rays.is_empty()
    }

    pub fn is_whole(&self) -> bool {
        self.lineality.len() == self.dim
    }

    pub fn rays_exact(&self) -> &[IntVec] {
        &self.rays
    }

    pub fn lineality_exact(&self) -> &[IntVec] {
        &self.lineality
    }

    pub fn inequalities_exact(&self) -> &[IntVec] {
        &self.inequalities
    }

    pub fn equalities_exact(&self) -> &[IntVec] {
        &self.equalities
    }

    /// All generators as exact vectors: rays, then `±` lineality.
    pub fn generators_exact(&self) -> Vec<IntVec> {
        with_negations(&self.rays, &self.lineality)
    }

    /// All halfspace normals as exact vectors: inequalities, then `±` equalities.
    pub fn normals_exact(&self) -> Vec<IntVec> {
        with_negations(&self.inequalities, &self.equalities)
    }

    /// Unit generators: rays, then `±` lineality directions.
    pub fn generators(&self) -> Vec<Vector> {
        self.generators_exact().iter().map(|v| Vector::from_vec(unit_f64(v))).collect()
    }

    /// Unit normals `a` of `a·v ≤ 0`, equalities included as `±` pairs.
    pub fn halfspaces(&self) -> Vec<Vector> {
        self.normals_exact().iter().map(|v| Vector::from_vec(unit_f64(v))).collect()
    }

    /// The polar cone `{w : w·v ≤ 0 for all v in self}`.
    pub fn polar(&self) -> PolyCone {
        PolyCone {
            dim: self.dim,
            lineality: self.equalities.clone(),
            rays: self.inequalities.clone(),
            equalities: self.lineality.clone(),
            inequalities: self.rays.clone(),
        }
    }

    /// `−self`.
    pub fn negate(&self) -> PolyCone {
        let flip = |vs: &[IntVec]| {
            let mut out: Vec<IntVec> = vs.iter().map(|v| neg(v)).collect();
            out.sort();
            out
        };
        // Negating preserves the span, so the canonical lineality bases are unchanged.
        PolyCone {
            dim: self.dim,
            lineality: self.lineality.clone(),
            rays: flip(&self.rays),
            equalities: self.equalities.clone(),
            inequalities: flip(&self.inequalities),
        }
    }

    /// Exact membership of an integer vector.
    pub fn contains_exact(&self, v: &[BigInt]) -> bool {
        self.inequalities.iter().all(|a| !idot(a, v).is_positive())
            && self.equalities.iter().all(|e| idot(e, v).is_zero())
    }

    /// Exact membership of a float vector.
    pub fn contains(&self, v: &Vector) -> bool {
        int_from_f64(v.as_slice()).map(|iv| self.contains_exact(&iv)).unwrap_or(false)
    }

    /// `other ⊆ self`, decided exactly on generators.
    pub fn contains_cone(&self, other: &PolyCone) -> bool {
        self.dim == other.dim && other.generators_exact().iter().all(|g| self.contains_exact(g))
    }

    /// Verifies that every generator satisfies every halfspace.
    pub fn check_consistency(&self) -> Result<()> {
        for g in self.generators_exact() {
            for a in self.normals_exact() {
                if idot(&a, &g).is_positive() {
                    return Err(Error::InconsistentCone("generator violates a halfspace".into()));
                }
            }
        }
        Ok(())
    }

    /// Halfspace description as a polyhedron `{v : a·v ≤ 0, e·v = 0}` with unit rows.
    pub fn to_polyhedron(&self) -> Polyhedron {
        let ineq: Vec<Vec<f64>> = self.inequalities.iter().map(|v| unit_f64(v)).collect();
        let eq: Vec<Vec<f64>> = self.equalities.iter().map(|v| unit_f64(v)).collect();
        Polyhedron {
            dim: self.dim,
            b: vec![0.0; ineq.len()],
            a: ineq,
            b_eq: vec![0.0; eq.len()],
            a_eq: eq,
        }
    }

    /// Euclidean projection of `v` onto the cone.
    pub fn project(&self, v: &Vector) -> Result<Vector> {
        check_dim(self.dim, v.dim())?;
        if self.is_whole() {
            return Ok(v.clone());
        }
        Ok(project_onto(&self.to_polyhedron(), v)?.point)
    }

    /// Euclidean distance from `v` to the cone.
    pub fn distance(&self, v: &Vector) -> Result<f64> {
        Ok(v.dist(&self.project(v)?))
    }

    /// Cartesian product `self × other` with coordinates concatenated.
    pub fn product(&self, other: &PolyCone) -> Result<PolyCone> {
        let n = self.dim + other.dim;
        let lift_left = |v: &IntVec| -> IntVec {
            let mut out = v.clone();
            out.resize(n, BigInt::zero());
            out
        };
        let lift_right = |v: &IntVec| -> IntVec {
            let mut out = vec![BigInt::zero(); self.dim];
            out.extend(v.iter().cloned());
            out
        };
        let rays = self.rays.iter().map(lift_left).chain(other.rays.iter().map(lift_right)).collect();
        let lin = self.lineality.iter().map(lift_left).chain(other.lineality.iter().map(lift_right)).collect();
        PolyCone::from_generators_exact(n, rays, lin, DEFAULT_RAY_CAP)
    }
}

/// Polar cone.
pub fn polar(c: &PolyCone) -> PolyCone {
    c.polar()
}

/// `C1 + C2` with the default ray cap.
pub fn cone_sum(c1: &PolyCone, c2: &PolyCone) -> Result<PolyCone> {
    cone_sum_with_cap(c1, c2, DEFAULT_RAY_CAP)
}

pub fn cone_sum_with_cap(c1: &PolyCone, c2: &PolyCone, cap: usize) -> Result<PolyCone> {
    check_dim(c1.dim, c2.dim)?;
    let rays = c1.rays.iter().chain(&c2.rays).cloned().collect();
    let lin = c1.lineality.iter().chain(&c2.lineality).cloned().collect();
    PolyCone::from_generators_exact(c1.dim, rays, lin, cap)
}

/// `C1 − C2 = C1 + (−C2)`.
pub fn cone_diff(c1: &PolyCone, c2: &PolyCone) -> Result<PolyCone> {
    cone_diff_with_cap(c1, c2, DEFAULT_RAY_CAP)
}

pub fn cone_diff_with_cap(c1: &PolyCone, c2: &PolyCone, cap: usize) -> Result<PolyCone> {
    cone_sum_with_cap(c1, &c2.negate(), cap)
}

/// `C1 ∩ C2`.
pub fn cone_intersect(c1: &PolyCone, c2: &PolyCone) -> Result<PolyCone> {
    cone_intersect_with_cap(c1, c2, DEFAULT_RAY_CAP)
}

pub fn cone_intersect_with_cap(c1: &PolyCone, c2: &PolyCone, cap: usize) -> Result<PolyCone> {
    check_dim(c1.dim, c2.dim)?;
    let ineq = c1.inequalities.iter().chain(&c2.inequalities).cloned().collect();
    let eq = c1.equalities.iter().chain(&c2.equalities).cloned().collect();
    PolyCone::from_halfspaces_exact(c1.dim, ineq, eq, cap)
}

/// Result of [`is_dense_difference`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCertificate {
    pub dense: bool,
    /// Nonzero vector of `C1° ∩ (−C2°)` when the difference is not dense.
    pub witness: Option<Vector>,
    #[serde(skip)]
    pub witness_exact: Option<IntVec>,
}

/// Whether `C1 − C2` is dense (equivalently, equal to the whole space).
///
/// Decided through polarity: the difference is dense iff
/// `C1° ∩ (−C2°) = {0}`.
pub fn is_dense_difference(c1: &PolyCone, c2: &PolyCone) -> Result<DensityCertificate> {
    check_dim(c1.dim, c2.dim)?;
    let common = cone_intersect(&c1.polar(), &c2.polar().negate())?;
    if common.is_zero() {
        return Ok(DensityCertificate { dense: true, witness: None, witness_exact: None });
    }
    let w = common.generators_exact().into_iter().next().expect("nonzero cone has a generator");
    Ok(DensityCertificate {
        dense: false,
        witness: Some(Vector::from_vec(unit_f64(&w))),
        witness_exact: Some(w),
    })
}

/// Serialized form: exact integers as decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyConeRecord {
    pub dim: usize,
    pub rays: Vec<Vec<String>>,
    pub lineality: Vec<Vec<String>>,
    pub inequalities: Vec<Vec<String>>,
    pub equalities: Vec<Vec<String>>,
}

fn to_strings(vs: &[IntVec]) -> Vec<Vec<String>> {
    vs.iter().map(|v| v.iter().map(|c| c.to_string()).collect()).collect()
}

fn from_strings(vs: &[Vec<String>]) -> Result<Vec<IntVec>> {
    vs.iter()
        .map(|v| {
            v.iter()
                .map(|c| c.parse::<BigInt>().map_err(|e| Error::InvalidArgument(format!("bad integer {c}: {e}"))))
                .collect()
        })
        .collect()
}

impl From<&PolyCone> for PolyConeRecord {
    fn from(c: &PolyCone) -> Self {
        Self {
            dim: c.dim,
            rays: to_strings(&c.rays),
            lineality: to_strings(&c.lineality),
            inequalities: to_strings(&c.inequalities),
            equalities: to_strings(&c.equalities),
        }
    }
}

impl TryFrom<PolyConeRecord> for PolyCone {
    type Error = Error;

    fn try_from(r: PolyConeRecord) -> Result<Self> {
        let cone = PolyCone::from_generators_exact(
            r.dim,
            from_strings(&r.rays)?,
            from_strings(&r.lineality)?,
            DEFAULT_RAY_CAP,
        )?;
        let h = PolyCone::from_halfspaces_exact(
            r.dim,
            from_strings(&r.inequalities)?,
            from_strings(&r.equalities)?,
            DEFAULT_RAY_CAP,
        )?;
        if cone != h {
            return Err(Error::InconsistentCone("generator and halfspace forms disagree".into()));
        }
        Ok(cone)
    }
}

impl Serialize for PolyCone {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyConeRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyCone {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PolyConeRecord::deserialize(d)?;
        PolyCone::try_from(r).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c)
    }

    #[test]
    fn orthant_polar_is_negative_orthant() {
        let p = PolyCone::orthant(3).polar();
        assert_eq!(p, PolyCone::orthant(3).negate());
    }

    #[test]
    fn whole_and_zero_are_polar() {
        assert_eq!(PolyCone::whole(2).polar(), PolyCone::zero(2));
        assert!(PolyCone::whole(2).is_whole());
    }

    #[test]
    fn halfplane_polar_is_ray() {
        let h = PolyCone::from_halfspaces(2, &[v(&[0.0, 1.0])]).unwrap();
        assert_eq!(h.polar(), PolyCone::ray(&v(&[0.0, 1.0])).unwrap());
    }

    #[test]
    fn redundant_generators_are_removed() {
        let c = PolyCone::from_generators(2, &[v(&[1.0, 0.0]), v(&[1.0, 1.0]), v(&[0.0, 1.0])]).unwrap();
        assert_eq!(c, PolyCone::orthant(2));
        assert_eq!(c.rays_exact().len(), 2);
    }

    #[test]
    fn consistency_holds() {
        let c = PolyCone::from_generators(3, &[v(&[1.0, 0.0, 1.0]), v(&[0.0, 1.0, 1.0]), v(&[-1.0, -1.0, 1.0])])
            .unwrap();
        c.check_consistency().unwrap();
    }
}
