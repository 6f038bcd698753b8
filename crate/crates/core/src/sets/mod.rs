//! Closed sets in `R^n` with membership, distance and projection oracles.

mod intersect;
mod scalar;
mod smooth;

pub use intersect::{intersect, project_intersection};
pub use scalar::{AffinePiece, CustomFn, ScalarFn};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numkernel::{dot, norm2, project_onto, NormKind, Polyhedron, Vector, FEAS_TOL};

/// Sense of a level set `{g ≤ 0}` or `{g = 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelSense {
    Le,
    Eq,
}

/// Description of a nonempty closed set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SetSpec {
    Polyhedron(Polyhedron),
    Ball { center: Vector, radius: f64 },
    /// `base + span(directions)`.
    Affine { base: Vector, directions: Vec<Vector> },
    LevelSet { g: ScalarFn, sense: LevelSense },
    /// `inner + shift`.
    Translate { inner: Box<SetSpec>, shift: Vector },
    Union { members: Vec<SetSpec> },
    /// `{(x, s) : x ∈ dom f, f(x) ≤ s}`, one dimension more than `f`.
    Epigraph { f: ScalarFn },
    /// Cartesian product, coordinates concatenated in order.
    Product { factors: Vec<SetSpec> },
}

/// A projected point together with whether it came from a local method.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub point: Vector,
    pub approximate: bool,
}

/// A point certified to lie in a set up to `residual`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointInSet {
    pub point: Vector,
    pub residual: f64,
}

impl PointInSet {
    /// Checks membership with the default feasibility tolerance.
    pub fn new(set: &SetSpec, point: Vector) -> Result<Self> {
        let residual = set.distance(&point)?;
        if residual > FEAS_TOL {
            return Err(Error::NotMember { residual });
        }
        Ok(Self { point, residual })
    }
}

impl SetSpec {
    pub fn polyhedron(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        Ok(SetSpec::Polyhedron(Polyhedron::new(a, b)?))
    }

    /// `{x : a·x ≤ b}`.
    pub fn halfspace(a: Vec<f64>, b: f64) -> Result<Self> {
        Self::polyhedron(vec![a], vec![b])
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        let s = SetSpec::Ball { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn point(p: Vector) -> Self {
        SetSpec::Affine { base: p, directions: vec![] }
    }

    /// The line through `base` spanned by `dir`.
    pub fn line(base: Vector, dir: Vector) -> Self {
        SetSpec::Affine { base, directions: vec![dir] }
    }

    pub fn whole_space(dim: usize) -> Self {
        SetSpec::Polyhedron(Polyhedron::whole_space(dim))
    }

    pub fn translate(self, shift: Vector) -> Self {
        SetSpec::Translate { inner: Box::new(self), shift }
    }

    pub fn dim(&self) -> usize {
        match self {
            SetSpec::Polyhedron(p) => p.dim,
            SetSpec::Ball { center, .. } => center.dim(),
            SetSpec::Affine { base, .. } => base.dim(),
            SetSpec::LevelSet { g, .. } => g.dim(),
            SetSpec::Translate { inner, .. } => inner.dim(),
            SetSpec::Union { members } => members.first().map_or(0, |m| m.dim()),
            SetSpec::Epigraph { f } => f.dim() + 1,
            SetSpec::Product { factors } => factors.iter().map(|f| f.dim()).sum(),
        }
    }

    /// Structural validation (dimensions, finiteness, nonempty lists).
    pub fn validate(&self) -> Result<()> {
        match self {
            SetSpec::Polyhedron(p) => p.validate(),
            SetSpec::Ball { center, radius } => {
                if center.dim() == 0 || !center.is_finite() {
                    return Err(Error::InvalidArgument("ball center must be finite".into()));
                }
                if !(*radius >= 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidArgument("ball radius must be finite and nonnegative".into()));
                }
                Ok(())
            }
            SetSpec::Affine { base, directions } => {
                if base.dim() == 0 || !base.is_finite() {
                    return Err(Error::InvalidArgument("affine base must be finite".into()));
                }
                for d in directions {
                    check_dim(base.dim(), d.dim())?;
                }
                Ok(())
            }
            SetSpec::LevelSet { g, .. } => g.validate(),
            SetSpec::Translate { inner, shift } => {
                inner.validate()?;
                check_dim(inner.dim(), shift.dim())
            }
            SetSpec::Union { members } => {
                let first = members
                    .first()
                    .ok_or_else(|| Error::InvalidArgument("union needs at least one member".into()))?;
                for m in members {
                    m.validate()?;
                    check_dim(first.dim(), m.dim())?;
                }
                Ok(())
            }
            SetSpec::Epigraph { f } => f.validate(),
            SetSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidArgument("product needs at least one factor".into()));
                }
                factors.iter().try_for_each(|f| f.validate())
            }
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            SetSpec::Polyhedron(_) | SetSpec::Ball { .. } | SetSpec::Affine { .. } => true,
            SetSpec::LevelSet { g, sense } => match sense {
                LevelSense::Le => g.is_convex(),
                LevelSense::Eq => is_single_affine(g),
            },
            SetSpec::Translate { inner, .. } => inner.is_convex(),
            SetSpec::Union { members } => members.len() == 1 && members[0].is_convex(),
            SetSpec::Epigraph { f } => f.is_convex(),
            SetSpec::Product { factors } => factors.iter().all(|f| f.is_convex()),
        }
    }

    /// Exact polyhedral description when the set is polyhedral by construction.
    pub fn as_polyhedron(&self) -> Option<Polyhedron> {
        match self {
            SetSpec::Polyhedron(p) => Some(p.clone()),
            SetSpec::Ball { center, radius } if *radius == 0.0 => Some(point_polyhedron(center)),
            SetSpec::Ball { .. } => None,
            SetSpec::Affine { base, directions } => Some(affine_polyhedron(base, directions)),
            SetSpec::LevelSet { g, sense } => match sense {
                LevelSense::Le => g.sublevel_polyhedron(),
                LevelSense::Eq if is_single_affine(g) => {
                    let p = g.sublevel_polyhedron()?;
                    Some(Polyhedron { dim: p.dim, a: vec![], b: vec![], a_eq: p.a, b_eq: p.b })
                }
                LevelSense::Eq => None,
            },
            SetSpec::Translate { inner, shift } => {
                let mut p = inner.as_polyhedron()?;
                for (r, b) in p.a.iter().zip(p.b.iter_mut()) {
                    *b += dot(r, shift.as_slice());
                }
                for (r, b) in p.a_eq.iter().zip(p.b_eq.iter_mut()) {
                    *b += dot(r, shift.as_slice());
                }
                Some(p)
            }
            SetSpec::Union { members } if members.len() == 1 => members[0].as_polyhedron(),
            SetSpec::Union { .. } => None,
            SetSpec::Epigraph { f } => f.epigraph_polyhedron(),
            SetSpec::Product { factors } => {
                let parts: Option<Vec<Polyhedron>> = factors.iter().map(|f| f.as_polyhedron()).collect();
                Some(block_diagonal(&parts?))
            }
        }
    }

    /// Projection that falls back to local methods, flagging their use.
    pub fn project_approx(&self, x: &Vector) -> Result<ProjectionResult> {
        check_dim(self.dim(), x.dim())?;
        if let SetSpec::Affine { base, directions } = self {
            return Ok(ProjectionResult { point: project_affine(base, directions, x), approximate: false });
        }
        if let Some(p) = self.as_polyhedron() {
            return Ok(ProjectionResult { point: project_onto(&p, x)?.point, approximate: false });
        }
        match self {
            SetSpec::Ball { center, radius } => {
                let d = x.dist(center);
                let point = if d <= *radius {
                    x.clone()
                } else {
                    center.axpy(radius / d, &(x - center))
                };
                Ok(ProjectionResult { point, approximate: false })
            }
            SetSpec::Translate { inner, shift } => {
                let r = inner.project_approx(&(x - shift))?;
                Ok(ProjectionResult { point: r.point + shift, approximate: r.approximate })
            }
            SetSpec::Union { members } => {
                let mut best: Option<(f64, ProjectionResult)> = None;
                for m in members {
                    let r = m.project_approx(x)?;
                    let d = x.dist(&r.point);
                    if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                        best = Some((d, r));
                    }
                }
                Ok(best.expect("validated nonempty").1)
            }
            SetSpec::Product { factors } => {
                let mut coords = Vec::with_capacity(x.dim());
                let mut approximate = false;
                let mut off = 0;
                for f in factors {
                    let k = f.dim();
                    let r = f.project_approx(&Vector::from_slice(&x.as_slice()[off..off + k]))?;
                    approximate |= r.approximate;
                    coords.extend_from_slice(r.point.as_slice());
                    off += k;
                }
                Ok(ProjectionResult { point: Vector::from_vec(coords), approximate })
            }
            SetSpec::LevelSet { g, sense } => {
                let h = |z: &[f64]| (g.eval_unchecked(z), g.grad(z));
                let y = smooth::project_local(&h, x.as_slice(), *sense == LevelSense::Eq)?;
                Ok(ProjectionResult { point: Vector::from_vec(y), approximate: true })
            }
            SetSpec::Epigraph { f } => {
                let n = f.dim();
                let h = EpiConstraint { f, n };
                let y = smooth::project_local(&h, x.as_slice(), false)?;
                Ok(ProjectionResult { point: Vector::from_vec(y), approximate: true })
            }
            SetSpec::Polyhedron(_) | SetSpec::Affine { .. } => unreachable!("handled as polyhedron"),
        }
    }

    /// Metric projection onto a convex set, or onto a union of convex sets.
    ///
    /// Nonconvex level sets and epigraphs are rejected; use
    /// [`SetSpec::project_approx`] to request the local fallback explicitly.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        if !self.projection_supported() {
            return Err(Error::Unsupported(
                "projection onto a nonconvex smooth set needs the approximate fallback".into(),
            ));
        }
        Ok(self.project_approx(x)?.point)
    }

    fn projection_supported(&self) -> bool {
        match self {
            SetSpec::Union { members } => members.iter().all(|m| m.projection_supported()),
            SetSpec::Product { factors } => factors.iter().all(|f| f.projection_supported()),
            SetSpec::Translate { inner, .. } => inner.projection_supported(),
            _ => self.is_convex(),
        }
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        match self {
            SetSpec::Ball { center, radius } => Ok((x.dist(center) - radius).max(0.0)),
            SetSpec::Union { members } => {
                let mut best = f64::INFINITY;
                for m in members {
                    best = best.min(m.distance(x)?);
                }
                Ok(best)
            }
            SetSpec::Translate { inner, shift } => inner.distance(&(x - shift)),
            _ => {
                if let SetSpec::Polyhedron(p) = self {
                    if p.residual(x.as_slice()) <= 0.0 {
                        return Ok(0.0);
                    }
                }
                let y = self.project_approx(x)?.point;
                Ok(x.dist(&y))
            }
        }
    }

    /// Distance measured in `kind`.
    ///
    /// The max-product norm is supported for two-factor products split at the
    /// first factor, where it equals the larger blockwise distance.
    pub fn distance_in(&self, x: &Vector, kind: NormKind) -> Result<f64> {
        match kind {
            NormKind::Euclidean => self.distance(x),
            NormKind::MaxProduct { split } => {
                check_dim(self.dim(), x.dim())?;
                match self {
                    SetSpec::Product { factors } if factors.len() == 2 && factors[0].dim() == split => {
                        let d1 = factors[0].distance(&x.head(split))?;
                        let d2 = factors[1].distance(&x.tail(split))?;
                        Ok(d1.max(d2))
                    }
                    _ => {
                        if self.distance(x)? == 0.0 {
                            Ok(0.0)
                        } else {
                            Err(Error::Unsupported("max-product distance needs a split product set".into()))
                        }
                    }
                }
            }
        }
    }

    /// `distance(x) ≤ tol`.
    pub fn member(&self, x: &Vector, tol: f64) -> Result<bool> {
        check_dim(self.dim(), x.dim())?;
        if let SetSpec::Union { members } = self {
            for m in members {
                if m.member(x, tol)? {
                    return Ok(true);
                }
            }
            return Ok(false);
        }
        Ok(self.distance(x)? <= tol)
    }
}

struct EpiConstraint<'a> {
    f: &'a ScalarFn,
    n: usize,
}

impl smooth::Constraint for EpiConstraint<'_> {
    fn eval(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let (x, s) = z.split_at(self.n);
        let mut g = self.f.grad(x);
        g.push(-1.0);
        (self.f.eval_unchecked(x) - s[0], g)
    }

    fn admissible(&self, z: &[f64]) -> bool {
        self.f.in_domain(&z[..self.n])
    }
}

fn is_single_affine(g: &ScalarFn) -> bool {
    matches!(g, ScalarFn::MaxAffine { pieces, domain: None, .. } if pieces.len() == 1)
}

fn point_polyhedron(p: &Vector) -> Polyhedron {
    let n = p.dim();
    let a_eq = (0..n).map(|i| Vector::unit(n, i).into_vec()).collect();
    Polyhedron { dim: n, a: vec![], b: vec![], a_eq, b_eq: p.as_slice().to_vec() }
}

/// Orthonormal basis of the orthogonal complement of `span(dirs)`, built by
/// Gram-Schmidt over the standard basis.
pub(crate) fn complement_basis(n: usize, dirs: &[Vector]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for d in dirs {
        let mut v = d.as_slice().to_vec();
        orthogonalize(&mut v, &basis);
        let nv = norm2(&v);
        if nv > 1e-10 * (1.0 + d.norm()) {
            basis.push(v.iter().map(|c| c / nv).collect());
        }
    }
    let span_rank = basis.len();
    for i in 0..n {
        let mut v = Vector::unit(n, i).into_vec();
        orthogonalize(&mut v, &basis);
        let nv = norm2(&v);
        if nv > 1e-8 {
            basis.push(v.iter().map(|c| c / nv).collect());
        }
        if basis.len() == n {
            break;
        }
    }
    basis.split_off(span_rank)
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
}

fn affine_polyhedron(base: &Vector, dirs: &[Vector]) -> Polyhedron {
    let n = base.dim();
    if dirs.is_empty() {
        return point_polyhedron(base);
    }
    let rows = complement_basis(n, dirs);
    let b_eq = rows.iter().map(|r| dot(r, base.as_slice())).collect();
    Polyhedron { dim: n, a: vec![], b: vec![], a_eq: rows, b_eq }
}

fn block_diagonal(parts: &[Polyhedron]) -> Polyhedron {
    let dim: usize = parts.iter().map(|p| p.dim).sum();
    let mut out = Polyhedron::whole_space(dim);
    let mut off = 0;
    for p in parts {
        let lift = |r: &Vec<f64>| {
            let mut row = vec![0.0; dim];
            row[off..off + p.dim].copy_from_slice(r);
            row
        };
        out.a.extend(p.a.iter().map(lift));
        out.b.extend_from_slice(&p.b);
        out.a_eq.extend(p.a_eq.iter().map(lift));
        out.b_eq.extend_from_slice(&p.b_eq);
        off += p.dim;
    }
    out
}

/// Least-squares projection onto `base + span(dirs)`.
pub(crate) fn project_affine(base: &Vector, dirs: &[Vector], x: &Vector) -> Vector {
    if dirs.is_empty() {
        return base.clone();
    }
    let n = base.dim();
    let d = DMatrix::from_fn(n, dirs.len(), |i, j| dirs[j][i]);
    let rhs = DVector::from_iterator(n, (x - base).into_vec());
    let svd = d.clone().svd(true, true);
    let c = svd.solve(&rhs, 1e-12).unwrap_or_else(|_| DVector::zeros(dirs.len()));
    let step = d * c;
    base + Vector::from_vec(step.iter().copied().collect())
}
