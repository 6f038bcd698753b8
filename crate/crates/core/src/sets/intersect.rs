//! Exact intersections of set descriptions and projection onto intersections.

use std::cmp::Ordering;

use super::{ProjectionResult, SetSpec};
use crate::error::{check_dim, Error, Result};
use crate::numkernel::{Polyhedron, Vector};

const DYKSTRA_CAP: usize = 20_000;

/// Exact description of `s1 ∩ s2`.
///
/// Supported: polyhedral-representable pairs (returned as a polyhedron with
/// canonically ordered rows, so the result does not depend on argument
/// order), ball pairs that are nested, equal or externally tangent, and
/// unions of supported members.
pub fn intersect(s1: &SetSpec, s2: &SetSpec) -> Result<SetSpec> {
    check_dim(s1.dim(), s2.dim())?;
    let (s1, s2) = (resolve(s1), resolve(s2));

    if let (SetSpec::Union { members: m1 }, SetSpec::Union { members: m2 }) = (&s1, &s2) {
        let mut parts = Vec::new();
        for a in m1 {
            for b in m2 {
                push_nonempty(&mut parts, intersect(a, b))?;
            }
        }
        parts.sort_by_key(|p| format!("{p:?}"));
        return finish_union(parts);
    }
    if let SetSpec::Union { members } = &s1 {
        return union_with(members, &s2);
    }
    if let SetSpec::Union { members } = &s2 {
        return union_with(members, &s1);
    }

    if let (Some(p1), Some(p2)) = (s1.as_polyhedron(), s2.as_polyhedron()) {
        let p = combine(&p1, &p2);
        if p.feasible_point()?.is_none() {
            return Err(Error::Infeasible("empty intersection".into()));
        }
        return Ok(SetSpec::Polyhedron(p));
    }

    if let (SetSpec::Ball { center: c1, radius: r1 }, SetSpec::Ball { center: c2, radius: r2 }) = (&s1, &s2) {
        // Canonical order so that the result is symmetric in the arguments.
        let ((c1, r1), (c2, r2)) = order_balls((c1, *r1), (c2, *r2));
        let d = c1.dist(c2);
        let (small, big) = if r1 <= r2 { ((c1, r1), (c2, r2)) } else { ((c2, r2), (c1, r1)) };
        if d + small.1 <= big.1 {
            return Ok(SetSpec::Ball { center: small.0.clone(), radius: small.1 });
        }
        let tol = 1e-12 * (1.0 + r1 + r2);
        if (d - (r1 + r2)).abs() <= tol {
            let p = c1.axpy(r1 / d, &(c2 - c1));
            return Ok(SetSpec::point(p));
        }
        if d > r1 + r2 {
            return Err(Error::Infeasible("disjoint balls".into()));
        }
        return Err(Error::Unsupported("lens-shaped ball intersection has no exact description".into()));
    }

    Err(Error::Unsupported(format!(
        "no exact intersection for {} and {}",
        variant_name(&s1),
        variant_name(&s2)
    )))
}

/// Projection of `x` onto `s1 ∩ s2`.
///
/// Uses the exact intersection when available, Dykstra's alternating
/// scheme for other convex pairs (flagged approximate), and member-wise
/// minimization for unions.
pub fn project_intersection(s1: &SetSpec, s2: &SetSpec, x: &Vector) -> Result<ProjectionResult> {
    check_dim(s1.dim(), s2.dim())?;
    match intersect(s1, s2) {
        Ok(s) => return s.project_approx(x),
        Err(Error::Unsupported(_)) => {}
        Err(e) => return Err(e),
    }
    let (r1, r2) = (resolve(s1), resolve(s2));
    for (u, other) in [(&r1, &r2), (&r2, &r1)] {
        if let SetSpec::Union { members } = u {
            let mut best: Option<(f64, ProjectionResult)> = None;
            for m in members {
                match project_intersection(m, other, x) {
                    Ok(p) => {
                        let d = x.dist(&p.point);
                        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                            best = Some((d, p));
                        }
                    }
                    Err(Error::Infeasible(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            return best.map(|b| b.1).ok_or_else(|| Error::Infeasible("empty intersection".into()));
        }
    }
    if let (SetSpec::Ball { center: c1, radius: r1 }, SetSpec::Ball { center: c2, radius: r2 }) = (&r1, &r2) {
        let ((c1, r1), (c2, r2)) = order_balls((c1, *r1), (c2, *r2));
        return Ok(ProjectionResult { point: project_lens(c1, r1, c2, r2, x), approximate: false });
    }
    if !(s1.is_convex() && s2.is_convex()) {
        return Err(Error::Unsupported("projection onto a nonconvex intersection".into()));
    }
    dykstra(s1, s2, x)
}

/// Projection onto the lens of two properly overlapping balls.
fn project_lens(c1: &Vector, r1: f64, c2: &Vector, r2: f64, x: &Vector) -> Vector {
    let onto = |c: &Vector, r: f64| {
        let d = x.dist(c);
        if d <= r { x.clone() } else { c.axpy(r / d, &(x - c)) }
    };
    let p1 = onto(c1, r1);
    if p1.dist(c2) <= r2 {
        return p1;
    }
    let p2 = onto(c2, r2);
    if p2.dist(c1) <= r1 {
        return p2;
    }
    // Otherwise the nearest point lies on the rim sphere where both boundaries meet.
    let d = c1.dist(c2);
    let e = (c2 - c1).scale(1.0 / d);
    let a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let rim = (r1 * r1 - a * a).max(0.0).sqrt();
    let c = c1.axpy(a, &e);
    let q = x.axpy(-(x - &c).dot(&e), &e);
    let radial = &q - &c;
    let dir = match radial.normalized() {
        Some(u) => u,
        None => {
            // x sits on the axis: every rim point is nearest; pick one deterministically.
            let k = (0..x.dim()).min_by(|&i, &j| e[i].abs().total_cmp(&e[j].abs())).unwrap_or(0);
            let ek = Vector::unit(x.dim(), k);
            ek.axpy(-ek.dot(&e), &e).normalized().unwrap_or(ek)
        }
    };
    c.axpy(rim, &dir)
}

fn dykstra(s1: &SetSpec, s2: &SetSpec, x: &Vector) -> Result<ProjectionResult> {
    let n = x.dim();
    let mut y = x.clone();
    let mut p = Vector::zeros(n);
    let mut q = Vector::zeros(n);
    for _ in 0..DYKSTRA_CAP {
        let ra = s1.project_approx(&(&y + &p))?;
        let a = ra.point;
        p = &y + &p - &a;
        let rb = s2.project_approx(&(&a + &q))?;
        let b = rb.point;
        q = &a + &q - &b;
        let change = y.dist(&b);
        y = b;
        if change <= 1e-13 * (1.0 + y.norm()) && a.dist(&y) <= 1e-11 {
            return Ok(ProjectionResult { point: y, approximate: true });
        }
    }
    Err(Error::NonConvergence { what: "Dykstra projection", iterations: DYKSTRA_CAP })
}

fn resolve(s: &SetSpec) -> SetSpec {
    match s {
        SetSpec::Translate { inner, shift } => match resolve(inner) {
            SetSpec::Ball { center, radius } => SetSpec::Ball { center: center + shift, radius },
            SetSpec::Affine { base, directions } => SetSpec::Affine { base: base + shift, directions },
            SetSpec::Union { members } => SetSpec::Union {
                members: members.into_iter().map(|m| resolve(&m.translate(shift.clone()))).collect(),
            },
            other => other.translate(shift.clone()),
        },
        SetSpec::Union { members } if members.len() == 1 => resolve(&members[0]),
        other => other.clone(),
    }
}

fn union_with(members: &[SetSpec], other: &SetSpec) -> Result<SetSpec> {
    let mut parts = Vec::new();
    for m in members {
        push_nonempty(&mut parts, intersect(m, other))?;
    }
    finish_union(parts)
}

fn push_nonempty(parts: &mut Vec<SetSpec>, r: Result<SetSpec>) -> Result<()> {
    match r {
        Ok(s) => {
            if !parts.contains(&s) {
                parts.push(s);
            }
            Ok(())
        }
        Err(Error::Infeasible(_)) => Ok(()),
        Err(e) => Err(e),
    }
}

fn finish_union(mut parts: Vec<SetSpec>) -> Result<SetSpec> {
    match parts.len() {
        0 => Err(Error::Infeasible("empty intersection".into())),
        1 => Ok(parts.pop().expect("one part")),
        _ => Ok(SetSpec::Union { members: parts }),
    }
}

fn order_balls<'a>(a: (&'a Vector, f64), b: (&'a Vector, f64)) -> ((&'a Vector, f64), (&'a Vector, f64)) {
    let key = |(c, r): (&Vector, f64)| {
        let mut k = c.as_slice().to_vec();
        k.push(r);
        k
    };
    match lex(&key(a), &key(b)) {
        Ordering::Greater => (b, a),
        _ => (a, b),
    }
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Row union with sorted, deduplicated rows.
fn combine(p1: &Polyhedron, p2: &Polyhedron) -> Polyhedron {
    let mut ineq: Vec<Vec<f64>> = p1
        .a
        .iter()
        .zip(&p1.b)
        .chain(p2.a.iter().zip(&p2.b))
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(*b);
            v
        })
        .collect();
    let mut eqs: Vec<Vec<f64>> = p1
        .a_eq
        .iter()
        .zip(&p1.b_eq)
        .chain(p2.a_eq.iter().zip(&p2.b_eq))
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(*b);
            v
        })
        .collect();
    ineq.sort_by(|a, b| lex(a, b));
    ineq.dedup();
    eqs.sort_by(|a, b| lex(a, b));
    eqs.dedup();
    let n = p1.dim;
    let split = |rows: Vec<Vec<f64>>| -> (Vec<Vec<f64>>, Vec<f64>) {
        rows.into_iter()
            .map(|mut r| {
                let b = r.pop().expect("rhs");
                (r, b)
            })
            .unzip()
    };
    let (a, b) = split(ineq);
    let (a_eq, b_eq) = split(eqs);
    Polyhedron { dim: n, a, b, a_eq, b_eq }
}

fn variant_name(s: &SetSpec) -> &'static str {
    match s {
        SetSpec::Polyhedron(_) => "polyhedron",
        SetSpec::Ball { .. } => "ball",
        SetSpec::Affine { .. } => "affine",
        SetSpec::LevelSet { .. } => "level_set",
        SetSpec::Translate { .. } => "translate",
        SetSpec::Union { .. } => "union",
        SetSpec::Epigraph { .. } => "epigraph",
        SetSpec::Product { .. } => "product",
    }
}
