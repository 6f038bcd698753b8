//! Sampled check of the translate-intersection characterization of transversality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sampling::{points_in_set, shell_points};
use super::{Budget, Constants, Evidence, Notion, Status, TransversalityCertificate, Witness};
use crate::error::{Error, Result};
use crate::numkernel::{Vector, FEAS_TOL};
use crate::sets::{project_intersection, SetSpec};

/// Fractions of `δ` used as radii `ρ`.
const RHO_FRACTIONS: [f64; 6] = [0.999, 0.5, 0.25, 0.1, 0.01, 0.001];
/// Base points kept per set.
const BASE_POINTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KrugerOptions {
    /// Allow non-polyhedral sets, checked through iterative projection onto the intersection.
    pub sampled_fallback: bool,
}

/// Outcome of one tuple: the smallest norm of a point of the translated intersection.
enum Probe {
    Nonempty(f64),
    Empty,
}

fn probe(a: &SetSpec, b: &SetSpec, shift_a: &Vector, shift_b: &Vector) -> Result<Probe> {
    let sa = a.clone().translate(-shift_a);
    let sb = b.clone().translate(-shift_b);
    match project_intersection(&sa, &sb, &Vector::zeros(shift_a.dim())) {
        Ok(p) => Ok(Probe::Nonempty(p.point.norm())),
        Err(Error::Infeasible(_)) => Ok(Probe::Empty),
        Err(e) => Err(e),
    }
}

/// Unit directions worth trying for `w1, w2`: coordinate axes, constraint normals, seeded extras.
fn w_directions(a: &SetSpec, b: &SetSpec, n: usize, rng: &mut ChaCha8Rng, extra: usize) -> Vec<Vector> {
    let mut out = Vec::new();
    for i in 0..n {
        let e = Vector::unit(n, i);
        out.push(-&e);
        out.push(e);
    }
    for s in [a, b] {
        if let Some(p) = s.as_polyhedron() {
            for row in p.a.iter().chain(p.a_eq.iter()) {
                if let Some(u) = Vector::from_slice(row).normalized() {
                    out.push(-&u);
                    out.push(u);
                }
            }
        }
    }
    for _ in 0..extra {
        out.push(Vector::random_unit(rng, n));
    }
    let mut uniq: Vec<Vector> = Vec::new();
    for u in out {
        if !uniq.iter().any(|v| v.dist(&u) < 1e-12) {
            uniq.push(u);
        }
    }
    uniq
}

/// Checks `(A − xA − ρw1) ∩ (B − xB − ρw2) ∩ ρB̄ ≠ ∅` over sampled
/// `ρ ∈ (0, δ)`, `w1, w2 ∈ αB̄` and base points in the `δ`-balls.
pub fn certify_transversality_kruger(
    a: &SetSpec,
    b: &SetSpec,
    x0: &Vector,
    alpha: f64,
    delta: f64,
    budget: Budget,
) -> Result<TransversalityCertificate> {
    certify_transversality_kruger_with(a, b, x0, alpha, delta, budget, KrugerOptions::default())
}

pub fn certify_transversality_kruger_with(
    a: &SetSpec,
    b: &SetSpec,
    x0: &Vector,
    alpha: f64,
    delta: f64,
    budget: Budget,
    options: KrugerOptions,
) -> Result<TransversalityCertificate> {
    if !(alpha > 0.0 && delta > 0.0) {
        return Err(Error::InvalidArgument("alpha and delta must be positive".into()));
    }
    for (s, name) in [(a, "A"), (b, "B")] {
        let d = s.distance(x0)?;
        if d > FEAS_TOL {
            return Err(Error::Precondition(format!("x0 is not in {name} (distance {d:e})")));
        }
    }
    let polyhedral = a.as_polyhedron().is_some() && b.as_polyhedron().is_some();
    if !polyhedral && !options.sampled_fallback {
        return Err(Error::Unsupported("non-polyhedral set without the sampled fallback".into()));
    }
    let n = x0.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let small = Budget::new((budget.samples / 4).max(4), budget.seed);
    let shell = shell_points(x0, delta, small);
    let base = |s: &SetSpec| {
        let mut pts = vec![x0.clone()];
        for p in points_in_set(s, x0, delta, &shell) {
            if pts.len() >= BASE_POINTS {
                break;
            }
            if p.dist(x0) > 0.0 {
                pts.push(p);
            }
        }
        pts
    };
    let xs_a = base(a);
    let xs_b = base(b);
    let dirs = w_directions(a, b, n, &mut rng, budget.samples / 4);

    // Structured tuples at x0 over all direction pairs, then seeded tuples over everything.
    let mut tuples: Vec<(f64, Vector, Vector, Vector, Vector)> = Vec::new();
    for &f in &RHO_FRACTIONS {
        let rho = f * delta;
        for u in &dirs {
            for v in &dirs {
                tuples.push((rho, u * alpha, v * alpha, x0.clone(), x0.clone()));
            }
            tuples.push((rho, u * alpha, Vector::zeros(n), x0.clone(), x0.clone()));
        }
    }
    for _ in 0..budget.samples * 8 {
        let rho = delta * RHO_FRACTIONS[rng.gen_range(0..RHO_FRACTIONS.len())];
        let r1 = alpha * (0.5 + 0.5 * rng.gen::<f64>());
        let w1 = &dirs[rng.gen_range(0..dirs.len())] * r1;
        let w2 = &dirs[rng.gen_range(0..dirs.len())] * alpha;
        let xa = xs_a[rng.gen_range(0..xs_a.len())].clone();
        let xb = xs_b[rng.gen_range(0..xs_b.len())].clone();
        tuples.push((rho, w1, w2, xa, xb));
    }

    let mut marginal = 0usize;
    for (rho, w1, w2, xa, xb) in &tuples {
        let shift_a = xa.axpy(*rho, w1);
        let shift_b = xb.axpy(*rho, w2);
        let (excess, norm) = match probe(a, b, &shift_a, &shift_b)? {
            Probe::Empty => (f64::INFINITY, None),
            Probe::Nonempty(z) => (z - rho, Some(z)),
        };
        if excess <= FEAS_TOL {
            continue;
        }
        if excess < 10.0 * FEAS_TOL {
            marginal += 1;
            continue;
        }
        let witness = Witness {
            description: match norm {
                None => "translated sets do not meet".into(),
                Some(_) => "translated sets meet only outside the rho-ball".into(),
            },
            points: vec![xa.clone(), xb.clone()],
            directions: vec![w1.clone(), w2.clone()],
            value: norm,
            bound: Some(*rho),
        };
        let mut c = TransversalityCertificate::new(
            Notion::Transversal,
            x0,
            Status::Refuted { witness },
            Evidence::Empirical,
        );
        c.constants = Constants { alpha: Some(alpha), delta: Some(delta), ..Default::default() };
        c.samples = tuples.len();
        return Ok(c);
    }
    let status = if marginal > 0 {
        Status::Inconclusive { reason: format!("{marginal} tuples within 10x tolerance of the bound") }
    } else {
        Status::Certified
    };
    let mut c = TransversalityCertificate::new(Notion::Transversal, x0, status, Evidence::Empirical);
    c.constants = Constants { alpha: Some(alpha), delta: Some(delta), ..Default::default() };
    c.samples = tuples.len();
    if !polyhedral {
        c.notes.push("non-polyhedral pair checked through iterative projection".into());
    }
    Ok(c)
}
