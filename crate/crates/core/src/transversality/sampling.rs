//! Deterministic sample points and pairs near a base point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Budget;
use crate::cones::direction_net;
use crate::error::Result;
use crate::numkernel::{Vector, FEAS_TOL};
use crate::sets::SetSpec;

/// Number of dyadic radii `δ, δ/2, ...` in a shell pattern.
pub(crate) const SHELL_LEVELS: usize = 8;
/// Pairs closer than this carry no information at the feasibility tolerance.
pub(crate) const MIN_PAIR_GAP: f64 = 100.0 * FEAS_TOL;

/// Points `x0 + δ 2^{-j} u` for net directions `u`, plus seeded uniform points of the ball.
pub fn shell_points(x0: &Vector, delta: f64, budget: Budget) -> Vec<Vector> {
    let n = x0.dim();
    let dirs = direction_net(n, budget.samples.max(4), budget.seed);
    let mut out = vec![x0.clone()];
    for j in 0..SHELL_LEVELS {
        let r = delta * 0.5f64.powi(j as i32);
        for u in &dirs {
            out.push(x0 + &(u * r));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0x5eed);
    for _ in 0..budget.samples {
        let u = Vector::random_unit(&mut rng, n);
        let r = delta * rng.gen::<f64>().powf(1.0 / n as f64);
        out.push(x0 + &(&u * r));
    }
    out
}

/// Nearest point of `set`, using the local fallback for smooth nonconvex sets.
pub(crate) fn nearest(set: &SetSpec, x: &Vector) -> Result<Vector> {
    match set.project(x) {
        Ok(p) => Ok(p),
        Err(crate::Error::Unsupported(_)) => Ok(set.project_approx(x)?.point),
        Err(e) => Err(e),
    }
}

/// Projections of `candidates` onto `set` that stay within `δ` of `x0`.
pub fn points_in_set(set: &SetSpec, x0: &Vector, delta: f64, candidates: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for c in candidates {
        let Ok(p) = nearest(set, c) else { continue };
        if p.dist(x0) > delta * (1.0 + 1e-12) {
            continue;
        }
        if !set.distance(&p).is_ok_and(|d| d <= FEAS_TOL) {
            continue;
        }
        if !out.iter().any(|q| q == &p) {
            out.push(p);
        }
    }
    out
}

/// Pairs `(xA, xB)` in the `δ`-balls of `x0` intersected with `A` and `B`.
///
/// Each shell point `u` contributes `(P_A(u), P_B(u))`; pairs with one end at
/// `x0` and seeded cross pairs are added. Pairs closer than [`MIN_PAIR_GAP`]
/// are skipped.
pub fn pair_samples(a: &SetSpec, b: &SetSpec, x0: &Vector, delta: f64, budget: Budget) -> Vec<(Vector, Vector)> {
    let shell = shell_points(x0, delta, budget);
    let mut pairs = Vec::new();
    let in_ball = |p: &Vector| p.dist(x0) <= delta * (1.0 + 1e-12);
    let mut pa_all = Vec::new();
    let mut pb_all = Vec::new();
    for u in &shell {
        let (Ok(pa), Ok(pb)) = (nearest(a, u), nearest(b, u)) else { continue };
        let ok_a = in_ball(&pa) && a.distance(&pa).is_ok_and(|d| d <= FEAS_TOL);
        let ok_b = in_ball(&pb) && b.distance(&pb).is_ok_and(|d| d <= FEAS_TOL);
        if ok_a && ok_b {
            pairs.push((pa.clone(), pb.clone()));
        }
        if ok_a {
            pairs.push((pa.clone(), x0.clone()));
            pa_all.push(pa);
        }
        if ok_b {
            pairs.push((x0.clone(), pb.clone()));
            pb_all.push(pb);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0xc055);
    if !pa_all.is_empty() && !pb_all.is_empty() {
        for _ in 0..budget.samples {
            let i = rng.gen_range(0..pa_all.len());
            let j = rng.gen_range(0..pb_all.len());
            pairs.push((pa_all[i].clone(), pb_all[j].clone()));
        }
    }
    let mut out: Vec<(Vector, Vector)> = Vec::new();
    for (p, q) in pairs {
        if p.dist(&q) < MIN_PAIR_GAP {
            continue;
        }
        if !out.iter().any(|(r, s)| r == &p && s == &q) {
            out.push((p, q));
        }
    }
    out
}
