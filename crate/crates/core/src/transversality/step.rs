//! Search for tangential steps that shrink the gap between two points.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sampling::nearest;
use super::StepPair;
use crate::error::{Error, Result};
use crate::numkernel::{Vector, FEAS_TOL};
use crate::sets::{project_intersection, PointInSet, SetSpec};

/// Smallest step of the search grid, relative to its first step.
pub const T_FLOOR: f64 = 1e-8;
/// Relative head-room added to the requested rate so that round-off never
/// turns an exact decrease into a failed check.
const RATE_MARGIN: f64 = 1e-7;
const RANDOM_PER_STEP: usize = 4;

/// Geometric grid `t0 2^{-m}` down to `t0` times [`T_FLOOR`], with `t0 = min(δ, gap/η)`.
pub fn step_grid(gap: f64, delta: f64, eta: f64) -> Vec<f64> {
    let t0 = delta.min(gap / eta);
    let mut t = t0;
    let mut out = Vec::new();
    while t > 0.0 && t >= t0 * T_FLOOR && out.len() < 64 {
        out.push(t);
        t *= 0.5;
    }
    out
}

/// Independent check of every defining inequality of a step.
pub fn verify_step(
    a: &SetSpec,
    b: &SetSpec,
    x_a: &Vector,
    x_b: &Vector,
    step: &StepPair,
    m: f64,
    eta: f64,
) -> bool {
    let t = step.t;
    if !(t > 0.0) {
        return false;
    }
    let bound = m * (1.0 + 1e-12);
    if step.w_a.norm() > bound || step.w_b.norm() > bound {
        return false;
    }
    let ya = x_a.axpy(t, &step.w_a);
    let yb = x_b.axpy(t, &step.w_b);
    let member = |s: &SetSpec, y: &Vector| s.distance(y).is_ok_and(|d| d <= FEAS_TOL);
    if !member(a, &ya) || !member(b, &yb) {
        return false;
    }
    let gap = x_a.dist(x_b);
    let after = (&(x_a - x_b) + &(&(&step.w_a - &step.w_b) * t)).norm();
    after <= gap - t * eta
}

fn make_step(x_a: &Vector, x_b: &Vector, t: f64, ya: &Vector, yb: &Vector) -> StepPair {
    let w_a = (ya - x_a).scale(1.0 / t);
    let w_b = (yb - x_b).scale(1.0 / t);
    StepPair {
        t,
        gap_before: x_a.dist(x_b),
        gap_after: (&(x_a - x_b) + &(&(&w_a - &w_b) * t)).norm(),
        w_a,
        w_b,
    }
}

/// Minimal correction `z` with `xA + t w1 + z ∈ A` and `xB + t w2 + z ∈ B`.
fn common_shift(a: &SetSpec, b: &SetSpec, pa: &Vector, pb: &Vector) -> Option<Vector> {
    let sa = a.clone().translate(-pa);
    let sb = b.clone().translate(-pb);
    let z = project_intersection(&sa, &sb, &Vector::zeros(pa.dim())).ok()?;
    Some(z.point)
}

/// Rescales both velocities to norm exactly `m` (saturated) or at most `m` (clamped).
fn rescaled(x_a: &Vector, x_b: &Vector, step: &StepPair, m: f64) -> [StepPair; 2] {
    let fit = |w: &Vector, cap: bool| {
        let n = w.norm();
        if n == 0.0 || (cap && n <= m) { w.clone() } else { w.scale(m / n) }
    };
    let build = |cap: bool| {
        let (wa, wb) = (fit(&step.w_a, cap), fit(&step.w_b, cap));
        make_step(x_a, x_b, step.t, &x_a.axpy(step.t, &wa), &x_b.axpy(step.t, &wb))
    };
    [build(true), build(false)]
}

/// Candidate steps at step size `t` aiming at rate `s` along `u = (xB − xA)/gap`.
#[allow(clippy::too_many_arguments)]
fn candidates(
    a: &SetSpec,
    b: &SetSpec,
    x_a: &Vector,
    x_b: &Vector,
    t: f64,
    s: f64,
    m: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<StepPair> {
    let gap = x_a.dist(x_b);
    let u = (x_b - x_a).scale(1.0 / gap);
    let mut out = Vec::new();
    // Shift one or both points toward each other, then repair both with a common correction.
    for sigma in [1.0, 0.5, 0.0] {
        let pa = x_a.axpy(t * sigma * s, &u);
        let pb = x_b.axpy(-t * (1.0 - sigma) * s, &u);
        if let Some(z) = common_shift(a, b, &pa, &pb) {
            out.push(make_step(x_a, x_b, t, &(&pa + &z), &(&pb + &z)));
        }
    }
    // Move each point toward the other and re-project.
    for (ka, kb) in [(1.0, 1.0), (1.0, 0.0), (0.0, 1.0), (0.5, 0.5)] {
        let ya = if ka > 0.0 { nearest(a, &x_a.axpy(t * ka * s, &u)) } else { Ok(x_a.clone()) };
        let yb = if kb > 0.0 { nearest(b, &x_b.axpy(-t * kb * s, &u)) } else { Ok(x_b.clone()) };
        if let (Ok(ya), Ok(yb)) = (ya, yb) {
            out.push(make_step(x_a, x_b, t, &ya, &yb));
        }
    }
    // Perturbed directions.
    for _ in 0..RANDOM_PER_STEP {
        let noise = Vector::random_unit(rng, u.dim());
        let v = u.axpy(0.5, &noise);
        let ya = nearest(a, &x_a.axpy(0.5 * t * s, &v));
        let yb = nearest(b, &x_b.axpy(-0.5 * t * s, &v));
        if let (Ok(ya), Ok(yb)) = (ya, yb) {
            out.push(make_step(x_a, x_b, t, &ya, &yb));
        }
    }
    // Shorter steps stay feasible in convex sets; longer ones reach the corners of the M-box.
    let extra: Vec<StepPair> = out.iter().flat_map(|st| rescaled(x_a, x_b, st, m)).collect();
    out.extend(extra);
    out
}

/// Finds a step with `‖wA‖, ‖wB‖ ≤ M` reducing the gap by at least `t η`
/// for some `t` in `tgrid`; the returned step has been re-verified.
pub fn tangential_step_oracle(
    a: &SetSpec,
    b: &SetSpec,
    x_a: &PointInSet,
    x_b: &PointInSet,
    m: f64,
    eta: f64,
    tgrid: &[f64],
) -> Result<Option<StepPair>> {
    if x_a.point == x_b.point {
        return Err(Error::Precondition("step oracle needs two different points".into()));
    }
    if !(m > 0.0 && eta > 0.0) {
        return Err(Error::InvalidArgument("M and eta must be positive".into()));
    }
    Ok(find_step(a, b, &x_a.point, &x_b.point, m, eta, tgrid))
}

pub(crate) fn find_step(
    a: &SetSpec,
    b: &SetSpec,
    x_a: &Vector,
    x_b: &Vector,
    m: f64,
    eta: f64,
    tgrid: &[f64],
) -> Option<StepPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let s = eta * (1.0 + RATE_MARGIN);
    for &t in tgrid {
        for step in candidates(a, b, x_a, x_b, t, s, m, &mut rng) {
            if verify_step(a, b, x_a, x_b, &step, m, eta) {
                return Some(step);
            }
        }
    }
    None
}

/// Largest rate among `levels` (tried in decreasing order) for which a step exists.
pub fn best_step_rate(
    a: &SetSpec,
    b: &SetSpec,
    x_a: &Vector,
    x_b: &Vector,
    m: f64,
    delta: f64,
    levels: &[f64],
) -> Option<(f64, StepPair)> {
    let gap = x_a.dist(x_b);
    levels.iter().find_map(|&eta| {
        let grid = step_grid(gap, delta, eta);
        find_step(a, b, x_a, x_b, m, eta, &grid).map(|s| (eta, s))
    })
}
