//! Local projection onto smooth constraint sets `{z : h(z) ≤ 0}` or `{z : h(z) = 0}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numkernel::{dot, norm2};

const MAX_ITERS: usize = 60;
const NEWTON_ITERS: usize = 60;
const SURFACE_TOL: f64 = 1e-11;

/// Constraint function returning value and gradient.
pub(crate) trait Constraint {
    fn eval(&self, z: &[f64]) -> (f64, Vec<f64>);
    fn admissible(&self, _z: &[f64]) -> bool {
        true
    }
}

impl<F: Fn(&[f64]) -> (f64, Vec<f64>)> Constraint for F {
    fn eval(&self, z: &[f64]) -> (f64, Vec<f64>) {
        self(z)
    }
}

/// Multi-start local projection. Returns the best admissible point found.
pub(crate) fn project_local<C: Constraint + ?Sized>(h: &C, x: &[f64], equality: bool) -> Result<Vec<f64>> {
    let (hx, gx) = h.eval(x);
    if (!equality && hx <= 0.0 || equality && hx == 0.0) && h.admissible(x) {
        return Ok(x.to_vec());
    }
    let n = x.len();
    let gn = norm2(&gx);
    let scale = if gn > 0.0 { (hx.abs() / gn).max(1e-3) } else { 1.0 };
    let mut starts = vec![x.to_vec()];
    for r in [scale, 4.0 * scale, 0.25 * scale] {
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut z = x.to_vec();
                z[i] += s * r;
                starts.push(z);
            }
        }
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in starts {
        if let Some(y) = descend(h, x, s, equality) {
            let d = dist(x, &y);
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, y));
            }
        }
    }
    best.map(|(_, y)| y).ok_or(Error::NonConvergence { what: "level-set projection", iterations: MAX_ITERS })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Fixed-point iteration `y ← x − μ∇h(y)` with `μ` from the linearized
/// constraint, finished by Newton's method on the optimality system.
fn descend<C: Constraint + ?Sized>(h: &C, x: &[f64], mut y: Vec<f64>, equality: bool) -> Option<Vec<f64>> {
    for _ in 0..MAX_ITERS {
        let (hv, g) = h.eval(&y);
        let gg = dot(&g, &g);
        if !(gg > 1e-300) || !hv.is_finite() {
            return None;
        }
        let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let mu = (hv + dot(&g, &xy)) / gg;
        let mut next: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - mu * b).collect();
        // Damp if the full step increases the constraint violation.
        let mut damp = 1.0;
        for _ in 0..30 {
            if h.eval(&next).0.abs() <= hv.abs().max(1e-14) * 1.5 + 1e-12 {
                break;
            }
            damp *= 0.5;
            next = y.iter().zip(&next).map(|(a, b)| a + damp * (b - a)).collect();
        }
        let step = dist(&next, &y);
        y = next;
        if step <= 1e-14 * (1.0 + norm2(&y)) {
            break;
        }
    }
    y = kkt_newton(h, x, y)?;
    let hv = h.eval(&y).0;
    let ok = if equality { hv.abs() <= SURFACE_TOL } else { hv <= SURFACE_TOL };
    (ok && h.admissible(&y) && y.iter().all(|v| v.is_finite())).then_some(y)
}

/// Newton's method on `y − x + λ∇h(y) = 0, h(y) = 0` with a finite-difference
/// Hessian and backtracking on the residual norm.
fn kkt_newton<C: Constraint + ?Sized>(h: &C, x: &[f64], mut y: Vec<f64>) -> Option<Vec<f64>> {
    let n = x.len();
    let (_, g0) = h.eval(&y);
    let gg0 = dot(&g0, &g0);
    if !(gg0 > 1e-300) {
        return None;
    }
    let yx: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let mut lam = -dot(&g0, &yx) / gg0;
    let residual = |y: &[f64], lam: f64| -> (Vec<f64>, f64) {
        let (hv, g) = h.eval(y);
        let mut f: Vec<f64> = (0..n).map(|i| y[i] - x[i] + lam * g[i]).collect();
        f.push(hv);
        let r = norm2(&f);
        (f, r)
    };
    let (mut f, mut r) = residual(&y, lam);
    for _ in 0..NEWTON_ITERS {
        if r <= 1e-14 * (1.0 + norm2(x)) {
            break;
        }
        let (_, g) = h.eval(&y);
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        for j in 0..n {
            let step = 1e-7 * (1.0 + y[j].abs());
            let mut yp = y.clone();
            yp[j] += step;
            let mut ym = y.clone();
            ym[j] -= step;
            let (_, gp) = h.eval(&yp);
            let (_, gm) = h.eval(&ym);
            for i in 0..n {
                let hess = (gp[i] - gm[i]) / (2.0 * step);
                jac[(i, j)] = if i == j { 1.0 } else { 0.0 } + lam * hess;
            }
            jac[(j, n)] = g[j];
            jac[(n, j)] = g[j];
        }
        let rhs = DVector::from_iterator(n + 1, f.iter().map(|v| -v));
        let d = jac.lu().solve(&rhs)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let yn: Vec<f64> = (0..n).map(|i| y[i] + t * d[i]).collect();
            let ln = lam + t * d[n];
            let (fn_, rn) = residual(&yn, ln);
            if rn < r || rn <= 1e-15 {
                y = yn;
                lam = ln;
                f = fn_;
                r = rn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Some(y)
}
