//! Euclidean projection onto a polyhedron by a primal active-set method.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lp::{lp_solve, Bound, LpProblem, LpStatus};
use super::vector::{dot, norm2, Vector};
use crate::error::{check_dim, Error, Result};

/// `{y : a y ≤ b, a_eq y = b_eq}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyhedron {
    pub dim: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub a_eq: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b_eq: Vec<f64>,
}

impl Polyhedron {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let dim = a.first().map(|r| r.len()).ok_or_else(|| {
            Error::InvalidArgument("polyhedron needs at least one row; use `whole_space`".into())
        })?;
        let p = Self { dim, a, b, a_eq: vec![], b_eq: vec![] };
        p.validate()?;
        Ok(p)
    }

    pub fn whole_space(dim: usize) -> Self {
        Self { dim, a: vec![], b: vec![], a_eq: vec![], b_eq: vec![] }
    }

    pub fn with_equalities(mut self, a_eq: Vec<Vec<f64>>, b_eq: Vec<f64>) -> Result<Self> {
        self.a_eq = a_eq;
        self.b_eq = b_eq;
        self.validate()?;
        Ok(self)
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn boxed(lo: &[f64], hi: &[f64]) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        let n = lo.len();
        let mut a = Vec::with_capacity(2 * n);
        let mut b = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            a.push(r.clone());
            b.push(hi[i]);
            r[i] = -1.0;
            a.push(r);
            b.push(-lo[i]);
        }
        Self::new(a, b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument("polyhedron dimension must be positive".into()));
        }
        check_dim(self.a.len(), self.b.len())?;
        check_dim(self.a_eq.len(), self.b_eq.len())?;
        for r in self.a.iter().chain(&self.a_eq) {
            check_dim(self.dim, r.len())?;
        }
        let finite = self.a.iter().chain(&self.a_eq).flatten().all(|v| v.is_finite())
            && self.b.iter().chain(&self.b_eq).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("polyhedron data must be finite".into()));
        }
        Ok(())
    }

    pub fn num_constraints(&self) -> usize {
        self.a.len() + self.a_eq.len()
    }

    /// Largest violation of any constraint, scaled by the row norm.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for (r, b) in self.a.iter().zip(&self.b) {
            let n = norm2(r);
            if n > 0.0 {
                worst = worst.max((dot(r, x) - b) / n);
            } else if *b < 0.0 {
                worst = f64::INFINITY;
            }
        }
        for (r, b) in self.a_eq.iter().zip(&self.b_eq) {
            let n = norm2(r);
            if n > 0.0 {
                worst = worst.max((dot(r, x) - b).abs() / n);
            } else if *b != 0.0 {
                worst = f64::INFINITY;
            }
        }
        worst
    }

    /// Some point of the polyhedron, or `None` when it is empty.
    pub fn feasible_point(&self) -> Result<Option<Vector>> {
        let mut lp = LpProblem::new(vec![0.0; self.dim]);
        lp.a_ub = self.a.clone();
        lp.b_ub = self.b.clone();
        lp.a_eq = self.a_eq.clone();
        lp.b_eq = self.b_eq.clone();
        let r = lp_solve(&lp)?;
        Ok(r.is_optimal().then(|| Vector::from_vec(r.x)))
    }
}

/// Output of [`project_onto`].
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Vector,
    /// Indices of inequality rows in the final working set.
    pub active: Vec<usize>,
    /// Multipliers of the active inequality rows (same order as `active`).
    pub multipliers: Vec<f64>,
    pub iterations: usize,
}

/// Projects `x` onto `{y : A y ≤ b}`.
pub fn project_polyhedron(x: &Vector, a: &[Vec<f64>], b: &[f64]) -> Result<Vector> {
    let poly = Polyhedron {
        dim: x.dim(),
        a: a.to_vec(),
        b: b.to_vec(),
        a_eq: vec![],
        b_eq: vec![],
    };
    poly.validate()?;
    Ok(project_onto(&poly, x)?.point)
}

/// Projects `x` onto `poly`.
///
/// The working set starts at the constraints active at an LP-computed point
/// close to `x` in the 1-norm. Each iteration costs one small dense solve; the
/// iteration cap is `10 · constraints` (at least 20).
pub fn project_onto(poly: &Polyhedron, x: &Vector) -> Result<Projection> {
    poly.validate()?;
    check_dim(poly.dim, x.dim())?;
    let n = poly.dim;

    // Normalize rows; drop zero rows after checking their consistency.
    let mut ineq: Vec<(usize, Vec<f64>, f64)> = Vec::new();
    for (i, (r, b)) in poly.a.iter().zip(&poly.b).enumerate() {
        let s = norm2(r);
        if s == 0.0 {
            if *b < 0.0 {
                return Err(Error::Infeasible("zero row with negative right-hand side".into()));
            }
            continue;
        }
        ineq.push((i, r.iter().map(|v| v / s).collect(), b / s));
    }
    let mut eqs: Vec<(Vec<f64>, f64)> = Vec::new();
    for (r, b) in poly.a_eq.iter().zip(&poly.b_eq) {
        let s = norm2(r);
        if s == 0.0 {
            if *b != 0.0 {
                return Err(Error::Infeasible("zero equality row with nonzero right-hand side".into()));
            }
            continue;
        }
        eqs.push((r.iter().map(|v| v / s).collect(), b / s));
    }

    let xs = x.as_slice();
    let feasible_now = ineq.iter().all(|(_, r, b)| dot(r, xs) <= *b)
        && eqs.iter().all(|(r, b)| dot(r, xs) == *b);
    if feasible_now {
        return Ok(Projection { point: x.clone(), active: vec![], multipliers: vec![], iterations: 0 });
    }

    let mut y = l1_closest(n, &ineq, &eqs, xs)?;

    // Working set: equality rows first, then inequality indices into `ineq`.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut work_eq: Vec<usize> = Vec::new();
    for (k, (r, _)) in eqs.iter().enumerate() {
        if independent(&basis, r) {
            basis.push(r.clone());
            work_eq.push(k);
        }
    }
    let mut work: Vec<usize> = Vec::new();
    for (k, (_, r, b)) in ineq.iter().enumerate() {
        if (dot(r, &y) - b).abs() <= 1e-10 * (1.0 + b.abs()) && independent(&basis, r) {
            basis.push(r.clone());
            work.push(k);
        }
    }

    let m = poly.num_constraints();
    let cap = (10 * m).max(20);
    let mut iterations = 0;
    loop {
        if iterations >= cap {
            return Err(Error::NonConvergence { what: "active-set projection", iterations });
        }
        iterations += 1;
        let rows: Vec<&[f64]> = work_eq
            .iter()
            .map(|&k| eqs[k].0.as_slice())
            .chain(work.iter().map(|&k| ineq[k].1.as_slice()))
            .collect();
        let g: Vec<f64> = y.iter().zip(xs).map(|(a, b)| a - b).collect();
        let lambda = solve_gram(&rows, &rows.iter().map(|r| dot(r, &g)).collect::<Vec<_>>());
        let p: Vec<f64> = off_span(&rows, &g).iter().map(|v| -v).collect();
        if norm2(&p) <= 1e-13 * (1.0 + norm2(&g)) {
            // Multipliers of inequality rows are -lambda.
            let ne = work_eq.len();
            let worst = work
                .iter()
                .enumerate()
                .map(|(pos, _)| (pos, -lambda[ne + pos]))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match worst {
                Some((pos, mu)) if mu < -1e-12 => {
                    work.remove(pos);
                    continue;
                }
                _ => {
                    let mut mult: Vec<f64> = (0..work.len()).map(|pos| -lambda[ne + pos]).collect();
                    let polished = polish(xs, &eqs, &ineq, &work_eq, &work);
                    if let Some((yp, mp)) = polished {
                        y = yp;
                        mult = mp;
                    }
                    let active = work.iter().map(|&k| ineq[k].0).collect();
                    return Ok(Projection { point: Vector::from_vec(y), active, multipliers: mult, iterations });
                }
            }
        }
        // Step toward the subproblem minimizer, stopping at the first blocking row.
        let mut alpha = 1.0;
        let mut block: Option<usize> = None;
        for (k, (_, r, b)) in ineq.iter().enumerate() {
            if work.contains(&k) {
                continue;
            }
            let ap = dot(r, &p);
            if ap > 1e-14 {
                let step = ((b - dot(r, &y)) / ap).max(0.0);
                if step < alpha {
                    alpha = step;
                    block = Some(k);
                }
            }
        }
        for (yi, pi) in y.iter_mut().zip(&p) {
            *yi += alpha * pi;
        }
        if let Some(k) = block {
            work.push(k);
        }
    }
}

fn independent(basis: &[Vec<f64>], r: &[f64]) -> bool {
    if basis.is_empty() {
        return norm2(r) > 1e-12;
    }
    let coef = solve_gram(&basis.iter().map(|v| v.as_slice()).collect::<Vec<_>>(),
        &basis.iter().map(|v| dot(v, r)).collect::<Vec<_>>());
    let mut res = r.to_vec();
    for (v, c) in basis.iter().zip(&coef) {
        for (ri, vi) in res.iter_mut().zip(v) {
            *ri -= c * vi;
        }
    }
    norm2(&res) > 1e-9
}

/// Component of `g` orthogonal to the span of `rows`.
///
/// Uses twice-iterated modified Gram-Schmidt, which stays accurate when rows
/// are nearly parallel and the normal equations are badly conditioned.
fn off_span(rows: &[&[f64]], g: &[f64]) -> Vec<f64> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        let mut v = r.to_vec();
        for _ in 0..2 {
            for qi in &q {
                let c = dot(qi, &v);
                for (vi, qv) in v.iter_mut().zip(qi) {
                    *vi -= c * qv;
                }
            }
        }
        let s = norm2(&v);
        if s > 1e-9 {
            q.push(v.iter().map(|x| x / s).collect());
        }
    }
    let mut out = g.to_vec();
    for _ in 0..2 {
        for qi in &q {
            let c = dot(qi, &out);
            for (oi, qv) in out.iter_mut().zip(qi) {
                *oi -= c * qv;
            }
        }
    }
    out
}

/// Solves `(R Rᵀ) λ = rhs` for the stacked rows `R`.
fn solve_gram(rows: &[&[f64]], rhs: &[f64]) -> Vec<f64> {
    let k = rows.len();
    if k == 0 {
        return vec![];
    }
    let g = DMatrix::from_fn(k, k, |i, j| dot(rows[i], rows[j]));
    let r = DVector::from_column_slice(rhs);
    if let Some(ch) = g.clone().cholesky() {
        return ch.solve(&r).iter().copied().collect();
    }
    let svd = g.svd(true, true);
    match svd.solve(&r, 1e-12) {
        Ok(s) => s.iter().copied().collect(),
        Err(_) => vec![0.0; k],
    }
}

/// Re-solves the projection onto the affine hull of the working set and
/// accepts it if it stays feasible with nonnegative multipliers.
fn polish(
    x: &[f64],
    eqs: &[(Vec<f64>, f64)],
    ineq: &[(usize, Vec<f64>, f64)],
    work_eq: &[usize],
    work: &[usize],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let rows: Vec<&[f64]> = work_eq
        .iter()
        .map(|&k| eqs[k].0.as_slice())
        .chain(work.iter().map(|&k| ineq[k].1.as_slice()))
        .collect();
    let rhs: Vec<f64> = work_eq
        .iter()
        .map(|&k| eqs[k].1)
        .chain(work.iter().map(|&k| ineq[k].2))
        .collect();
    let resid: Vec<f64> = rows.iter().zip(&rhs).map(|(r, b)| dot(r, x) - b).collect();
    let mu = solve_gram(&rows, &resid);
    let mut y = x.to_vec();
    for (r, m) in rows.iter().zip(&mu) {
        for (yi, ri) in y.iter_mut().zip(r.iter()) {
            *yi -= m * ri;
        }
    }
    let ne = work_eq.len();
    let mult: Vec<f64> = mu[ne..].to_vec();
    let ok = mult.iter().all(|m| *m >= -1e-10)
        && ineq.iter().all(|(_, r, b)| dot(r, &y) <= b + 1e-12 * (1.0 + b.abs()))
        && eqs.iter().all(|(r, b)| (dot(r, &y) - b).abs() <= 1e-12 * (1.0 + b.abs()));
    ok.then_some((y, mult))
}

/// Feasible point minimizing the 1-norm distance to `x`.
fn l1_closest(
    n: usize,
    ineq: &[(usize, Vec<f64>, f64)],
    eqs: &[(Vec<f64>, f64)],
    x: &[f64],
) -> Result<Vec<f64>> {
    // Variables: y (free, n) then d (nonneg, n).
    let mut c = vec![0.0; 2 * n];
    for ci in c.iter_mut().skip(n) {
        *ci = 1.0;
    }
    let mut lp = LpProblem::new(c);
    lp.bounds = (0..2 * n).map(|j| if j < n { Bound::FREE } else { Bound::NONNEG }).collect();
    for j in 0..n {
        let mut r = vec![0.0; 2 * n];
        r[j] = 1.0;
        r[n + j] = -1.0;
        lp = lp.leq(r.clone(), x[j]);
        r[j] = -1.0;
        lp = lp.leq(r, -x[j]);
    }
    for (_, r, b) in ineq {
        let mut row = r.clone();
        row.resize(2 * n, 0.0);
        lp = lp.leq(row, *b);
    }
    for (r, b) in eqs {
        let mut row = r.clone();
        row.resize(2 * n, 0.0);
        lp = lp.eq(row, *b);
    }
    let res = lp_solve(&lp)?;
    match res.status {
        LpStatus::Optimal => Ok(res.x[..n].to_vec()),
        LpStatus::Infeasible => Err(Error::Infeasible("empty polyhedron".into())),
        LpStatus::Unbounded => Err(Error::Unbounded),
    }
}
