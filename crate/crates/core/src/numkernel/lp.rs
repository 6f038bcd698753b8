//! Dense two-phase simplex for small linear programs.
//!
//! Problems are stated as
//!
//! ```text
//! minimize    c·x
//! subject to  A_ub x ≤ b_ub,  A_eq x = b_eq,  l ≤ x ≤ u
//! ```
//!
//! with every variable free unless bounded. Internally each variable is split
//! into a nonnegative pair, bounds become rows, and Bland's rule guarantees
//! termination. The final basis is re-solved with an LU factorization to clean
//! up accumulated tableau round-off before duals are extracted.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Optional lower and upper bound on one variable.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Bound {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Bound {
    pub const FREE: Bound = Bound { lower: None, upper: None };
    pub const NONNEG: Bound = Bound { lower: Some(0.0), upper: None };
}

/// A linear program in inequality/equality form.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    /// One entry per variable; an empty list means every variable is free.
    pub bounds: Vec<Bound>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        Self { objective, ..Default::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn leq(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.a_ub.push(row);
        self.b_ub.push(rhs);
        self
    }

    pub fn eq(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.a_eq.push(row);
        self.b_eq.push(rhs);
        self
    }

    pub fn bound(mut self, var: usize, lower: Option<f64>, upper: Option<f64>) -> Self {
        if self.bounds.is_empty() {
            self.bounds = vec![Bound::FREE; self.num_vars()];
        }
        self.bounds[var] = Bound { lower, upper };
        self
    }

    pub fn all_nonneg(mut self) -> Self {
        self.bounds = vec![Bound::NONNEG; self.num_vars()];
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::InvalidArgument("LP with no variables".into()));
        }
        check_dim(self.a_ub.len(), self.b_ub.len())?;
        check_dim(self.a_eq.len(), self.b_eq.len())?;
        for row in self.a_ub.iter().chain(&self.a_eq) {
            check_dim(n, row.len())?;
        }
        if !self.bounds.is_empty() {
            check_dim(n, self.bounds.len())?;
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.a_ub.iter().chain(&self.a_eq).flatten().all(|v| v.is_finite())
            && self.b_ub.iter().chain(&self.b_eq).all(|v| v.is_finite())
            && self
                .bounds
                .iter()
                .flat_map(|b| b.lower.into_iter().chain(b.upper))
                .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("LP data must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solution of an [`LpProblem`].
///
/// Multipliers satisfy `c + A_ubᵀλ + A_eqᵀμ − λ_lower + λ_upper = 0` with
/// `λ, λ_lower, λ_upper ≥ 0` at an optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub value: f64,
    pub duals_ub: Vec<f64>,
    pub duals_eq: Vec<f64>,
    pub duals_lower: Vec<f64>,
    pub duals_upper: Vec<f64>,
    pub iterations: usize,
}

impl LpResult {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn is_feasible(&self) -> bool {
        self.status != LpStatus::Infeasible
    }

    fn empty(status: LpStatus, n: usize, iterations: usize) -> Self {
        Self {
            status,
            x: vec![f64::NAN; n],
            value: match status {
                LpStatus::Infeasible => f64::INFINITY,
                _ => f64::NEG_INFINITY,
            },
            duals_ub: vec![],
            duals_eq: vec![],
            duals_lower: vec![],
            duals_upper: vec![],
            iterations,
        }
    }

    /// `−b_ub·λ − b_eq·μ + l·λ_lower − u·λ_upper`.
    pub fn dual_value(&self, p: &LpProblem) -> f64 {
        let mut v = 0.0;
        for (b, l) in p.b_ub.iter().zip(&self.duals_ub) {
            v -= b * l;
        }
        for (b, m) in p.b_eq.iter().zip(&self.duals_eq) {
            v -= b * m;
        }
        for (j, bd) in p.bounds.iter().enumerate() {
            if let Some(l) = bd.lower {
                v += l * self.duals_lower[j];
            }
            if let Some(u) = bd.upper {
                v -= u * self.duals_upper[j];
            }
        }
        v
    }

    /// Largest constraint violation of `x` in `p`.
    pub fn max_violation(&self, p: &LpProblem) -> f64 {
        violation(p, &self.x)
    }
}

pub(crate) fn violation(p: &LpProblem, x: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for (row, b) in p.a_ub.iter().zip(&p.b_ub) {
        worst = worst.max(dot(row, x) - b);
    }
    for (row, b) in p.a_eq.iter().zip(&p.b_eq) {
        worst = worst.max((dot(row, x) - b).abs());
    }
    for (j, bd) in p.bounds.iter().enumerate() {
        if let Some(l) = bd.lower {
            worst = worst.max(l - x[j]);
        }
        if let Some(u) = bd.upper {
            worst = worst.max(x[j] - u);
        }
    }
    worst
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const COST_EPS: f64 = 1e-10;
const PIVOT_EPS: f64 = 1e-11;

/// Row origin inside the standard form, used to map duals back.
#[derive(Clone, Copy)]
enum RowKind {
    Ub(usize),
    Eq(usize),
    Lower(usize),
    Upper(usize),
}

struct Standard {
    /// Constraint matrix over [p | q | slack | artificial].
    mat: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    sign: Vec<f64>,
    kinds: Vec<RowKind>,
    n: usize,
    n_slack: usize,
}

impl Standard {
    fn build(p: &LpProblem) -> Self {
        let n = p.num_vars();
        let mut rows: Vec<(Vec<f64>, f64, bool, RowKind)> = Vec::new();
        for (i, (r, b)) in p.a_ub.iter().zip(&p.b_ub).enumerate() {
            rows.push((r.clone(), *b, true, RowKind::Ub(i)));
        }
        for (j, bd) in p.bounds.iter().enumerate() {
            if let Some(l) = bd.lower {
                let mut r = vec![0.0; n];
                r[j] = -1.0;
                rows.push((r, -l, true, RowKind::Lower(j)));
            }
            if let Some(u) = bd.upper {
                let mut r = vec![0.0; n];
                r[j] = 1.0;
                rows.push((r, u, true, RowKind::Upper(j)));
            }
        }
        for (i, (r, b)) in p.a_eq.iter().zip(&p.b_eq).enumerate() {
            rows.push((r.clone(), *b, false, RowKind::Eq(i)));
        }
        let m = rows.len();
        let n_slack = rows.iter().filter(|r| r.2).count();
        let width = 2 * n + n_slack + m;
        let mut mat = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut sign = Vec::with_capacity(m);
        let mut kinds = Vec::with_capacity(m);
        let mut slack = 0;
        for (i, (r, b, has_slack, kind)) in rows.into_iter().enumerate() {
            let s = if b < 0.0 { -1.0 } else { 1.0 };
            let mut row = vec![0.0; width];
            for j in 0..n {
                row[j] = s * r[j];
                row[n + j] = -s * r[j];
            }
            if has_slack {
                row[2 * n + slack] = s;
                slack += 1;
            }
            row[2 * n + n_slack + i] = 1.0;
            mat.push(row);
            rhs.push(s * b);
            sign.push(s);
            kinds.push(kind);
        }
        Self { mat, rhs, sign, kinds, n, n_slack }
    }

    fn m(&self) -> usize {
        self.rhs.len()
    }

    fn first_artificial(&self) -> usize {
        2 * self.n + self.n_slack
    }

    fn width(&self) -> usize {
        self.first_artificial() + self.m()
    }
}

struct Tableau {
    t: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
    cap: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.t[r][c];
        let inv = 1.0 / piv;
        for v in self.t[r].iter_mut() {
            *v *= inv;
        }
        self.rhs[r] *= inv;
        self.t[r][c] = 1.0;
        let prow = self.t[r].clone();
        let prhs = self.rhs[r];
        for i in 0..self.t.len() {
            if i == r {
                continue;
            }
            let f = self.t[i][c];
            if f != 0.0 {
                for (v, pv) in self.t[i].iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                self.t[i][c] = 0.0;
                self.rhs[i] -= f * prhs;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    fn set_cost(&mut self, c: &[f64]) {
        self.cost = c.to_vec();
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = c[bj];
            if cb != 0.0 {
                for (v, tv) in self.cost.iter_mut().zip(&self.t[i]) {
                    *v -= cb * tv;
                }
            }
        }
    }

    fn run(&mut self, allowed: usize) -> Result<Phase> {
        loop {
            if self.iterations >= self.cap {
                return Err(Error::NonConvergence { what: "simplex", iterations: self.iterations });
            }
            let scale = 1.0 + self.cost[..allowed].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let Some(enter) = (0..allowed).find(|&j| self.cost[j] < -COST_EPS * scale) else {
                return Ok(Phase::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][enter];
                if a > PIVOT_EPS {
                    let ratio = self.rhs[i].max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                            if ratio < best && !tie
                                || tie && self.basis[i] < self.basis[k]
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(Phase::Unbounded);
            };
            self.pivot(r, enter);
            self.iterations += 1;
        }
    }
}

/// Solves a linear program.
///
/// Infeasibility and unboundedness are reported through [`LpStatus`]; errors
/// are reserved for malformed input and the iteration cap.
pub fn lp_solve(p: &LpProblem) -> Result<LpResult> {
    p.validate()?;
    let n = p.num_vars();
    let sf = Standard::build(p);
    let m = sf.m();
    let art = sf.first_artificial();
    let width = sf.width();

    if m == 0 {
        // Only free variables: optimal at zero iff the objective vanishes.
        return Ok(if p.objective.iter().all(|c| *c == 0.0) {
            LpResult {
                status: LpStatus::Optimal,
                x: vec![0.0; n],
                value: 0.0,
                duals_ub: vec![],
                duals_eq: vec![],
                duals_lower: vec![0.0; n],
                duals_upper: vec![0.0; n],
                iterations: 0,
            }
        } else {
            LpResult::empty(LpStatus::Unbounded, n, 0)
        });
    }

    let mut tab = Tableau {
        t: sf.mat.clone(),
        rhs: sf.rhs.clone(),
        cost: vec![0.0; width],
        basis: (art..art + m).collect(),
        iterations: 0,
        cap: 200 * (m + width) + 1000,
    };

    // Phase I: drive the artificial sum to zero.
    let mut c1 = vec![0.0; width];
    for c in c1.iter_mut().skip(art) {
        *c = 1.0;
    }
    tab.set_cost(&c1);
    tab.run(art)?;
    let infeas: f64 = tab
        .basis
        .iter()
        .zip(&tab.rhs)
        .filter(|(b, _)| **b >= art)
        .map(|(_, v)| *v)
        .sum();
    let bscale = 1.0 + sf.rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if infeas > 1e-9 * bscale {
        return Ok(LpResult::empty(LpStatus::Infeasible, n, tab.iterations));
    }
    // Pivot remaining zero-level artificials out where possible.
    for r in 0..m {
        if tab.basis[r] >= art {
            if let Some(c) = (0..art).find(|&j| tab.t[r][j].abs() > 1e-9) {
                tab.pivot(r, c);
            }
        }
    }

    // Phase II.
    let mut c2 = vec![0.0; width];
    for j in 0..n {
        c2[j] = p.objective[j];
        c2[n + j] = -p.objective[j];
    }
    tab.set_cost(&c2);
    if let Phase::Unbounded = tab.run(art)? {
        return Ok(LpResult::empty(LpStatus::Unbounded, n, tab.iterations));
    }

    // Basic values from the tableau, then refined from the original data.
    let mut vals = vec![0.0; width];
    for (i, &bj) in tab.basis.iter().enumerate() {
        vals[bj] = tab.rhs[i];
    }
    let bmat = DMatrix::from_fn(m, m, |i, k| sf.mat[i][tab.basis[k]]);
    let lu = bmat.clone().lu();
    let mut y = vec![0.0; m];
    if let Some(xb) = lu.solve(&DVector::from_vec(sf.rhs.clone())) {
        let mut refined = vec![0.0; width];
        for (k, &bj) in tab.basis.iter().enumerate() {
            refined[bj] = xb[k];
        }
        let candidate = recover_x(&refined, n);
        if violation(p, &candidate) <= violation(p, &recover_x(&vals, n)).max(1e-12) {
            vals = refined;
        }
    }
    let cb = DVector::from_fn(m, |k, _| c2[tab.basis[k]]);
    if let Some(sol) = bmat.transpose().lu().solve(&cb) {
        y = sol.iter().copied().collect();
    } else {
        // Fall back to the reduced costs of the artificial columns.
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = -tab.cost[art + i];
        }
    }

    let x = recover_x(&vals, n);
    let value = dot(&p.objective, &x);
    let mut duals_ub = vec![0.0; p.a_ub.len()];
    let mut duals_eq = vec![0.0; p.a_eq.len()];
    let mut duals_lower = vec![0.0; n];
    let mut duals_upper = vec![0.0; n];
    for (i, kind) in sf.kinds.iter().enumerate() {
        let d = -sf.sign[i] * y[i];
        match *kind {
            RowKind::Ub(k) => duals_ub[k] = d,
            RowKind::Eq(k) => duals_eq[k] = d,
            RowKind::Lower(j) => duals_lower[j] = d,
            RowKind::Upper(j) => duals_upper[j] = d,
        }
    }
    Ok(LpResult {
        status: LpStatus::Optimal,
        x,
        value,
        duals_ub,
        duals_eq,
        duals_lower,
        duals_upper,
        iterations: tab.iterations,
    })
}

fn recover_x(vals: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|j| vals[j] - vals[n + j]).collect()
}

/// Finds any point satisfying the constraints of `p` (objective ignored).
pub fn lp_feasible_point(p: &LpProblem) -> Result<Option<Vec<f64>>> {
    let mut q = p.clone();
    q.objective = vec![0.0; p.num_vars()];
    let r = lp_solve(&q)?;
    Ok(r.is_optimal().then_some(r.x))
}
