//! Iterative gap reduction between a point of `A` and a point of `B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::Vector;
use crate::sets::SetSpec;
use crate::transversality::{admissible_radius_exact, find_step, nearest, step_grid};

/// Default iteration cap of [`gap_reduction_solve`].
pub const DEFAULT_MAX_ITERS: usize = 10_000;
/// Relative slack on the recorded bounds, absorbing round-off in the sums.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapStatus {
    Converged,
    /// The step oracle found no step at the current pair.
    Stalled,
    /// Iteration cap reached.
    Budget,
}

/// One accepted step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub k: usize,
    pub t: f64,
    #[serde(rename = "wA")]
    pub w_a: Vector,
    #[serde(rename = "wB")]
    pub w_b: Vector,
    /// Gap after the step.
    pub gap: f64,
    /// `t̄_k`, the sum of all step sizes so far.
    pub cumulative_t: f64,
    /// `max(‖xA_{k+1} − xA_k‖, ‖xB_{k+1} − xB_k‖)`.
    pub drift: f64,
    #[serde(rename = "xA")]
    pub x_a: Vector,
    #[serde(rename = "xB")]
    pub x_b: Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapParams {
    #[serde(rename = "M")]
    pub m: f64,
    pub eta: f64,
    pub delta: f64,
    pub tol: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTrace {
    pub params: GapParams,
    pub x0: Vector,
    #[serde(rename = "xA1")]
    pub x_a1: Vector,
    #[serde(rename = "xB1")]
    pub x_b1: Vector,
    pub initial_gap: f64,
    /// Left-hand side of the starting condition `max{‖xA − x0‖, ‖xB − x0‖} + (M/η)‖xA − xB‖`.
    pub initial_condition: f64,
    /// Whether the starting condition `≤ δ` held.
    pub initial_condition_ok: bool,
    pub records: Vec<GapRecord>,
    pub status: GapStatus,
    /// Common point found at termination (converged runs only).
    #[serde(rename = "xAB")]
    pub x_ab: Option<Vector>,
    /// `‖xAB − xA1‖` and `‖xAB − xB1‖`.
    pub distances: Option<(f64, f64)>,
    /// `(M/η) gap₁ + M tol/η`.
    pub distance_bound: f64,
    /// The pair the oracle could not improve (stalled runs only).
    pub stuck_pair: Option<(Vector, Vector)>,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct CsvRow {
    k: usize,
    t_k: f64,
    gap_k: f64,
    cumulative_t: f64,
    drift_k: f64,
}

impl GapTrace {
    pub fn final_gap(&self) -> f64 {
        self.records.last().map_or(self.initial_gap, |r| r.gap)
    }

    /// One row per iteration: `k, t_k, gap_k, cumulative_t, drift_k`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(CsvRow { k: r.k, t_k: r.t, gap_k: r.gap, cumulative_t: r.cumulative_t, drift_k: r.drift })
                .map_err(|e| Error::Serialization(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Violations of the per-iterate estimates; empty when all hold.
    ///
    /// Checks the gap decrease `gap_k ≤ gap₁ − t̄_k η`, the ball estimates
    /// `‖x_k − x0‖ ≤ ‖x_1 − x0‖ + t̄_k M` and the drift
    /// `‖x_l − x_k‖ ≤ M (t̄_l − t̄_k)` for every pair `k < l`.
    pub fn bound_violations(&self) -> Vec<String> {
        let p = &self.params;
        let mut out = Vec::new();
        let mut pts = vec![(0.0, self.x_a1.clone(), self.x_b1.clone(), self.initial_gap)];
        pts.extend(self.records.iter().map(|r| (r.cumulative_t, r.x_a.clone(), r.x_b.clone(), r.gap)));
        let slack = |v: f64| BOUND_SLACK * (1.0 + v.abs());
        for (k, (tk, xa, xb, gap)) in pts.iter().enumerate() {
            let lim = self.initial_gap - tk * p.eta;
            if *gap > lim + slack(self.initial_gap) {
                out.push(format!("gap {gap:e} above {lim:e} at k = {k}"));
            }
            for (x, x1, name) in [(xa, &self.x_a1, "A"), (xb, &self.x_b1, "B")] {
                let lim = x1.dist(&self.x0) + tk * p.m;
                if x.dist(&self.x0) > lim + slack(lim) {
                    out.push(format!("{name}-iterate leaves its ball at k = {k}"));
                }
            }
            for (tl, ya, yb, _) in &pts[k + 1..] {
                let lim = p.m * (tl - tk);
                let d = ya.dist(xa).max(yb.dist(xb));
                if d > lim + slack(p.m * tl) {
                    out.push(format!("drift {d:e} above {lim:e} after k = {k}"));
                }
            }
        }
        if let Some((da, db)) = self.distances {
            if da.max(db) > self.distance_bound + slack(self.distance_bound) {
                out.push(format!("terminal distance {:e} above {:e}", da.max(db), self.distance_bound));
            }
        }
        out
    }
}

/// `δ / (1 + 2M/η)`: every pair within this radius of `x0` satisfies the starting condition.
pub fn admissible_radius(m: f64, eta: f64, delta: f64) -> Result<f64> {
    Ok(admissible_radius_exact(m, eta, delta)?.value())
}

/// `max{‖xA − x0‖, ‖xB − x0‖} + (M/η)‖xA − xB‖`.
pub fn initial_condition(x0: &Vector, x_a: &Vector, x_b: &Vector, m: f64, eta: f64) -> f64 {
    x_a.dist(x0).max(x_b.dist(x0)) + m / eta * x_a.dist(x_b)
}

/// Midpoint projected onto `A`, then onto `B`; accepted when both residuals are within `tol`.
fn reconcile(a: &SetSpec, b: &SetSpec, x_a: &Vector, x_b: &Vector, tol: f64) -> Result<Option<Vector>> {
    if x_a == x_b {
        return Ok(Some(x_a.clone()));
    }
    let p = nearest(b, &nearest(a, &x_a.midpoint(x_b))?)?;
    Ok((a.distance(&p)? <= tol && b.distance(&p)? <= tol).then_some(p))
}

/// Drives `(xA, xB)` together with verified tangential steps until the gap is at most `tol`.
///
/// Each iteration takes the largest step of the grid `min(δ, gap/η) 2^{-j}`
/// accepted by the step oracle. A violated starting condition is recorded as
/// a warning and the run proceeds.
#[allow(clippy::too_many_arguments)]
pub fn gap_reduction_solve(
    a: &SetSpec,
    b: &SetSpec,
    x0: &Vector,
    x_a: &Vector,
    x_b: &Vector,
    m: f64,
    eta: f64,
    delta: f64,
    tol: f64,
) -> Result<GapTrace> {
    gap_reduction_solve_with(a, b, x0, x_a, x_b, GapParams { m, eta, delta, tol, max_iters: DEFAULT_MAX_ITERS })
}

pub fn gap_reduction_solve_with(
    a: &SetSpec,
    b: &SetSpec,
    x0: &Vector,
    x_a: &Vector,
    x_b: &Vector,
    params: GapParams,
) -> Result<GapTrace> {
    let GapParams { m, eta, delta, tol, max_iters } = params;
    if !(m > 0.0 && eta > 0.0 && delta > 0.0 && tol > 0.0) {
        return Err(Error::InvalidArgument("M, eta, delta and tol must be positive".into()));
    }
    for (s, x, name) in [(a, x_a, "A"), (b, x_b, "B")] {
        let d = s.distance(x)?;
        if d > crate::numkernel::FEAS_TOL {
            return Err(Error::Precondition(format!("start point is not in {name} (distance {d:e})")));
        }
    }
    let gap1 = x_a.dist(x_b);
    let lhs = initial_condition(x0, x_a, x_b, m, eta);
    let mut trace = GapTrace {
        params,
        x0: x0.clone(),
        x_a1: x_a.clone(),
        x_b1: x_b.clone(),
        initial_gap: gap1,
        initial_condition: lhs,
        initial_condition_ok: lhs <= delta,
        records: Vec::new(),
        status: GapStatus::Budget,
        x_ab: None,
        distances: None,
        distance_bound: m / eta * gap1 + m * tol / eta,
        stuck_pair: None,
        warnings: Vec::new(),
    };
    if !trace.initial_condition_ok {
        trace.warnings.push(format!("starting condition violated: {lhs:e} > delta = {delta:e}"));
    }
    let (mut ya, mut yb) = (x_a.clone(), x_b.clone());
    let mut cum = 0.0;
    let mut gap = gap1;
    for k in 1..=max_iters + 1 {
        if gap <= tol {
            match reconcile(a, b, &ya, &yb, tol)? {
                Some(p) => {
                    trace.distances = Some((p.dist(x_a), p.dist(x_b)));
                    trace.x_ab = Some(p);
                    trace.status = GapStatus::Converged;
                }
                None => {
                    trace.warnings.push("final pair could not be reconciled within tol".into());
                    trace.stuck_pair = Some((ya, yb));
                    trace.status = GapStatus::Stalled;
                }
            }
            return Ok(trace);
        }
        if k > max_iters {
            break;
        }
        let grid = step_grid(gap, delta, eta);
        let Some(step) = find_step(a, b, &ya, &yb, m, eta, &grid) else {
            trace.stuck_pair = Some((ya, yb));
            trace.status = GapStatus::Stalled;
            return Ok(trace);
        };
        let na = ya.axpy(step.t, &step.w_a);
        let nb = yb.axpy(step.t, &step.w_b);
        let drift = na.dist(&ya).max(nb.dist(&yb));
        cum += step.t;
        gap = na.dist(&nb);
        trace.records.push(GapRecord {
            k,
            t: step.t,
            w_a: step.w_a,
            w_b: step.w_b,
            gap,
            cumulative_t: cum,
            drift,
            x_a: na.clone(),
            x_b: nb.clone(),
        });
        ya = na;
        yb = nb;
    }
    trace.status = GapStatus::Budget;
    Ok(trace)
}
