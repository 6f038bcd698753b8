//! Ball-to-ball distance form of tangential transversality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{Vector, FEAS_TOL};
use crate::sets::SetSpec;
use crate::transversality::{find_step, pair_samples, step_grid, Budget};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    #[serde(rename = "xA")]
    pub x_a: Vector,
    #[serde(rename = "xB")]
    pub x_b: Vector,
    /// `s = M t` of the step used, if one was found.
    pub s: Option<f64>,
    /// Upper bound on `dist(B̄_s(xA) ∩ A, B̄_s(xB) ∩ B)` from the step points.
    pub distance: Option<f64>,
    /// `‖xA − xB‖ − s ζ`.
    pub bound: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFormReport {
    pub zeta: f64,
    pub samples: Vec<MetricSample>,
    /// Pairs for which the step oracle found a step.
    pub with_step: usize,
    /// Pairs with a step for which the ball-distance inequality held.
    pub holds: usize,
}

impl MetricFormReport {
    /// Fraction of stepped pairs satisfying the inequality; `1` when none were stepped.
    pub fn fraction(&self) -> f64 {
        if self.with_step == 0 {
            1.0
        } else {
            self.holds as f64 / self.with_step as f64
        }
    }
}

/// Checks `dist(B̄_s(xA) ∩ A, B̄_s(xB) ∩ B) ≤ ‖xA − xB‖ − s ζ` with
/// `ζ = η/M` and `s = M t` on sampled pairs of the `δ`-balls.
///
/// The distance is bounded by the step points `xA + t wA`, `xB + t wB`, which
/// are checked independently for membership and for lying in the `s`-balls.
#[allow(clippy::too_many_arguments)]
pub fn check_metric_form(
    a: &SetSpec,
    b: &SetSpec,
    x0: &Vector,
    m: f64,
    eta: f64,
    delta: f64,
    budget: Budget,
) -> Result<MetricFormReport> {
    let pairs = pair_samples(a, b, x0, delta, budget);
    check_metric_form_pairs(a, b, &pairs, m, eta, delta)
}

pub fn check_metric_form_pairs(
    a: &SetSpec,
    b: &SetSpec,
    pairs: &[(Vector, Vector)],
    m: f64,
    eta: f64,
    delta: f64,
) -> Result<MetricFormReport> {
    if !(m > 0.0 && eta > 0.0 && delta > 0.0) {
        return Err(Error::InvalidArgument("M, eta and delta must be positive".into()));
    }
    let zeta = eta / m;
    let mut report = MetricFormReport { zeta, samples: Vec::new(), with_step: 0, holds: 0 };
    for (xa, xb) in pairs {
        let gap = xa.dist(xb);
        if gap == 0.0 {
            report.samples.push(MetricSample {
                x_a: xa.clone(),
                x_b: xb.clone(),
                s: None,
                distance: Some(0.0),
                bound: Some(0.0),
                holds: true,
            });
            continue;
        }
        let Some(step) = find_step(a, b, xa, xb, m, eta, &step_grid(gap, delta, eta)) else {
            report.samples.push(MetricSample {
                x_a: xa.clone(),
                x_b: xb.clone(),
                s: None,
                distance: None,
                bound: None,
                holds: false,
            });
            continue;
        };
        report.with_step += 1;
        let s = m * step.t;
        let ya = xa.axpy(step.t, &step.w_a);
        let yb = xb.axpy(step.t, &step.w_b);
        let in_balls = ya.dist(xa) <= s * (1.0 + 1e-12) && yb.dist(xb) <= s * (1.0 + 1e-12);
        let members = a.distance(&ya)? <= FEAS_TOL && b.distance(&yb)? <= FEAS_TOL;
        let distance = ya.dist(&yb);
        let bound = gap - s * zeta;
        let holds = in_balls && members && distance <= bound + 1e-12 * gap;
        if holds {
            report.holds += 1;
        }
        report.samples.push(MetricSample {
            x_a: xa.clone(),
            x_b: xb.clone(),
            s: Some(s),
            distance: Some(distance),
            bound: Some(bound),
            holds,
        });
    }
    Ok(report)
}
