//! Alternating projections with a fitted R-linear rate.

use serde::{Deserialize, Serialize};

use super::estimate::IntersectionDistance;
use crate::error::{Error, Result};
use crate::numkernel::Vector;
use crate::sets::SetSpec;

/// Gaps below this count as converged and are left out of the rate fit.
const CONVERGED_GAP: f64 = 1e-12;
/// A step shorter than this while the gap is still large means the iteration stalled.
const STALL_STEP: f64 = 1e-15;
/// Late-phase rates above this, and clearly above the early-phase rate, indicate sublinear decay.
const SUBLINEAR_RATE: f64 = 0.95;

/// Which distance the `gaps` trace measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapKind {
    /// `d(x_k, A ∩ B)`.
    Intersection,
    /// `d(x_k, B)`, used when the intersection is empty or has no oracle.
    DistanceToB,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltProjReport {
    pub iterations: usize,
    pub gap_kind: GapKind,
    /// Gap at the start and after each iteration.
    pub gaps: Vec<f64>,
    pub iterates: Vec<Vector>,
    /// Fitted per-iteration factor `q` with `gap_k ≈ C q^k`; `None` when undefined.
    pub rate: Option<f64>,
    /// Fitted factor over the first half of the usable trace.
    pub early_rate: Option<f64>,
    pub start_in_intersection: bool,
    pub converged: bool,
    pub sublinear: bool,
    pub stalled: bool,
}

/// Least-squares slope of `ln gap` against the iteration index, as a factor.
fn fit_rate(points: &[(usize, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(k, g) in points {
        let dx = k as f64 - mx;
        sxy += dx * (g.ln() - my);
        sxx += dx * dx;
    }
    Some((sxy / sxx).exp())
}

/// Runs `x ← P_A(P_B(x))` for at most `iters` iterations.
pub fn altproj_rate(a: &SetSpec, b: &SetSpec, x_start: &Vector, iters: usize) -> Result<AltProjReport> {
    if x_start.dim() != a.dim() || a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: x_start.dim() });
    }
    let oracle = IntersectionDistance::new(a, b).ok();
    let (gap_kind, gap_of): (GapKind, Box<dyn Fn(&Vector) -> Result<f64>>) = match oracle {
        Some(o) if o.distance(x_start).is_ok() => (GapKind::Intersection, Box::new(move |x| o.distance(x))),
        _ => (GapKind::DistanceToB, Box::new(|x| b.distance(x))),
    };
    let mut x = x_start.clone();
    let mut gaps = vec![gap_of(&x)?];
    let mut iterates = vec![x.clone()];
    let start_in = a.distance(&x)? <= CONVERGED_GAP && b.distance(&x)? <= CONVERGED_GAP;
    let mut stalled = false;
    if !start_in {
        for _ in 0..iters {
            let next = a.project(&b.project(&x)?)?;
            let step = next.dist(&x);
            x = next;
            let g = gap_of(&x)?;
            gaps.push(g);
            iterates.push(x.clone());
            if g <= CONVERGED_GAP {
                break;
            }
            if step < STALL_STEP {
                stalled = true;
                break;
            }
        }
    }
    let usable: Vec<(usize, f64)> =
        gaps.iter().copied().enumerate().skip(1).filter(|&(_, g)| g > CONVERGED_GAP).collect();
    let half = usable.len() / 2;
    let rate = if start_in { None } else { fit_rate(&usable[half..]).or_else(|| fit_rate(&usable)) };
    let early_rate = if start_in { None } else { fit_rate(&usable[..half]) };
    let converged = gaps.last().is_some_and(|&g| g <= CONVERGED_GAP);
    let sublinear = !converged
        && !stalled
        && matches!((rate, early_rate), (Some(r), Some(e)) if r > SUBLINEAR_RATE && r > e);
    Ok(AltProjReport {
        iterations: gaps.len() - 1,
        gap_kind,
        gaps,
        iterates,
        rate,
        early_rate,
        start_in_intersection: start_in,
        converged,
        sublinear,
        stalled,
    })
}
