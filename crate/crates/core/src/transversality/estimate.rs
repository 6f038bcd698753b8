//! Empirical estimation of tangential and subtransversality constants.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::sampling::{nearest, pair_samples, shell_points};
use super::step::{find_step, step_grid};
use super::{Budget, Constants, Evidence, Notion, Status, TransversalityCertificate, Witness};
use crate::error::{Error, Result};
use crate::numkernel::{Vector, FEAS_TOL};
use crate::sets::{intersect, project_intersection, SetSpec};

/// Step-norm bounds tried in order.
const M_SCHEDULE: [f64; 3] = [1.0, 2.0, 4.0];
/// Rates are searched on `M 2^{-k}` for `k` in `0..RATE_LADDER`, then refined by bisection.
const RATE_LADDER: i32 = 7;
const BISECTIONS: usize = 6;
/// Radii `δ, δ/2, δ/4` tried by the tangential estimator.
const DELTA_REFINEMENTS: usize = 3;
/// Refinement levels `δ, δ/2, δ/4, δ/8` of the subtransversality estimator.
const SUB_LEVELS: usize = 4;
/// Level-to-level growth of the sup ratio that counts as escalation.
pub const REFUTE_GROWTH: f64 = 1.9;
const MIN_DENOMINATOR: f64 = 1e-12;

fn check_member(s: &SetSpec, x0: &Vector, name: &str) -> Result<()> {
    let d = s.distance(x0)?;
    if d > FEAS_TOL {
        return Err(Error::Precondition(format!("x0 is not in {name} (distance {d:e})")));
    }
    Ok(())
}

/// Searches `(M, η, δ)` so that every sampled pair admits a tangential step.
///
/// For each radius in `δ, δ/2, δ/4` and each `M` in `1, 2, 4`, the largest
/// rate `η ≤ M` passing all pairs is located by a dyadic ladder followed by
/// bisection. The first `(δ, M)` with a positive rate is reported together
/// with the best rate found for every pair.
pub fn estimate_tangential_constants(
    a: &SetSpec,
    b: &SetSpec,
    x0: &Vector,
    delta: f64,
    budget: Budget,
) -> Result<TransversalityCertificate> {
    check_member(a, x0, "A")?;
    check_member(b, x0, "B")?;
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let mut last_failure: Option<(Vector, Vector, f64)> = None;
    let mut total = 0;
    for r in 0..DELTA_REFINEMENTS {
        let d = delta * 0.5f64.powi(r as i32);
        let mut pairs = pair_samples(a, b, x0, d, budget);
        total = total.max(pairs.len());
        if pairs.is_empty() {
            let mut c = TransversalityCertificate::new(
                Notion::TangentiallyTransversal,
                x0,
                Status::Certified,
                Evidence::Empirical,
            );
            c.constants = Constants { m: Some(1.0), eta: Some(1.0), delta: Some(d), ..Default::default() };
            c.notes.push("no two distinct sampled points: the condition holds vacuously".into());
            return Ok(c);
        }
        for &m in &M_SCHEDULE {
            match largest_rate(a, b, &mut pairs, m, d) {
                Ok(eta) => {
                    let per_pair = per_pair_rates(a, b, &pairs, m, d, eta);
                    let mut c = TransversalityCertificate::new(
                        Notion::TangentiallyTransversal,
                        x0,
                        Status::Certified,
                        Evidence::Empirical,
                    );
                    c.constants = Constants { m: Some(m), eta: Some(eta), delta: Some(d), ..Default::default() };
                    c.samples = pairs.len();
                    c.per_pair_eta = per_pair;
                    return Ok(c);
                }
                Err(fail) => last_failure = Some(fail),
            }
        }
    }
    let (xa, xb, eta) = last_failure.expect("at least one schedule entry ran");
    let mut c = TransversalityCertificate::new(
        Notion::TangentiallyTransversal,
        x0,
        Status::Inconclusive {
            reason: format!("a sampled pair admits no step at rate {eta:e} for any M in the schedule"),
        },
        Evidence::Empirical,
    );
    c.samples = total;
    c.notes.push(format!("failing pair: xA = {xa:?}, xB = {xb:?}"));
    Ok(c)
}

fn all_pass(a: &SetSpec, b: &SetSpec, pairs: &mut [(Vector, Vector)], m: f64, d: f64, eta: f64) -> Option<usize> {
    for i in 0..pairs.len() {
        let (xa, xb) = &pairs[i];
        let grid = step_grid(xa.dist(xb), d, eta);
        if find_step(a, b, xa, xb, m, eta, &grid).is_none() {
            // Hard pairs first on the next round.
            pairs[..=i].rotate_right(1);
            return Some(i);
        }
    }
    None
}

/// Largest rate passing every pair, or the pair that fails the smallest ladder rate.
fn largest_rate(
    a: &SetSpec,
    b: &SetSpec,
    pairs: &mut [(Vector, Vector)],
    m: f64,
    d: f64,
) -> std::result::Result<f64, (Vector, Vector, f64)> {
    let mut hi = None;
    let mut lo = None;
    for k in 0..RATE_LADDER {
        let eta = m * 0.5f64.powi(k);
        if all_pass(a, b, pairs, m, d, eta).is_none() {
            lo = Some(eta);
            break;
        }
        hi = Some(eta);
    }
    let Some(mut lo) = lo else {
        let eta = m * 0.5f64.powi(RATE_LADDER - 1);
        let (xa, xb) = pairs[0].clone();
        return Err((xa, xb, eta));
    };
    if let Some(mut hi) = hi {
        for _ in 0..BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if all_pass(a, b, pairs, m, d, mid).is_none() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(lo)
}

fn per_pair_rates(a: &SetSpec, b: &SetSpec, pairs: &[(Vector, Vector)], m: f64, d: f64, floor: f64) -> Vec<f64> {
    pairs
        .iter()
        .map(|(xa, xb)| {
            let gap = xa.dist(xb);
            (0..RATE_LADDER)
                .map(|k| m * 0.5f64.powi(k))
                .take_while(|&e| e > floor)
                .find(|&e| find_step(a, b, xa, xb, m, e, &step_grid(gap, d, e)).is_some())
                .unwrap_or(floor)
        })
        .collect()
}

/// Checks given tangential constants on the sampled pairs of the `δ`-ball.
pub fn validate_tangential_constants(
    a: &SetSpec,
    b: &SetSpec,
    x0: &Vector,
    m: f64,
    eta: f64,
    delta: f64,
    budget: Budget,
) -> Result<TransversalityCertificate> {
    check_member(a, x0, "A")?;
    check_member(b, x0, "B")?;
    if !(m > 0.0 && eta > 0.0 && delta > 0.0) {
        return Err(Error::InvalidArgument("M, eta and delta must be positive".into()));
    }
    let pairs = pair_samples(a, b, x0, delta, budget);
    let mut failures = Vec::new();
    for (xa, xb) in &pairs {
        let grid = step_grid(xa.dist(xb), delta, eta);
        if find_step(a, b, xa, xb, m, eta, &grid).is_none() {
            failures.push((xa.clone(), xb.clone()));
        }
    }
    let status = if failures.is_empty() {
        Status::Certified
    } else {
        Status::Inconclusive { reason: format!("{} of {} sampled pairs admit no step", failures.len(), pairs.len()) }
    };
    let mut c = TransversalityCertificate::new(Notion::TangentiallyTransversal, x0, status, Evidence::Empirical);
    c.constants = Constants { m: Some(m), eta: Some(eta), delta: Some(delta), ..Default::default() };
    c.samples = pairs.len();
    if let Some((xa, xb)) = failures.first() {
        c.notes.push(format!("first failing pair: xA = {xa:?}, xB = {xb:?}"));
    }
    Ok(c)
}

/// Sup ratio observed at one refinement level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtransversalityLevel {
    pub delta: f64,
    pub k_hat: f64,
    pub argmax: Option<Vector>,
    pub samples: usize,
}

/// `x ↦ d(x, A ∩ B)`, exact when the intersection has a description.
pub(crate) struct IntersectionDistance {
    exact: Option<SetSpec>,
    a: SetSpec,
    b: SetSpec,
}

impl IntersectionDistance {
    pub(crate) fn new(a: &SetSpec, b: &SetSpec) -> Result<Self> {
        // Canonical argument order keeps the estimator symmetric in A and B.
        let (a, b) = if format!("{a:?}") <= format!("{b:?}") { (a, b) } else { (b, a) };
        let exact = match intersect(a, b) {
            Ok(s) => Some(s),
            Err(Error::Unsupported(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Self { exact, a: a.clone(), b: b.clone() })
    }

    pub(crate) fn distance(&self, x: &Vector) -> Result<f64> {
        match &self.exact {
            Some(s) => s.distance(x),
            None => Ok(x.dist(&project_intersection(&self.a, &self.b, x)?.point)),
        }
    }
}

fn lex(a: &Vector, b: &Vector) -> Ordering {
    a.iter().zip(b.iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Estimates `K̂ = sup d(x, A∩B) / (d(x, A) + d(x, B))` over the `δ`-ball.
///
/// The same relative sample pattern (shell points and their projections onto
/// `A` and `B`) is evaluated at radii `δ, δ/2, δ/4, δ/8`. If the sup grows by
/// at least [`REFUTE_GROWTH`] at each refinement the ratio is unbounded near
/// `x0` and the certificate is REFUTED.
pub fn estimate_subtransversality_constant(
    a: &SetSpec,
    b: &SetSpec,
    x0: &Vector,
    delta: f64,
    budget: Budget,
) -> Result<TransversalityCertificate> {
    check_member(a, x0, "A")?;
    check_member(b, x0, "B")?;
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let dab = IntersectionDistance::new(a, b)?;
    let approximate = dab.exact.is_none();
    let mut levels = Vec::new();
    for j in 0..SUB_LEVELS {
        let d = delta * 0.5f64.powi(j as i32);
        let shell = shell_points(x0, d, budget);
        let mut samples = shell.clone();
        for u in &shell {
            for s in [a, b] {
                if let Ok(p) = nearest(s, u) {
                    if p.dist(x0) <= d {
                        samples.push(p);
                    }
                }
            }
        }
        let mut best = 0.0f64;
        let mut argmax: Option<Vector> = None;
        let mut used = 0;
        for x in &samples {
            let den = a.distance(x)? + b.distance(x)?;
            if den < MIN_DENOMINATOR {
                continue;
            }
            used += 1;
            let ratio = dab.distance(x)? / den;
            let better = match &argmax {
                None => true,
                Some(p) => ratio > best || (ratio == best && lex(x, p) == Ordering::Less),
            };
            if better {
                best = ratio;
                argmax = Some(x.clone());
            }
        }
        levels.push(SubtransversalityLevel { delta: d, k_hat: best, argmax, samples: used });
    }
    let escalates = levels.windows(2).all(|w| w[0].k_hat > 0.0 && w[1].k_hat >= REFUTE_GROWTH * w[0].k_hat);
    let k_hat = levels.iter().map(|l| l.k_hat).fold(0.0, f64::max);
    let status = if escalates {
        let finest = levels.last().expect("levels");
        Status::Refuted {
            witness: Witness {
                description: "sup ratio grows under every radius refinement".into(),
                points: finest.argmax.iter().cloned().collect(),
                directions: Vec::new(),
                value: Some(finest.k_hat),
                bound: Some(levels[0].k_hat),
            },
        }
    } else {
        Status::Certified
    };
    let mut c = TransversalityCertificate::new(Notion::Subtransversal, x0, status, Evidence::Empirical);
    c.constants = Constants { k: Some(k_hat), delta: Some(delta), ..Default::default() };
    c.samples = levels.iter().map(|l| l.samples).sum();
    if approximate {
        c.notes.push("d(x, A∩B) from an iterative projection (approximate)".into());
    }
    c.levels = levels;
    Ok(c)
}
