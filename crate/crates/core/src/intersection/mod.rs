//! Tangent cones of an intersection compared with intersections of tangent cones.
//!
//! Both checks run exactly when the two sets and their intersection have
//! closed-form polyhedral tangent cones, and on a fixed direction net
//! otherwise.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cones::{
    cone_intersect, direction_net, exact_convex_cone, profile_by, unit_f64, Membership, PolyCone, SamplingOptions,
    DEFAULT_CLASSIFY_TOL,
};
use crate::error::{check_dim, Error, Result};
use crate::numkernel::{Vector, FEAS_TOL};
use crate::sets::{intersect, project_intersection, SetSpec};
use crate::transversality::{Evidence, Notion, Status, TransversalityCertificate};

/// Base point mismatch tolerated between a certificate and the checked point.
const X0_TOL: f64 = 1e-9;
/// Fraction of decided relevant directions needed for a sampled "holds".
const MIN_CONFIDENCE: f64 = 0.95;
/// Distance from a unit generator to a cone below which it counts as contained.
pub const ROUNDING_TOL: f64 = 1e-9;

/// Number of net directions in dimension `n`.
pub fn net_size(n: usize) -> usize {
    match n {
        0 | 1 => 0,
        2 => 720,
        3 => 2000,
        _ => 2000 * n / 3,
    }
}

/// Which tangent cones a report compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    /// Bouligand cone of `A`, derivable cone of `B`.
    BouligandDerivable,
    Clarke,
}

/// Status of the subtransversality hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Certified,
    Refuted,
    /// A certificate was supplied but neither certifies nor refutes subtransversality.
    Unverified,
    NotSupplied,
}

impl Hypothesis {
    /// Reads the hypothesis off a certificate at `x0`.
    pub fn from_certificate(cert: Option<&TransversalityCertificate>, x0: &Vector) -> Result<Self> {
        let Some(c) = cert else {
            return Ok(Hypothesis::NotSupplied);
        };
        check_dim(x0.dim(), c.x0.dim())?;
        if c.x0.dist(x0) > X0_TOL {
            return Err(Error::InvalidArgument("certificate was issued at a different point".into()));
        }
        // Every certified notion implies subtransversality; only a refuted
        // subtransversality certificate refutes it.
        Ok(match (&c.status, c.notion) {
            (Status::Certified, _) => Hypothesis::Certified,
            (Status::Refuted { .. }, Notion::Subtransversal) => Hypothesis::Refuted,
            _ => Hypothesis::Unverified,
        })
    }

    pub fn is_met(self) -> bool {
        self == Hypothesis::Certified
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// `T_A ∩ G_B ⊂ T_{A∩B}`.
    TangentDerivableInclusion,
    /// `G_A ∩ G_B = G_{A∩B}`.
    DerivableEquality,
    /// `T̂_A ∩ T̂_B ⊂ T̂_{A∩B}`.
    ClarkeInclusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Undecided,
}

/// Verdict combined with the hypothesis status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    /// Holds under a certified hypothesis.
    Verified,
    /// Holds, but the hypothesis is not certified so nothing is claimed.
    HypothesisUnmet,
    /// Fails where the hypothesis is not certified.
    ConsistentCounterexample,
    /// Fails although the hypothesis is certified.
    Discrepancy,
    Inconclusive,
}

impl Label {
    fn new(verdict: Verdict, hypothesis: Hypothesis) -> Self {
        match (verdict, hypothesis.is_met()) {
            (Verdict::Holds, true) => Label::Verified,
            (Verdict::Holds, false) => Label::HypothesisUnmet,
            (Verdict::Fails, true) => Label::Discrepancy,
            (Verdict::Fails, false) => Label::ConsistentCounterexample,
            (Verdict::Undecided, _) => Label::Inconclusive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Verified => "verified",
            Label::HypothesisUnmet => "hypothesis unmet",
            Label::ConsistentCounterexample => "consistent counterexample",
            Label::Discrepancy => "DISCREPANCY",
            Label::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub claim: Claim,
    pub verdict: Verdict,
    pub label: Label,
    /// Unit directions violating the claim.
    pub counterexamples: Vec<Vector>,
    /// Decided fraction of the directions the claim constrains (sampled runs only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

/// Memberships of one net direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionRow {
    pub direction: Vector,
    pub a: Membership,
    pub a_derivable: Membership,
    pub b: Membership,
    pub b_derivable: Membership,
    pub ab: Membership,
    pub ab_derivable: Membership,
    pub residual_a: f64,
    pub residual_b: f64,
    pub residual_ab: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub x0: Vector,
    pub kind: ConeKind,
    pub hypothesis: Hypothesis,
    pub evidence: Evidence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone_a: Option<PolyCone>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone_b: Option<PolyCone>,
    /// `cone_a ∩ cone_b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone_common: Option<PolyCone>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone_ab: Option<PolyCone>,
    pub claims: Vec<ClaimResult>,
    /// `T_{A∩B} ⊂ T_A` and `T_{A∩B} ⊂ T_B`, which hold without any hypothesis.
    pub monotone: bool,
    pub monotone_violations: Vec<Vector>,
    /// Per-direction table (sampled runs only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub directions: Vec<DirectionRow>,
}

impl IntersectionReport {
    pub fn claim(&self, c: Claim) -> Option<&ClaimResult> {
        self.claims.iter().find(|r| r.claim == c)
    }

    /// Any claim failing under a certified hypothesis, or a monotonicity failure.
    pub fn has_discrepancy(&self) -> bool {
        !self.monotone || self.claims.iter().any(|c| c.label == Label::Discrepancy)
    }

    pub fn any_fails(&self) -> bool {
        self.claims.iter().any(|c| c.verdict == Verdict::Fails)
    }

    /// Per-direction table as CSV.
    pub fn directions_csv(&self) -> Result<String> {
        let ser = |e: csv::Error| Error::Serialization(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "direction",
            "a",
            "a_derivable",
            "b",
            "b_derivable",
            "ab",
            "ab_derivable",
            "residual_a",
            "residual_b",
            "residual_ab",
        ])
        .map_err(ser)?;
        let name = |m: Membership| match m {
            Membership::In => "in",
            Membership::Out => "out",
            Membership::Undecided => "undecided",
        };
        for r in &self.directions {
            let dir = r.direction.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
            w.write_record([
                dir,
                name(r.a).into(),
                name(r.a_derivable).into(),
                name(r.b).into(),
                name(r.b_derivable).into(),
                name(r.ab).into(),
                name(r.ab_derivable).into(),
                r.residual_a.to_string(),
                r.residual_b.to_string(),
                r.residual_ab.to_string(),
            ])
            .map_err(ser)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Source of tangent-cone memberships for one set.
enum Oracle {
    Exact(PolyCone),
    Set(SetSpec),
    Intersection(SetSpec, SetSpec),
}

struct Classified {
    bouligand: Membership,
    derivable: Membership,
    residual: f64,
}

fn by_threshold(d: f64, tol: f64) -> Membership {
    if d <= tol {
        Membership::In
    } else if d >= 10.0 * tol {
        Membership::Out
    } else {
        Membership::Undecided
    }
}

impl Oracle {
    fn for_set(s: &SetSpec, x0: &Vector) -> Result<Self> {
        if s.is_convex() {
            if let Some(c) = exact_convex_cone(s, x0)? {
                return Ok(Oracle::Exact(c));
            }
        }
        Ok(Oracle::Set(s.clone()))
    }

    fn for_intersection(a: &SetSpec, b: &SetSpec, x0: &Vector) -> Result<Self> {
        match intersect(a, b) {
            Ok(s) => Oracle::for_set(&s, x0),
            Err(Error::Unsupported(_)) => Ok(Oracle::Intersection(a.clone(), b.clone())),
            Err(e) => Err(e),
        }
    }

    fn exact(&self) -> Option<&PolyCone> {
        match self {
            Oracle::Exact(c) => Some(c),
            _ => None,
        }
    }

    fn classify(&self, x0: &Vector, v: &Vector, grid: &[f64]) -> Result<Classified> {
        let tol = DEFAULT_CLASSIFY_TOL;
        let p = match self {
            Oracle::Exact(c) => {
                let d = c.distance(v)?;
                let m = by_threshold(d, tol);
                return Ok(Classified { bouligand: m, derivable: m, residual: d });
            }
            Oracle::Set(s) => profile_by(|p| s.distance(p), x0, v, grid, tol)?,
            Oracle::Intersection(a, b) => {
                profile_by(|p| Ok(project_intersection(a, b, p)?.point.dist(p)), x0, v, grid, tol)?
            }
        };
        let residual = p.residuals.iter().copied().filter(|r| r.is_finite()).fold(f64::INFINITY, f64::min);
        Ok(Classified { bouligand: p.bouligand, derivable: p.derivable, residual })
    }
}

fn check_point(a: &SetSpec, b: &SetSpec, x0: &Vector) -> Result<()> {
    check_dim(a.dim(), b.dim())?;
    check_dim(a.dim(), x0.dim())?;
    for s in [a, b] {
        let residual = s.distance(x0)?;
        if residual > FEAS_TOL {
            return Err(Error::NotMember { residual });
        }
    }
    Ok(())
}

fn claim_result(claim: Claim, verdict: Verdict, hypothesis: Hypothesis, counterexamples: Vec<Vector>) -> ClaimResult {
    ClaimResult { claim, verdict, label: Label::new(verdict, hypothesis), counterexamples, confidence: None }
}

/// Unit generators of `inner` outside `outer`.
///
/// Cones built from independently rounded descriptions of the same set can
/// differ in the last bits, so a generator failing the exact test still
/// counts as contained when it is within [`ROUNDING_TOL`] of `outer`.
fn escaping(inner: &PolyCone, outer: &PolyCone) -> Result<Vec<Vector>> {
    let mut out = Vec::new();
    for g in inner.generators_exact() {
        if outer.contains_exact(&g) {
            continue;
        }
        let u = Vector::from_vec(unit_f64(&g));
        if outer.distance(&u)? > ROUNDING_TOL {
            out.push(u);
        }
    }
    Ok(out)
}

fn inclusion(claim: Claim, inner: &PolyCone, outer: &PolyCone, hypothesis: Hypothesis) -> Result<ClaimResult> {
    let bad = escaping(inner, outer)?;
    let verdict = if bad.is_empty() { Verdict::Holds } else { Verdict::Fails };
    Ok(claim_result(claim, verdict, hypothesis, bad))
}

fn exact_report(
    kind: ConeKind,
    x0: &Vector,
    hypothesis: Hypothesis,
    ca: &PolyCone,
    cb: &PolyCone,
    cab: &PolyCone,
) -> Result<IntersectionReport> {
    let common = cone_intersect(ca, cb)?;
    let mut claims = Vec::new();
    match kind {
        ConeKind::BouligandDerivable => {
            // On convex sets the Bouligand and derivable cones coincide.
            claims.push(inclusion(Claim::TangentDerivableInclusion, &common, cab, hypothesis)?);
            let mut bad = escaping(&common, cab)?;
            bad.extend(escaping(cab, &common)?);
            let verdict = if bad.is_empty() { Verdict::Holds } else { Verdict::Fails };
            claims.push(claim_result(Claim::DerivableEquality, verdict, hypothesis, bad));
        }
        ConeKind::Clarke => claims.push(inclusion(Claim::ClarkeInclusion, &common, cab, hypothesis)?),
    }
    let mut monotone_violations = escaping(cab, ca)?;
    monotone_violations.extend(escaping(cab, cb)?);
    Ok(IntersectionReport {
        x0: x0.clone(),
        kind,
        hypothesis,
        evidence: Evidence::Exact,
        cone_a: Some(ca.clone()),
        cone_b: Some(cb.clone()),
        cone_common: Some(common),
        cone_ab: Some(cab.clone()),
        claims,
        monotone: monotone_violations.is_empty(),
        monotone_violations,
        directions: Vec::new(),
    })
}

/// Tallies a sampled claim over the rows where `relevant` is `In`.
fn sampled_claim<R, T>(
    claim: Claim,
    rows: &[DirectionRow],
    hypothesis: Hypothesis,
    relevant: R,
    target: T,
) -> ClaimResult
where
    R: Fn(&DirectionRow) -> bool,
    T: Fn(&DirectionRow) -> Membership,
{
    let mut total = 0usize;
    let mut decided = 0usize;
    let mut bad = Vec::new();
    for r in rows.iter().filter(|r| relevant(r)) {
        total += 1;
        match target(r) {
            Membership::In => decided += 1,
            Membership::Out => {
                decided += 1;
                bad.push(r.direction.clone());
            }
            Membership::Undecided => {}
        }
    }
    let confidence = if total == 0 { 1.0 } else { decided as f64 / total as f64 };
    let verdict = if !bad.is_empty() {
        Verdict::Fails
    } else if confidence >= MIN_CONFIDENCE {
        Verdict::Holds
    } else {
        Verdict::Undecided
    };
    let mut r = claim_result(claim, verdict, hypothesis, bad);
    r.confidence = Some(confidence);
    r
}

fn sampled_report(
    kind: ConeKind,
    x0: &Vector,
    hypothesis: Hypothesis,
    oa: &Oracle,
    ob: &Oracle,
    oab: &Oracle,
) -> Result<IntersectionReport> {
    let n = x0.dim();
    let grid = SamplingOptions::default().grid();
    let mut rows = Vec::new();
    for v in direction_net(n, net_size(n), 0) {
        let a = oa.classify(x0, &v, &grid)?;
        let b = ob.classify(x0, &v, &grid)?;
        let ab = oab.classify(x0, &v, &grid)?;
        rows.push(DirectionRow {
            direction: v,
            a: a.bouligand,
            a_derivable: a.derivable,
            b: b.bouligand,
            b_derivable: b.derivable,
            ab: ab.bouligand,
            ab_derivable: ab.derivable,
            residual_a: a.residual,
            residual_b: b.residual,
            residual_ab: ab.residual,
        });
    }
    let is_in = |m: Membership| m == Membership::In;
    let mut claims = Vec::new();
    match kind {
        ConeKind::BouligandDerivable => {
            claims.push(sampled_claim(
                Claim::TangentDerivableInclusion,
                &rows,
                hypothesis,
                |r| is_in(r.a) && is_in(r.b_derivable),
                |r| r.ab,
            ));
            let forward = sampled_claim(
                Claim::DerivableEquality,
                &rows,
                hypothesis,
                |r| is_in(r.a_derivable) && is_in(r.b_derivable),
                |r| r.ab_derivable,
            );
            let backward = sampled_claim(
                Claim::DerivableEquality,
                &rows,
                hypothesis,
                |r| is_in(r.ab_derivable),
                |r| match (r.a_derivable, r.b_derivable) {
                    (Membership::Out, _) | (_, Membership::Out) => Membership::Out,
                    (Membership::In, Membership::In) => Membership::In,
                    _ => Membership::Undecided,
                },
            );
            claims.push(merge(forward, backward, hypothesis));
        }
        ConeKind::Clarke => claims.push(sampled_claim(
            Claim::ClarkeInclusion,
            &rows,
            hypothesis,
            |r| is_in(r.a) && is_in(r.b),
            |r| r.ab,
        )),
    }
    let monotone_violations: Vec<Vector> = rows
        .iter()
        .filter(|r| is_in(r.ab) && (r.a == Membership::Out || r.b == Membership::Out))
        .map(|r| r.direction.clone())
        .collect();
    Ok(IntersectionReport {
        x0: x0.clone(),
        kind,
        hypothesis,
        evidence: Evidence::Empirical,
        cone_a: oa.exact().cloned(),
        cone_b: ob.exact().cloned(),
        cone_common: None,
        cone_ab: oab.exact().cloned(),
        claims,
        monotone: monotone_violations.is_empty(),
        monotone_violations,
        directions: rows,
    })
}

fn merge(a: ClaimResult, b: ClaimResult, hypothesis: Hypothesis) -> ClaimResult {
    let verdict = match (a.verdict, b.verdict) {
        (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
        (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
        _ => Verdict::Undecided,
    };
    let mut bad = a.counterexamples;
    bad.extend(b.counterexamples);
    let mut r = claim_result(a.claim, verdict, hypothesis, bad);
    r.confidence = match (a.confidence, b.confidence) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    r
}

/// Checks `T_A ∩ G_B ⊂ T_{A∩B}` and `G_A ∩ G_B = G_{A∩B}` at `x0`.
///
/// The verdicts are always computed; `sub_cert` only decides how a failure
/// is labeled.
pub fn check_bouligand_derivable(
    a: &SetSpec,
    b: &SetSpec,
    x0: &Vector,
    sub_cert: Option<&TransversalityCertificate>,
) -> Result<IntersectionReport> {
    check_point(a, b, x0)?;
    let hypothesis = Hypothesis::from_certificate(sub_cert, x0)?;
    let oa = Oracle::for_set(a, x0)?;
    let ob = Oracle::for_set(b, x0)?;
    let oab = Oracle::for_intersection(a, b, x0)?;
    match (oa.exact(), ob.exact(), oab.exact()) {
        (Some(ca), Some(cb), Some(cab)) => exact_report(ConeKind::BouligandDerivable, x0, hypothesis, ca, cb, cab),
        _ => sampled_report(ConeKind::BouligandDerivable, x0, hypothesis, &oa, &ob, &oab),
    }
}

/// Checks `T̂_A ∩ T̂_B ⊂ T̂_{A∩B}` at `x0` for convex `A` and `B`, where the
/// Clarke and Bouligand cones coincide.
pub fn check_clarke(
    a: &SetSpec,
    b: &SetSpec,
    x0: &Vector,
    sub_cert: Option<&TransversalityCertificate>,
) -> Result<IntersectionReport> {
    check_point(a, b, x0)?;
    if !(a.is_convex() && b.is_convex()) {
        return Err(Error::Unsupported("Clarke cones are only computed for convex sets".into()));
    }
    let hypothesis = Hypothesis::from_certificate(sub_cert, x0)?;
    let oa = Oracle::for_set(a, x0)?;
    let ob = Oracle::for_set(b, x0)?;
    let oab = Oracle::for_intersection(a, b, x0)?;
    match (oa.exact(), ob.exact(), oab.exact()) {
        (Some(ca), Some(cb), Some(cab)) => exact_report(ConeKind::Clarke, x0, hypothesis, ca, cb, cab),
        _ => sampled_report(ConeKind::Clarke, x0, hypothesis, &oa, &ob, &oab),
    }
}
