//! Analyses a scenario can request, with their parameters and execution.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use transversal_core::gapreduce::{gap_reduction_solve_with, GapParams, GapStatus};
use transversal_core::intersection::{check_bouligand_derivable, check_clarke, IntersectionReport};
use transversal_core::lagrange::{
    multiplier_rule_default, multiplier_rule_massive, qualification_equivalences, MultiplierOutcome, OptProblem,
};
use transversal_core::numkernel::Vector;
use transversal_core::sets::SetSpec;
use transversal_core::transversality::{
    altproj_rate, certify_massive_dense, certify_prop44, certify_transversality_kruger,
    estimate_subtransversality_constant, estimate_tangential_constants, transfer_constants_tangential_to_sub,
    transfer_constants_transversal_to_tangential, validate_tangential_constants, Budget, Status,
    SubtransversalConstants, TangentialConstants, TransversalityCertificate,
};

use crate::scenario::Scenario;

/// Relative slack allowed between a sampled ratio and the transferred bound `K`.
pub const CHAIN_SLACK: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrugerParams {
    pub alpha: f64,
    pub delta: f64,
}

impl Default for KrugerParams {
    fn default() -> Self {
        Self { alpha: 0.1, delta: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeltaParams {
    pub delta: f64,
}

impl Default for DeltaParams {
    fn default() -> Self {
        Self { delta: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateParams {
    #[serde(rename = "M")]
    pub m: f64,
    pub eta: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Prop44Params {
    pub alpha: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub delta: f64,
}

impl Default for Prop44Params {
    fn default() -> Self {
        Self { alpha: 0.5, m: 1.0, delta: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AltprojParams {
    pub start: Vector,
    #[serde(default = "default_altproj_iters")]
    pub iters: usize,
}

fn default_altproj_iters() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapRunParams {
    #[serde(rename = "xA")]
    pub x_a: Vector,
    #[serde(rename = "xB")]
    pub x_b: Vector,
    #[serde(rename = "M")]
    pub m: f64,
    pub eta: f64,
    pub delta: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-8
}

/// Where the subtransversality hypothesis of an intersection check comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisSource {
    /// Run the subtransversality estimator first.
    #[default]
    Estimate,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntersectionParams {
    pub hypothesis: HypothesisSource,
    pub delta: f64,
}

impl Default for IntersectionParams {
    fn default() -> Self {
        Self { hypothesis: HypothesisSource::Estimate, delta: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NoParams {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Analysis {
    Kruger(KrugerParams),
    TangentialConstants(DeltaParams),
    ValidateTangential(ValidateParams),
    Subtransversality(DeltaParams),
    ImplicationChain(KrugerParams),
    Prop44(Prop44Params),
    MassiveDense(NoParams),
    Altproj(AltprojParams),
    GapReduction(GapRunParams),
    IntersectionBouligand(IntersectionParams),
    IntersectionClarke(IntersectionParams),
    MultiplierRule(NoParams),
    MultiplierRuleMassive(NoParams),
    StrongMinimum(NoParams),
    Qualification(NoParams),
}

/// Result of one analysis, ready for the report.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnalysisOutcome {
    pub result: Value,
    pub discrepancy: bool,
    /// Notion or check name to verdict.
    pub verdicts: BTreeMap<String, String>,
    pub constants: BTreeMap<String, f64>,
    /// `(file suffix, contents)` of CSV traces.
    pub artifacts: Vec<(String, String)>,
}

fn positive(name: &str, x: f64) -> Result<(), String> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be positive, got {x}"))
    }
}

impl Analysis {
    pub fn name(&self) -> &'static str {
        match self {
            Analysis::Kruger(_) => "kruger",
            Analysis::TangentialConstants(_) => "tangential_constants",
            Analysis::ValidateTangential(_) => "validate_tangential",
            Analysis::Subtransversality(_) => "subtransversality",
            Analysis::ImplicationChain(_) => "implication_chain",
            Analysis::Prop44(_) => "prop44",
            Analysis::MassiveDense(_) => "massive_dense",
            Analysis::Altproj(_) => "altproj",
            Analysis::GapReduction(_) => "gap_reduction",
            Analysis::IntersectionBouligand(_) => "intersection_bouligand",
            Analysis::IntersectionClarke(_) => "intersection_clarke",
            Analysis::MultiplierRule(_) => "multiplier_rule",
            Analysis::MultiplierRuleMassive(_) => "multiplier_rule_massive",
            Analysis::StrongMinimum(_) => "strong_minimum",
            Analysis::Qualification(_) => "qualification",
        }
    }

    fn needs(&self) -> Requirement {
        match self {
            Analysis::MultiplierRule(_) | Analysis::MultiplierRuleMassive(_) | Analysis::StrongMinimum(_) => {
                Requirement::Problem
            }
            Analysis::Qualification(_) => Requirement::Functions,
            _ => Requirement::Sets,
        }
    }

    /// Static checks against the scenario; the message names the problem.
    pub fn validate(&self, sc: &Scenario) -> Result<(), String> {
        match self.needs() {
            Requirement::Sets if sc.sets.is_none() => return Err("needs a [sets] table".into()),
            Requirement::Problem if sc.problem.is_none() => return Err("needs a [problem] table".into()),
            Requirement::Functions if sc.qualification.is_none() => {
                return Err("needs a [qualification] table".into())
            }
            _ => {}
        }
        let n = sc.x0.dim();
        match self {
            Analysis::Kruger(p) | Analysis::ImplicationChain(p) => {
                positive("alpha", p.alpha)?;
                positive("delta", p.delta)
            }
            Analysis::TangentialConstants(p) | Analysis::Subtransversality(p) => positive("delta", p.delta),
            Analysis::ValidateTangential(p) => {
                positive("M", p.m)?;
                positive("eta", p.eta)?;
                positive("delta", p.delta)
            }
            Analysis::Prop44(p) => {
                if !(0.0..1.0).contains(&p.alpha) {
                    return Err(format!("alpha must lie in [0, 1), got {}", p.alpha));
                }
                positive("M", p.m)?;
                positive("delta", p.delta)
            }
            Analysis::Altproj(p) => {
                if p.start.dim() != n {
                    return Err(format!("start has dimension {} but x0 has {n}", p.start.dim()));
                }
                if p.iters == 0 {
                    return Err("iters must be positive".into());
                }
                Ok(())
            }
            Analysis::GapReduction(p) => {
                if p.x_a.dim() != n || p.x_b.dim() != n {
                    return Err(format!("start points must have dimension {n}"));
                }
                positive("M", p.m)?;
                positive("eta", p.eta)?;
                positive("delta", p.delta)?;
                positive("tol", p.tol)
            }
            Analysis::IntersectionBouligand(p) | Analysis::IntersectionClarke(p) => positive("delta", p.delta),
            _ => Ok(()),
        }
    }

    /// Replaces the solver tolerance where the analysis has one.
    pub fn set_tol(&mut self, tol: f64) {
        if let Analysis::GapReduction(p) = self {
            p.tol = tol;
        }
    }

    /// Runs the analysis; an error message is recorded in the report instead of aborting.
    pub fn run(&self, sc: &Scenario) -> Result<AnalysisOutcome, String> {
        self.validate(sc)?;
        self.execute(sc).map_err(|e| e.to_string())
    }

    fn execute(&self, sc: &Scenario) -> transversal_core::Result<AnalysisOutcome> {
        let budget = sc.sampling_budget();
        let x0 = &sc.x0;
        let pair = sc.sets.as_ref().map(|p| (&p.a, &p.b));
        let sets = || pair.expect("validated");
        let out = match self {
            Analysis::Kruger(p) => {
                let (a, b) = sets();
                certificate(certify_transversality_kruger(a, b, x0, p.alpha, p.delta, budget)?)
            }
            Analysis::TangentialConstants(p) => {
                let (a, b) = sets();
                certificate(estimate_tangential_constants(a, b, x0, p.delta, budget)?)
            }
            Analysis::ValidateTangential(p) => {
                let (a, b) = sets();
                certificate(validate_tangential_constants(a, b, x0, p.m, p.eta, p.delta, budget)?)
            }
            Analysis::Subtransversality(p) => {
                let (a, b) = sets();
                certificate(estimate_subtransversality_constant(a, b, x0, p.delta, budget)?)
            }
            Analysis::ImplicationChain(p) => {
                let (a, b) = sets();
                let chain = implication_chain(a, b, x0, p.alpha, p.delta, budget)?;
                let mut out = certificate(chain.kruger.clone());
                for c in [&chain.validation, &chain.estimate].into_iter().flatten() {
                    merge_certificate(&mut out, c);
                }
                if let Some(v) = chain.transfers_verified {
                    out.verdicts.insert("transfers".into(), if v { "verified" } else { "violated" }.into());
                }
                out.discrepancy = chain.transfers_verified == Some(false);
                out.result = to_value(&chain)?;
                out
            }
            Analysis::Prop44(p) => {
                let (a, b) = sets();
                certificate(certify_prop44(a, b, x0, p.delta, p.alpha, p.m, budget)?)
            }
            Analysis::MassiveDense(_) => {
                let (a, b) = sets();
                certificate(certify_massive_dense(a, b, x0)?)
            }
            Analysis::Altproj(p) => {
                let (a, b) = sets();
                let r = altproj_rate(a, b, &p.start, p.iters)?;
                AnalysisOutcome { result: to_value(&r)?, ..Default::default() }
            }
            Analysis::GapReduction(p) => {
                let (a, b) = sets();
                let params =
                    GapParams { m: p.m, eta: p.eta, delta: p.delta, tol: p.tol, max_iters: sc.budget.max_iters };
                let trace = gap_reduction_solve_with(a, b, x0, &p.x_a, &p.x_b, params)?;
                let violations = trace.bound_violations();
                let mut out = AnalysisOutcome {
                    result: json!({ "trace": to_value(&trace)?, "bound_violations": violations }),
                    artifacts: vec![("gap.csv".into(), trace.to_csv()?)],
                    ..Default::default()
                };
                let status = match trace.status {
                    GapStatus::Converged => "converged",
                    GapStatus::Stalled => "stalled",
                    GapStatus::Budget => "budget",
                };
                out.verdicts.insert("gap_reduction".into(), status.into());
                out.constants.insert("final_gap".into(), trace.final_gap());
                out
            }
            Analysis::IntersectionBouligand(p) | Analysis::IntersectionClarke(p) => {
                let (a, b) = sets();
                let cert = match p.hypothesis {
                    HypothesisSource::Estimate => Some(estimate_subtransversality_constant(a, b, x0, p.delta, budget)?),
                    HypothesisSource::None => None,
                };
                let report = if matches!(self, Analysis::IntersectionClarke(_)) {
                    check_clarke(a, b, x0, cert.as_ref())?
                } else {
                    check_bouligand_derivable(a, b, x0, cert.as_ref())?
                };
                intersection_outcome(&report, cert.as_ref())?
            }
            Analysis::MultiplierRule(_) => {
                let outcome = multiplier_rule_default(&problem(sc)?)?;
                multiplier_outcome(&outcome, to_value(&outcome)?)
            }
            Analysis::MultiplierRuleMassive(_) => {
                let r = multiplier_rule_massive(&problem(sc)?)?;
                multiplier_outcome(&r.outcome, to_value(&r)?)
            }
            Analysis::StrongMinimum(_) => {
                let r = problem(sc)?.strong_minimum()?;
                let mut out = AnalysisOutcome { result: to_value(&r)?, ..Default::default() };
                let verdict = if r.mismatches.is_empty() && r.exact_equal != Some(false) { "invariant" } else { "changed" };
                out.verdicts.insert("epigraph_cone".into(), verdict.into());
                out
            }
            Analysis::Qualification(_) => {
                let q = sc.qualification.as_ref().expect("validated");
                let f1 = SetSpec::Epigraph { f: q.f1.clone() };
                let f2 = SetSpec::Epigraph { f: q.f2.clone() };
                let r = qualification_equivalences(&f1, &f2, x0)?;
                let mut out = AnalysisOutcome { result: to_value(&r)?, discrepancy: !r.agree(), ..Default::default() };
                let verdict = match (r.agree(), r.holds()) {
                    (false, _) => "disagree",
                    (true, true) => "holds",
                    (true, false) => "fails",
                };
                out.verdicts.insert("qualification".into(), verdict.into());
                out
            }
        };
        Ok(out)
    }
}

enum Requirement {
    Sets,
    Problem,
    Functions,
}

fn to_value<T: Serialize>(v: &T) -> transversal_core::Result<Value> {
    serde_json::to_value(v).map_err(|e| transversal_core::Error::Serialization(e.to_string()))
}

fn problem(sc: &Scenario) -> transversal_core::Result<OptProblem> {
    let p = sc.problem.as_ref().expect("validated");
    OptProblem::from_function(p.objective.clone(), p.constraint.clone(), sc.x0.clone())
}

fn status_word(s: &Status) -> &'static str {
    match s {
        Status::Certified => "certified",
        Status::Refuted { .. } => "refuted",
        Status::Inconclusive { .. } => "inconclusive",
    }
}

fn notion_key(c: &TransversalityCertificate) -> String {
    serde_json::to_value(c.notion).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn merge_certificate(out: &mut AnalysisOutcome, c: &TransversalityCertificate) {
    let key = notion_key(c);
    out.verdicts.insert(key, status_word(&c.status).into());
    let k = &c.constants;
    for (name, v) in [("M", k.m), ("delta", k.delta), ("eta", k.eta), ("K", k.k), ("alpha", k.alpha), ("zeta", k.zeta)] {
        if let Some(v) = v {
            out.constants.insert(name.into(), v);
        }
    }
}

fn certificate(c: TransversalityCertificate) -> AnalysisOutcome {
    let mut out = AnalysisOutcome::default();
    merge_certificate(&mut out, &c);
    out.result = serde_json::to_value(&c).unwrap_or(Value::Null);
    out
}

fn intersection_outcome(
    report: &IntersectionReport,
    cert: Option<&TransversalityCertificate>,
) -> transversal_core::Result<AnalysisOutcome> {
    let mut out = AnalysisOutcome::default();
    if let Some(c) = cert {
        merge_certificate(&mut out, c);
    }
    for c in &report.claims {
        let key = to_value(&c.claim)?.as_str().unwrap_or_default().to_string();
        let label = to_value(&c.label)?.as_str().unwrap_or_default().to_string();
        out.verdicts.insert(key, label);
    }
    out.discrepancy = report.has_discrepancy();
    if !report.directions.is_empty() {
        out.artifacts.push(("directions.csv".into(), report.directions_csv()?));
    }
    out.result = json!({ "hypothesis_certificate": cert, "report": to_value(report)? });
    Ok(out)
}

fn multiplier_outcome(outcome: &MultiplierOutcome, result: Value) -> AnalysisOutcome {
    let mut out = AnalysisOutcome { result, ..Default::default() };
    let verdict = match outcome {
        MultiplierOutcome::Multiplier(m) => {
            if m.checks.all_ok() {
                out.constants.insert("eta".into(), m.pair.eta);
                "multiplier"
            } else {
                "multiplier_unverified"
            }
        }
        MultiplierOutcome::NotSubtransversal(_) => "not_subtransversal",
        MultiplierOutcome::OptimalityContradiction(_) => "optimality_contradiction",
    };
    out.verdicts.insert("multiplier_rule".into(), verdict.into());
    out
}

/// Transversal, then tangentially transversal, then subtransversal, with
/// every transferred constant checked on samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub alpha: f64,
    pub delta: f64,
    pub kruger: TransversalityCertificate,
    pub tangential: Option<TangentialConstants>,
    /// Sampled check of the transferred `(M, η, δ)`.
    pub validation: Option<TransversalityCertificate>,
    pub subtransversal: Option<SubtransversalConstants>,
    /// Sampled ratio estimate on the transferred radius `ζ`.
    pub estimate: Option<TransversalityCertificate>,
    /// `K̂ / K`.
    pub k_ratio: Option<f64>,
    /// `None` when the first certificate does not hold and nothing is transferred.
    pub transfers_verified: Option<bool>,
}

pub fn implication_chain(
    a: &SetSpec,
    b: &SetSpec,
    x0: &Vector,
    alpha: f64,
    delta: f64,
    budget: Budget,
) -> transversal_core::Result<ChainReport> {
    let kruger = certify_transversality_kruger(a, b, x0, alpha, delta, budget)?;
    let mut r = ChainReport {
        alpha,
        delta,
        kruger,
        tangential: None,
        validation: None,
        subtransversal: None,
        estimate: None,
        k_ratio: None,
        transfers_verified: None,
    };
    if !r.kruger.status.is_certified() {
        return Ok(r);
    }
    let t = transfer_constants_transversal_to_tangential(alpha, delta)?;
    let (m, eta) = (t.m.value(), t.eta.value());
    let validation = validate_tangential_constants(a, b, x0, m, eta, delta, budget)?;
    let s = transfer_constants_tangential_to_sub(m, eta, delta)?;
    let estimate = estimate_subtransversality_constant(a, b, x0, s.zeta.value(), budget)?;
    let k_hat = estimate.constants.k.unwrap_or(0.0);
    let ratio = k_hat / s.k.value();
    r.transfers_verified = Some(validation.status.is_certified() && ratio <= CHAIN_SLACK);
    r.k_ratio = Some(ratio);
    r.tangential = Some(t);
    r.validation = Some(validation);
    r.subtransversal = Some(s);
    r.estimate = Some(estimate);
    Ok(r)
}
