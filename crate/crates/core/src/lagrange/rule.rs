//! Multiplier rule by separation of tangent cones in `X × R`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::problem::OptProblem;
use super::separate::{separate_cones, Separation};
use crate::cones::{
    cone_diff, cone_intersect, exact_convex_cone, is_dense_difference, profile_by, unit_f64, Membership, PolyCone,
    SamplingOptions, DEFAULT_CLASSIFY_TOL,
};
use crate::error::{check_dim, Error, Result};
use crate::gapreduce::lower_product;
use crate::numkernel::{Polyhedron, Vector};
use crate::sets::SetSpec;
use crate::transversality::{
    estimate_subtransversality_constant, points_in_set, shell_points, Budget, TransversalityCertificate,
};

/// Tolerance of the condition checks on unit cone vectors.
pub const CONDITION_TOL: f64 = 1e-9;
/// Random cone samples per condition check.
pub const CONDITION_SAMPLES: usize = 100;
/// `η` below this (relative to `‖(ξ, η)‖`) is rounded to zero.
const ETA_SNAP: f64 = 1e-12;
/// Radius of the ball around the chosen direction in the separation step.
const SEPARATION_RADIUS: f64 = 0.5;
/// Radius of the neighbourhood sampled for minimality and corroboration.
const NEIGHBOURHOOD: f64 = 0.5;

/// `(ξ, η)` with `(ξ, η) ≠ 0` and `η ∈ {0, 1}`; `ξ` is a unit vector when `η = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierPair {
    pub xi: Vector,
    pub eta: f64,
}

impl MultiplierPair {
    pub fn new(xi: Vector, eta: f64) -> Result<Self> {
        if eta != 0.0 && eta != 1.0 {
            return Err(Error::InvalidArgument("eta must be 0 or 1".into()));
        }
        if eta == 0.0 && xi.norm() == 0.0 {
            return Err(Error::InvalidArgument("(xi, eta) must be nonzero".into()));
        }
        Ok(Self { xi, eta })
    }

    /// Canonical scaling of a nonzero functional `(ζ, τ)` with `τ ≥ 0`.
    fn normalized(zeta: &Vector, tau: f64) -> Result<Self> {
        let scale = zeta.norm().max(tau.abs());
        if scale == 0.0 {
            return Err(Error::InvalidArgument("zero functional".into()));
        }
        if tau < -ETA_SNAP * scale {
            return Err(Error::InvalidArgument("functional has negative eta".into()));
        }
        if tau <= ETA_SNAP * scale {
            return Self::new(zeta.scale(1.0 / zeta.norm()), 0.0);
        }
        Self::new(zeta.scale(1.0 / tau), 1.0)
    }

    /// Pairing with `(w, s) ∈ X × R`.
    pub fn pair(&self, w: &Vector) -> f64 {
        let n = self.xi.dim();
        self.xi.dot(&w.head(n)) + self.eta * w[n]
    }
}

/// Direct evaluation of conditions (i)-(iv) on generators and random cone samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionChecks {
    /// (i) `(ξ, η) ≠ 0`.
    pub nonzero: bool,
    /// (ii) `η ∈ {0, 1}`.
    pub eta_binary: bool,
    /// (iii) `max ⟨ξ, v⟩` over unit `v` of `C_S`.
    pub constraint_max: f64,
    /// (iv) `min ⟨ξ, w⟩ + η s` over unit `(w, s)` of `C_epi`.
    pub objective_min: f64,
    pub generators: usize,
    pub samples: usize,
}

impl ConditionChecks {
    pub fn constraint_ok(&self) -> bool {
        self.constraint_max <= CONDITION_TOL
    }

    pub fn objective_ok(&self) -> bool {
        self.objective_min >= -CONDITION_TOL
    }

    pub fn all_ok(&self) -> bool {
        self.nonzero && self.eta_binary && self.constraint_ok() && self.objective_ok()
    }
}

/// Unit vectors of a cone: its generators, then `count` random nonnegative combinations.
fn cone_samples(c: &PolyCone, count: usize, rng: &mut ChaCha8Rng) -> (Vec<Vector>, usize) {
    let gens = c.generators();
    let mut out = gens.clone();
    if !gens.is_empty() {
        for _ in 0..count {
            let mut v = Vector::zeros(c.dim());
            for g in &gens {
                v = v.axpy(rng.gen::<f64>(), g);
            }
            if let Some(u) = v.normalized() {
                out.push(u);
            }
        }
    }
    let n = gens.len();
    (out, n)
}

/// Evaluates (i)-(iv) for `pair` against `C_epi ⊂ X × R` and `C_S ⊂ X`.
pub fn verify_multiplier(pair: &MultiplierPair, cepi: &PolyCone, cs: &PolyCone, seed: u64) -> Result<ConditionChecks> {
    let n = pair.xi.dim();
    check_dim(n + 1, cepi.dim())?;
    check_dim(n, cs.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (vs, gs) = cone_samples(cs, CONDITION_SAMPLES, &mut rng);
    let (ws, ge) = cone_samples(cepi, CONDITION_SAMPLES, &mut rng);
    let constraint_max = vs.iter().map(|v| pair.xi.dot(v)).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let objective_min = ws.iter().map(|w| pair.pair(w)).fold(f64::INFINITY, f64::min).min(0.0);
    Ok(ConditionChecks {
        nonzero: pair.xi.norm() > 0.0 || pair.eta != 0.0,
        eta_binary: pair.eta == 0.0 || pair.eta == 1.0,
        constraint_max,
        objective_min,
        generators: gs + ge,
        samples: vs.len() + ws.len() - gs - ge,
    })
}

/// A multiplier found by separation, with its verification record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub pair: MultiplierPair,
    /// Direction `(x̄, r̄)` of the ball missed by the cone difference.
    pub ball_center: Vector,
    pub separation: Separation,
    pub checks: ConditionChecks,
}

/// Data gathered when `C_epi − C_S × (−∞, 0]` is dense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseBranch {
    /// Unit `(w, s) ∈ C_epi` with `w ∈ C_S` and `s < 0`.
    pub descent: Option<Vector>,
    /// Subtransversality estimate for `epi f` and `S × (−∞, f(x0)]` at `(x0, f(x0))`.
    pub corroboration: Option<Box<TransversalityCertificate>>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MultiplierOutcome {
    Multiplier(MultiplierReport),
    /// The cone difference is dense, so the two sets cannot be subtransversal at a minimizer.
    NotSubtransversal(DenseBranch),
    /// Dense difference for a massive epigraph: `x0` cannot be a local minimizer.
    OptimalityContradiction(DenseBranch),
}

impl MultiplierOutcome {
    pub fn multiplier(&self) -> Option<&MultiplierReport> {
        match self {
            MultiplierOutcome::Multiplier(m) => Some(m),
            _ => None,
        }
    }

    pub fn dense_branch(&self) -> Option<&DenseBranch> {
        match self {
            MultiplierOutcome::Multiplier(_) => None,
            MultiplierOutcome::NotSubtransversal(d) | MultiplierOutcome::OptimalityContradiction(d) => Some(d),
        }
    }
}

/// Membership of `v` in the tangent cone of `set` at `x`: exact where a closed form exists, sampled otherwise.
fn tangent_membership(set: &SetSpec, x: &Vector, v: &Vector) -> Result<Membership> {
    if set.is_convex() {
        if let Some(c) = exact_convex_cone(set, x)? {
            let d = c.distance(v)?;
            return Ok(if d <= DEFAULT_CLASSIFY_TOL { Membership::In } else { Membership::Out });
        }
    }
    let options = SamplingOptions::default();
    Ok(profile_by(|p| set.distance(p), x, v, &options.grid(), options.tolerance)?.bouligand)
}

fn validate_cone(set: &SetSpec, x: &Vector, cone: &PolyCone, name: &str) -> Result<()> {
    for g in cone.generators() {
        if tangent_membership(set, x, &g)? == Membership::Out {
            return Err(Error::Precondition(format!(
                "supplied cone {name} has generator {:?} outside the tangent cone",
                g.as_slice()
            )));
        }
    }
    Ok(())
}

/// Unit descent direction `(w, s)` with `(w, s) ∈ C_epi`, `w ∈ C_S`, `s < 0`, if one exists.
pub fn descent_direction(cepi: &PolyCone, cs: &PolyCone) -> Result<Option<Vector>> {
    let n = cs.dim();
    check_dim(n + 1, cepi.dim())?;
    let k = cone_intersect(cepi, &cs.product(&PolyCone::whole(1))?)?;
    let best = k
        .generators_exact()
        .into_iter()
        .filter(|g| g[n].sign() == num_bigint::Sign::Minus)
        .map(|g| Vector::from_vec(unit_f64(&g)))
        .min_by(|a, b| a[n].total_cmp(&b[n]));
    Ok(best)
}

/// Generator of `C_epi° ∩ −(C_S° × [0, ∞))` with the largest relative `η`, as `(x̄, r̄)`.
fn ball_direction(cepi: &PolyCone, lifted: &PolyCone) -> Result<Vector> {
    let common = cone_intersect(&cepi.polar(), &lifted.polar().negate())?;
    let n = cepi.dim() - 1;
    common
        .generators()
        .into_iter()
        .min_by(|a, b| a[n].total_cmp(&b[n]))
        .ok_or_else(|| Error::InconsistentCone("non-dense difference without a polar witness".into()))
}

fn separated_multiplier(cepi: &PolyCone, cs: &PolyCone, lifted: &PolyCone) -> Result<MultiplierReport> {
    let n = cs.dim();
    let c_tilde = cone_diff(cepi, lifted)?;
    let center = ball_direction(cepi, lifted)?;
    let separation = separate_cones(&c_tilde, &center, SEPARATION_RADIUS)?
        .ok_or_else(|| Error::InconsistentCone("ball around a polar direction meets the cone difference".into()))?;
    let pair = MultiplierPair::normalized(&separation.xi.head(n), separation.xi[n])?;
    let checks = verify_multiplier(&pair, cepi, cs, 0)?;
    if !checks.all_ok() {
        return Err(Error::InconsistentCone(format!("multiplier failed re-verification: {checks:?}")));
    }
    Ok(MultiplierReport { pair, ball_center: center, separation, checks })
}

fn corroborate(p: &OptProblem, notes: &mut Vec<String>) -> Option<Box<TransversalityCertificate>> {
    let below = match Polyhedron::new(vec![vec![1.0]], vec![p.value]) {
        Ok(h) => SetSpec::Polyhedron(h),
        Err(e) => {
            notes.push(format!("no corroboration: {e}"));
            return None;
        }
    };
    let lifted = SetSpec::Product { factors: vec![p.constraint.clone(), below] };
    match estimate_subtransversality_constant(&p.objective, &lifted, &p.point(), NEIGHBOURHOOD, Budget::default()) {
        Ok(c) => {
            if c.status.is_certified() {
                notes.push(
                    "epi f and S x (-inf, f(x0)] look subtransversal; with a dense difference this rules out a local minimum at x0"
                        .into(),
                );
            } else if c.status.is_refuted() {
                notes.push("epi f and S x (-inf, f(x0)] are not subtransversal on samples".into());
            }
            Some(Box::new(c))
        }
        Err(e) => {
            notes.push(format!("no corroboration: {e}"));
            None
        }
    }
}

fn dense_branch(p: &OptProblem, cepi: &PolyCone, cs: &PolyCone) -> Result<DenseBranch> {
    let descent = descent_direction(cepi, cs)?;
    let mut notes = Vec::new();
    if let Some(d) = &descent {
        notes.push(format!("descent direction {:?} lies in C_epi with a feasible tangent part", d.as_slice()));
    }
    let corroboration = corroborate(p, &mut notes);
    Ok(DenseBranch { descent, corroboration, notes })
}

/// Multiplier rule for supplied convex cones `C_epi ⊂ T_{epi f}(x0, f(x0))` and `C_S ⊂ T_S(x0)`.
///
/// When `C_epi − C_S × (−∞, 0]` is not dense, the closed difference is
/// separated from a ball it misses and the functional is normalized to
/// `η ∈ {0, 1}`. Otherwise the dense-branch verdict is returned together
/// with a descent direction, if any, and a subtransversality estimate.
pub fn multiplier_rule(p: &OptProblem, cepi: &PolyCone, cs: &PolyCone) -> Result<MultiplierOutcome> {
    let n = p.x0.dim();
    check_dim(n + 1, cepi.dim())?;
    check_dim(n, cs.dim())?;
    validate_cone(&p.objective, &p.point(), cepi, "C_epi")?;
    validate_cone(&p.constraint, &p.x0, cs, "C_S")?;
    let lifted = lower_product(cs)?;
    if is_dense_difference(cepi, &lifted)?.dense {
        return Ok(MultiplierOutcome::NotSubtransversal(dense_branch(p, cepi, cs)?));
    }
    Ok(MultiplierOutcome::Multiplier(separated_multiplier(cepi, cs, &lifted)?))
}

/// Multiplier rule with the problem's own tangent cones.
pub fn multiplier_rule_default(p: &OptProblem) -> Result<MultiplierOutcome> {
    let (cepi, cs) = p.tangent_cones()?;
    multiplier_rule(p, &cepi, &cs)
}

/// Result of [`multiplier_rule_massive`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassiveReport {
    /// Every closed epigraph in finite dimensions is massive.
    pub massive: bool,
    /// Cones are Clarke cones standing in for the G-objects.
    pub clarke_realized: bool,
    pub outcome: MultiplierOutcome,
    /// Sampled points of `S` with a lower objective value than `x0`.
    pub warnings: Vec<String>,
}

/// Points of `S` near `x0` where `f` is below `f(x0)`.
fn minimality_warnings(p: &OptProblem) -> Vec<String> {
    let Some(f) = p.function() else {
        return vec!["objective is not an explicit function; minimality not sampled".into()];
    };
    let shell = shell_points(&p.x0, NEIGHBOURHOOD, Budget::default());
    let mut worst: Option<(f64, Vector)> = None;
    for x in points_in_set(&p.constraint, &p.x0, NEIGHBOURHOOD, &shell) {
        if let Some(v) = f.eval(x.as_slice()) {
            if v < p.value - 1e-9 * (1.0 + p.value.abs()) && worst.as_ref().is_none_or(|(w, _)| v < *w) {
                worst = Some((v, x));
            }
        }
    }
    worst
        .map(|(v, x)| vec![format!("x0 fails minimality on samples: f = {v} < {} at {:?}", p.value, x.as_slice())])
        .unwrap_or_default()
}

/// Multiplier rule with Clarke cones, using that the epigraph is massive.
///
/// A non-dense difference yields a multiplier by separation. A dense one
/// makes the two sets tangentially transversal and hence subtransversal, so
/// `x0` cannot be a local minimizer; this is reported with the descent data.
pub fn multiplier_rule_massive(p: &OptProblem) -> Result<MassiveReport> {
    let (cepi, cs) = p.clarke_cones()?;
    let lifted = lower_product(&cs)?;
    let outcome = if is_dense_difference(&cepi, &lifted)?.dense {
        MultiplierOutcome::OptimalityContradiction(dense_branch(p, &cepi, &cs)?)
    } else {
        MultiplierOutcome::Multiplier(separated_multiplier(&cepi, &cs, &lifted)?)
    };
    Ok(MassiveReport { massive: true, clarke_realized: true, outcome, warnings: minimality_warnings(p) })
}
