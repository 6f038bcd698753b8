use proptest::prelude::*;
use transversal_core::cones::PolyCone;
use transversal_core::lagrange::*;
use transversal_core::numkernel::{lp_solve, LpProblem, Polyhedron, Vector};
use transversal_core::sets::{ScalarFn, SetSpec};
use transversal_core::Error;

fn v(c: &[f64]) -> Vector {
    Vector::from_slice(c)
}

fn close(a: &Vector, b: &[f64], tol: f64) -> bool {
    a.dist(&v(b)) <= tol
}

fn nonneg_line() -> SetSpec {
    SetSpec::halfspace(vec![-1.0], 0.0).unwrap()
}

fn line_problem(slope: f64) -> OptProblem {
    OptProblem::from_function(ScalarFn::affine(vec![slope], 0.0), nonneg_line(), v(&[0.0])).unwrap()
}

#[test]
fn separation_examples() {
    let upper = PolyCone::from_halfspaces(2, &[v(&[0.0, -1.0])]).unwrap();
    let s = separate_cones(&upper, &v(&[0.0, -1.0]), 0.1).unwrap().unwrap();
    assert!(close(&s.xi, &[0.0, 1.0], 1e-12));
    assert!((s.bound - (-0.9)).abs() < 1e-12);
    assert!(separate_cones(&PolyCone::whole(3), &v(&[1.0, 0.0, 0.0]), 0.1).unwrap().is_none());
    let ray = PolyCone::ray(&v(&[1.0, 0.0])).unwrap();
    let s = separate_cones(&ray, &v(&[-1.0, 0.0]), 0.5).unwrap().unwrap();
    assert!(close(&s.xi, &[1.0, 0.0], 1e-12));
    // A ball reaching the cone cannot be separated strictly.
    assert!(separate_cones(&upper, &v(&[0.0, -1.0]), 1.0).unwrap().is_none());
    assert!(separate_cones(&upper, &v(&[0.0, -1.0]), 1.5).unwrap().is_none());
    assert!(matches!(separate_cones(&upper, &v(&[0.0, -1.0]), 0.0), Err(Error::InvalidArgument(_))));
    assert!(matches!(separate_cones(&upper, &v(&[0.0, 0.0]), 0.1), Err(Error::InvalidArgument(_))));
}

#[test]
fn separation_is_strict_on_ball_samples() {
    let c = PolyCone::from_generators(3, &[v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])]).unwrap();
    let d = v(&[-1.0, -1.0, 0.3]);
    let s = separate_cones(&c, &d, 0.2).unwrap().unwrap();
    for g in c.generators() {
        assert!(s.xi.dot(&g) >= -1e-12);
    }
    // Oracle: dist(d, C) is the norm of the negative part in the first two coordinates plus the third.
    let dist = (1.0f64 + 1.0 + 0.09).sqrt();
    assert!((s.distance - dist).abs() < 1e-9);
    assert!(s.bound < 0.0);
}

#[test]
fn minimum_of_linear_function_on_half_line() {
    let p = line_problem(1.0);
    let (cepi, cs) = p.tangent_cones().unwrap();
    let out = multiplier_rule(&p, &cepi, &cs).unwrap();
    let m = out.multiplier().expect("non-dense branch");
    assert_eq!(m.pair.eta, 1.0);
    assert!(close(&m.pair.xi, &[-1.0], 1e-12));
    assert!(m.checks.all_ok());
    assert_eq!(m.checks.samples, 2 * CONDITION_SAMPLES);
}

#[test]
fn unconstrained_smooth_minimum() {
    let f = ScalarFn::Quadratic { q: vec![vec![2.0, 0.0], vec![0.0, 2.0]], l: vec![0.0, 0.0], c: 0.0 };
    let p = OptProblem::from_function(f, SetSpec::whole_space(2), Vector::zeros(2)).unwrap();
    let out = multiplier_rule_default(&p).unwrap();
    let m = out.multiplier().unwrap();
    assert_eq!(m.pair.eta, 1.0);
    assert!(close(&m.pair.xi, &[0.0, 0.0], 1e-12));
}

#[test]
fn abnormal_instance_admits_eta_zero() {
    let f = ScalarFn::Quadratic { q: vec![vec![2.0]], l: vec![0.0], c: 0.0 };
    let p = OptProblem::from_function(f, SetSpec::point(v(&[0.0])), v(&[0.0])).unwrap();
    let cepi = PolyCone::ray(&v(&[0.0, 1.0])).unwrap();
    let cs = PolyCone::zero(1);
    let out = multiplier_rule(&p, &cepi, &cs).unwrap();
    let m = out.multiplier().unwrap();
    assert!(m.checks.all_ok());
    for xi in [1.0, -1.0] {
        let pair = MultiplierPair::new(v(&[xi]), 0.0).unwrap();
        assert!(verify_multiplier(&pair, &cepi, &cs, 3).unwrap().all_ok());
    }
    assert!(MultiplierPair::new(v(&[0.0]), 0.0).is_err());
    assert!(MultiplierPair::new(v(&[1.0]), 0.5).is_err());
}

#[test]
fn non_minimizer_fires_dense_branch() {
    let p = line_problem(-1.0);
    let (cepi, cs) = p.tangent_cones().unwrap();
    let out = multiplier_rule(&p, &cepi, &cs).unwrap();
    let MultiplierOutcome::NotSubtransversal(d) = &out else { panic!("{out:?}") };
    let s = 0.5f64.sqrt();
    assert!(close(d.descent.as_ref().unwrap(), &[s, -s], 1e-12));
    // Polyhedral sets are subtransversal, contradicting minimality.
    assert!(d.corroboration.as_ref().unwrap().status.is_certified());
}

#[test]
fn supplied_cones_are_validated() {
    let p = line_problem(1.0);
    let (_, cs) = p.tangent_cones().unwrap();
    let err = multiplier_rule(&p, &PolyCone::whole(2), &cs).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
    let (cepi, _) = p.tangent_cones().unwrap();
    assert!(matches!(multiplier_rule(&p, &cepi, &PolyCone::whole(1)), Err(Error::Precondition(_))));
}

#[test]
fn problem_validation() {
    let f = ScalarFn::affine(vec![1.0], 0.0);
    assert!(matches!(
        OptProblem::from_function(f.clone(), nonneg_line(), v(&[-1.0])),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(
        OptProblem::new(SetSpec::Epigraph { f }, nonneg_line(), v(&[0.0]), 1.0),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn massive_rule_examples() {
    let r = multiplier_rule_massive(&line_problem(1.0)).unwrap();
    assert!(r.massive && r.clarke_realized);
    let m = r.outcome.multiplier().unwrap();
    assert!(close(&m.pair.xi, &[-1.0], 1e-12) && m.pair.eta == 1.0);
    assert!(r.warnings.is_empty());

    let r = multiplier_rule_massive(&line_problem(-1.0)).unwrap();
    let MultiplierOutcome::OptimalityContradiction(d) = &r.outcome else { panic!("{:?}", r.outcome) };
    assert!(d.descent.is_some());
    assert_eq!(r.warnings.len(), 1);

    // Flat objective over a square: xi = 0, eta = 1.
    let square = SetSpec::Polyhedron(Polyhedron::boxed(&[-1.0, -1.0], &[1.0, 1.0]).unwrap());
    let p = OptProblem::from_function(ScalarFn::affine(vec![0.0, 0.0], 0.0), square, v(&[1.0, 0.0])).unwrap();
    let r = multiplier_rule_massive(&p).unwrap();
    let m = r.outcome.multiplier().unwrap();
    assert_eq!(m.pair.eta, 1.0);
    assert!(close(&m.pair.xi, &[0.0, 0.0], 1e-12));
}

#[test]
fn nonconvex_constraint_has_no_clarke_cones() {
    let s = SetSpec::Union { members: vec![nonneg_line(), SetSpec::halfspace(vec![1.0], -1.0).unwrap()] };
    let p = OptProblem::from_function(ScalarFn::affine(vec![1.0], 0.0), s, v(&[0.0])).unwrap();
    assert!(matches!(multiplier_rule_massive(&p), Err(Error::Unsupported(_))));
}

// KKT oracle: λ ≥ 0 on active rows with c + Aᵀλ = 0, found by an LP.
fn kkt_multipliers(c: &[f64], rows: &[Vec<f64>]) -> Option<Vec<f64>> {
    let k = rows.len();
    let mut lp = LpProblem::new(vec![0.0; k]);
    for j in 0..c.len() {
        lp = lp.eq(rows.iter().map(|r| r[j]).collect(), -c[j]);
    }
    let r = lp_solve(&lp.all_nonneg()).ok()?;
    r.is_optimal().then(|| r.x.clone())
}

#[test]
fn lp_multiplier_matches_kkt() {
    // min x1 + 2 x2 over {x ≥ 0, x1 + x2 ≤ 1}, minimizer at the origin.
    let rows = vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]];
    let s = SetSpec::polyhedron(rows.clone(), vec![0.0, 0.0, 1.0]).unwrap();
    let c = [1.0, 2.0];
    let p = OptProblem::from_function(ScalarFn::affine(c.to_vec(), 0.0), s, Vector::zeros(2)).unwrap();
    let m = multiplier_rule_default(&p).unwrap().multiplier().cloned().unwrap();
    assert_eq!(m.pair.eta, 1.0);
    let lambda = kkt_multipliers(&c, &rows[..2]).unwrap();
    let recon = [-lambda[0], -lambda[1]];
    assert!(close(&m.pair.xi, &recon, 1e-9), "{:?} vs {recon:?}", m.pair.xi);
}

#[test]
fn strong_minimum_keeps_the_epigraph_cone() {
    let f = ScalarFn::Quadratic { q: vec![vec![0.0]], l: vec![1.0], c: 0.0 };
    let p = OptProblem::from_function(f, nonneg_line(), v(&[0.0])).unwrap();
    let sm = p.strong_minimum().unwrap();
    assert_eq!(sm.exact_equal, Some(true));
    assert!(sm.compared > 600, "{}", sm.compared);
    assert!(sm.mismatches.is_empty(), "{:?}", sm.mismatches);
    assert_eq!(sm.problem.value, p.value);
    let a = multiplier_rule_default(&p).unwrap();
    let b = multiplier_rule_default(&sm.problem).unwrap();
    assert_eq!(a.multiplier().unwrap().pair, b.multiplier().unwrap().pair);
}

fn epi(f: ScalarFn) -> SetSpec {
    SetSpec::Epigraph { f }
}

fn indicator(lo: f64, hi: f64) -> ScalarFn {
    ScalarFn::indicator(Polyhedron::boxed(&[lo], &[hi]).unwrap())
}

fn half_indicator(sign: f64) -> ScalarFn {
    ScalarFn::indicator(Polyhedron::new(vec![vec![-sign]], vec![0.0]).unwrap())
}

#[test]
fn qualification_examples() {
    let x0 = v(&[0.0]);
    let r = qualification_equivalences(&epi(ScalarFn::abs()), &epi(ScalarFn::abs()), &x0).unwrap();
    assert!(r.agree() && r.holds());
    assert!(r.singular.0.is_zero());

    let r = qualification_equivalences(&epi(indicator(0.0, 0.0)), &epi(indicator(0.0, 0.0)), &x0).unwrap();
    assert_eq!(r.verdicts(), [false; 4]);
    assert!(r.singular.0.is_whole());

    let r = qualification_equivalences(&epi(ScalarFn::abs()), &epi(indicator(0.0, 0.0)), &x0).unwrap();
    assert!(r.agree() && r.holds());

    // Indicators of [0, ∞) and (−∞, 0] share the singular direction −1.
    let r = qualification_equivalences(&epi(half_indicator(1.0)), &epi(half_indicator(-1.0)), &x0).unwrap();
    assert_eq!(r.verdicts(), [false; 4]);
    // Indicators of [0, ∞) twice: singular subdifferentials (−∞, 0] and −[... ] meet only at 0.
    let r = qualification_equivalences(&epi(half_indicator(1.0)), &epi(half_indicator(1.0)), &x0).unwrap();
    assert_eq!(r.verdicts(), [true; 4]);
}

#[test]
fn qualification_rejects_smooth_epigraphs() {
    let q = ScalarFn::Quadratic { q: vec![vec![2.0]], l: vec![0.0], c: 0.0 };
    assert!(matches!(
        qualification_equivalences(&epi(q), &epi(ScalarFn::abs()), &v(&[0.0])),
        Err(Error::Unsupported(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // Linear objectives built from nonnegative combinations of the active
    // normals are minimized at the origin; the multiplier is -c with eta = 1.
    #[test]
    fn conic_lp_multipliers(
        t1 in 0.0..std::f64::consts::TAU,
        dt in 0.3..2.8f64,
        mu in prop::collection::vec(0.05..2.0f64, 2),
    ) {
        let a1 = vec![t1.cos(), t1.sin()];
        let a2 = vec![(t1 + dt).cos(), (t1 + dt).sin()];
        let c: Vec<f64> = (0..2).map(|j| -(mu[0] * a1[j] + mu[1] * a2[j])).collect();
        let s = SetSpec::polyhedron(vec![a1, a2], vec![0.0, 0.0]).unwrap();
        let p = OptProblem::from_function(ScalarFn::affine(c.clone(), 0.0), s, Vector::zeros(2)).unwrap();
        let out = multiplier_rule_default(&p).unwrap();
        let m = out.multiplier().unwrap();
        prop_assert_eq!(m.pair.eta, 1.0);
        prop_assert!(close(&m.pair.xi, &[-c[0], -c[1]], 1e-8));
        prop_assert!(m.checks.all_ok());
    }

    // Objective functions with a nonzero slope along a feasible cone direction
    // are not minimized at the origin and always trigger the dense branch.
    #[test]
    fn descent_instances_are_dense(t in 0.0..std::f64::consts::TAU) {
        let s = SetSpec::halfspace(vec![0.0, -1.0], 0.0).unwrap();
        let dir = [t.cos(), t.sin().abs()];
        prop_assume!(dir[0].abs() + dir[1] > 0.2);
        let c = vec![-dir[0], -dir[1]];
        let p = OptProblem::from_function(ScalarFn::affine(c, 0.0), s, Vector::zeros(2)).unwrap();
        let out = multiplier_rule_default(&p).unwrap();
        let d = out.dense_branch().unwrap();
        prop_assert!(d.descent.as_ref().unwrap()[2] < 0.0);
    }
}
