use proptest::prelude::*;
use transversal_core::cones::Membership;
use transversal_core::intersection::*;
use transversal_core::numkernel::Vector;
use transversal_core::sets::SetSpec;
use transversal_core::transversality::{
    estimate_subtransversality_constant, Budget, Constants, Evidence, Notion, Status, TransversalityCertificate,
};
use transversal_core::Error;

fn v(c: &[f64]) -> Vector {
    Vector::from_slice(c)
}

fn origin() -> Vector {
    Vector::zeros(2)
}

fn line_at(theta: f64) -> SetSpec {
    SetSpec::line(origin(), v(&[theta.cos(), theta.sin()]))
}

fn lower() -> SetSpec {
    SetSpec::halfspace(vec![0.0, 1.0], 0.0).unwrap()
}

fn upper() -> SetSpec {
    SetSpec::halfspace(vec![0.0, -1.0], 0.0).unwrap()
}

fn tangent_disks() -> (SetSpec, SetSpec) {
    (SetSpec::ball(v(&[-1.0, 0.0]), 1.0).unwrap(), SetSpec::ball(v(&[1.0, 0.0]), 1.0).unwrap())
}

fn sub_cert(a: &SetSpec, b: &SetSpec, x0: &Vector) -> TransversalityCertificate {
    estimate_subtransversality_constant(a, b, x0, 0.5, Budget::default()).unwrap()
}

fn forged_certified(x0: &Vector) -> TransversalityCertificate {
    TransversalityCertificate {
        notion: Notion::Subtransversal,
        x0: x0.clone(),
        constants: Constants { k: Some(1.0), ..Constants::default() },
        status: Status::Certified,
        evidence: Evidence::Empirical,
        samples: 0,
        notes: vec![],
        per_pair_eta: vec![],
        levels: vec![],
        cross_check: None,
    }
}

fn verdicts(r: &IntersectionReport) -> Vec<(Verdict, Label)> {
    r.claims.iter().map(|c| (c.verdict, c.label)).collect()
}

#[test]
fn crossing_lines_inclusion_is_trivial() {
    let (a, b) = (line_at(0.0), line_at(0.7));
    let cert = sub_cert(&a, &b, &origin());
    assert!(cert.status.is_certified());
    let r = check_bouligand_derivable(&a, &b, &origin(), Some(&cert)).unwrap();
    assert_eq!(r.evidence, Evidence::Exact);
    assert_eq!(r.hypothesis, Hypothesis::Certified);
    assert!(r.cone_common.as_ref().unwrap().is_zero());
    assert!(r.cone_ab.as_ref().unwrap().is_zero());
    for c in &r.claims {
        assert_eq!((c.verdict, c.label), (Verdict::Holds, Label::Verified));
    }
    assert!(r.monotone && !r.has_discrepancy());
    let c = check_clarke(&a, &b, &origin(), Some(&cert)).unwrap();
    assert_eq!(c.claim(Claim::ClarkeInclusion).unwrap().label, Label::Verified);
}

#[test]
fn halfplanes_sharing_boundary() {
    let (a, b) = (lower(), upper());
    let cert = sub_cert(&a, &b, &origin());
    let r = check_bouligand_derivable(&a, &b, &origin(), Some(&cert)).unwrap();
    let common = r.cone_common.as_ref().unwrap();
    // Both cones meet in the boundary line, which is also the cone of A ∩ B.
    assert_eq!(common.lineality_dim(), 1);
    assert!(common.contains(&v(&[1.0, 0.0])) && !common.contains(&v(&[0.0, 1.0])));
    assert_eq!(common, r.cone_ab.as_ref().unwrap());
    assert!(r.claims.iter().all(|c| c.label == Label::Verified));
    // A quadrant of two different halfplanes.
    let right = SetSpec::halfspace(vec![-1.0, 0.0], 0.0).unwrap();
    let r = check_bouligand_derivable(&lower(), &right, &origin(), None).unwrap();
    assert_eq!(r.hypothesis, Hypothesis::NotSupplied);
    assert!(r.claims.iter().all(|c| (c.verdict, c.label) == (Verdict::Holds, Label::HypothesisUnmet)));
}

#[test]
fn tangent_disks_are_a_consistent_counterexample() {
    let (a, b) = tangent_disks();
    let cert = sub_cert(&a, &b, &origin());
    assert!(cert.status.is_refuted());
    for r in [
        check_bouligand_derivable(&a, &b, &origin(), Some(&cert)).unwrap(),
        check_clarke(&a, &b, &origin(), Some(&cert)).unwrap(),
    ] {
        assert_eq!(r.hypothesis, Hypothesis::Refuted);
        assert_eq!(r.evidence, Evidence::Exact);
        let main = &r.claims[0];
        assert_eq!(main.verdict, Verdict::Fails);
        assert_eq!(main.label, Label::ConsistentCounterexample);
        assert_eq!(main.label.to_string(), "consistent counterexample");
        // The common cone is the vertical line; the intersection is a point.
        let mut dirs: Vec<Vec<f64>> = main.counterexamples.iter().map(|d| d.as_slice().to_vec()).collect();
        dirs.sort_by(|x, y| x[1].total_cmp(&y[1]));
        assert_eq!(dirs, vec![vec![0.0, -1.0], vec![0.0, 1.0]]);
        assert!(r.monotone);
        assert!(!r.has_discrepancy());
    }
}

#[test]
fn failure_under_certified_hypothesis_is_a_discrepancy() {
    let (a, b) = tangent_disks();
    let forged = forged_certified(&origin());
    let r = check_bouligand_derivable(&a, &b, &origin(), Some(&forged)).unwrap();
    assert_eq!(r.claims[0].label, Label::Discrepancy);
    assert_eq!(r.claims[0].label.to_string(), "DISCREPANCY");
    assert!(r.has_discrepancy());
}

#[test]
fn certificate_at_another_point_is_rejected() {
    let (a, b) = (lower(), upper());
    let cert = forged_certified(&v(&[1.0, 0.0]));
    assert!(matches!(
        check_bouligand_derivable(&a, &b, &origin(), Some(&cert)),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn point_outside_a_set_is_rejected() {
    assert!(matches!(
        check_clarke(&lower(), &upper(), &v(&[0.0, 1.0]), None),
        Err(Error::NotMember { .. })
    ));
}

#[test]
fn lens_corner_uses_sampled_path() {
    let a = SetSpec::ball(v(&[-0.5, 0.0]), 1.0).unwrap();
    let b = SetSpec::ball(v(&[0.5, 0.0]), 1.0).unwrap();
    let x0 = v(&[0.0, 0.75_f64.sqrt()]);
    let cert = sub_cert(&a, &b, &x0);
    assert!(cert.status.is_certified());
    let r = check_bouligand_derivable(&a, &b, &x0, Some(&cert)).unwrap();
    assert_eq!(r.evidence, Evidence::Empirical);
    assert_eq!(r.directions.len(), 720 + 4);
    assert!(r.cone_a.is_some() && r.cone_ab.is_none());
    for c in &r.claims {
        assert_eq!(c.label, Label::Verified, "{c:?}");
        assert!(c.confidence.unwrap() >= 0.95);
    }
    assert!(r.monotone);
    // The lens cone is strictly smaller than either disk cone.
    let inside_a_only = r.directions.iter().filter(|d| d.a == Membership::In && d.ab == Membership::Out).count();
    assert!(inside_a_only > 0);
    let csv = r.directions_csv().unwrap();
    assert_eq!(csv.lines().count(), r.directions.len() + 1);
    assert!(csv.starts_with("direction,a,a_derivable,b,"));
}

#[test]
fn nonconvex_union_is_sampled_and_clarke_refuses() {
    let a = SetSpec::Union { members: vec![line_at(0.0), line_at(std::f64::consts::FRAC_PI_4)] };
    let b = line_at(0.0);
    let r = check_bouligand_derivable(&a, &b, &origin(), None).unwrap();
    assert_eq!(r.evidence, Evidence::Empirical);
    assert!(r.claims.iter().all(|c| c.verdict == Verdict::Holds), "{:?}", verdicts(&r));
    assert!(r.monotone);
    assert!(matches!(check_clarke(&a, &b, &origin(), None), Err(Error::Unsupported(_))));
}

#[test]
fn planes_in_three_dimensions() {
    let a = SetSpec::halfspace(vec![0.0, 0.0, 1.0], 0.0).unwrap();
    let b = SetSpec::halfspace(vec![1.0, 0.0, -1.0], 0.0).unwrap();
    let x0 = Vector::zeros(3);
    let r = check_bouligand_derivable(&a, &b, &x0, None).unwrap();
    assert_eq!(r.evidence, Evidence::Exact);
    assert_eq!(r.cone_common, r.cone_ab);
    assert!(!r.any_fails());
}

#[test]
fn report_serializes() {
    let (a, b) = tangent_disks();
    let r = check_clarke(&a, &b, &origin(), None).unwrap();
    let s = serde_json::to_string(&r).unwrap();
    assert!(s.contains("\"consistent_counterexample\""));
    let back: IntersectionReport = serde_json::from_str(&s).unwrap();
    assert_eq!(back, r);
}

// Estimator verdict versus inclusion outcome: a certified hypothesis never
// coexists with a failing inclusion.
#[test]
fn certified_estimates_never_fail() {
    let x0 = origin();
    let mut pairs: Vec<(SetSpec, SetSpec)> =
        [0.3, 0.8, 1.2, 1.5].iter().map(|&t| (line_at(0.0), line_at(t))).collect();
    pairs.push((lower(), upper()));
    pairs.push((lower(), line_at(0.4)));
    pairs.push(tangent_disks());
    let mut refuted = 0;
    for (a, b) in &pairs {
        let cert = sub_cert(a, b, &x0);
        let r1 = check_bouligand_derivable(a, b, &x0, Some(&cert)).unwrap();
        let r2 = check_clarke(a, b, &x0, Some(&cert)).unwrap();
        if cert.status.is_certified() {
            assert!(!r1.any_fails() && !r2.any_fails());
        }
        if cert.status.is_refuted() {
            refuted += 1;
            assert!(r1.any_fails() || r2.any_fails());
        }
    }
    assert_eq!(refuted, 1);
}

fn cone_halfspaces(angles: &[f64]) -> SetSpec {
    let rows: Vec<Vec<f64>> = angles.iter().map(|t| vec![t.cos(), t.sin()]).collect();
    let b = vec![0.0; rows.len()];
    SetSpec::polyhedron(rows, b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    // Polyhedral pairs are always subtransversal, so neither check may fail,
    // and on such inputs both checks agree.
    #[test]
    fn polyhedral_pairs_agree(
        ta in prop::collection::vec(0.0..std::f64::consts::TAU, 1..3),
        tb in prop::collection::vec(0.0..std::f64::consts::TAU, 1..3),
    ) {
        let (a, b) = (cone_halfspaces(&ta), cone_halfspaces(&tb));
        let x0 = origin();
        let r1 = check_bouligand_derivable(&a, &b, &x0, None).unwrap();
        let r2 = check_clarke(&a, &b, &x0, None).unwrap();
        prop_assert_eq!(r1.evidence, Evidence::Exact);
        prop_assert!(r1.monotone && r2.monotone);
        prop_assert!(!r1.any_fails() && !r2.any_fails());
        prop_assert_eq!(r1.claims[0].verdict, r2.claims[0].verdict);
        prop_assert_eq!(&r1.claims[0].counterexamples, &r2.claims[0].counterexamples);
        prop_assert_eq!(r1.cone_common, r2.cone_common);
    }
}
