use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use proptest::prelude::*;
use transversal_core::numkernel::Vector;
use transversal_core::sets::{PointInSet, SetSpec};
use transversal_core::transversality::*;
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

fn pt(s: &SetSpec, c: &[f64]) -> PointInSet {
    PointInSet::new(s, v(c)).unwrap()
}

// Oracle: the best first-order rate for points on lines A = R e, B = R u is
// max over |α|, |β| ≤ M of -d·(α e − β u) for the unit gap direction d,
// brute-forced on a grid of (α, β).
fn line_rate_oracle(d: &Vector, e: &Vector, u: &Vector, m: f64) -> f64 {
    let n = 400;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        let al = -m + 2.0 * m * i as f64 / n as f64;
        for j in 0..=n {
            let be = -m + 2.0 * m * j as f64 / n as f64;
            let w = &e.scale(al) - &u.scale(be);
            best = best.max(-d.dot(&w));
        }
    }
    best
}

// Oracle: worst-case line rate over all gap directions (grid on the circle).
fn worst_line_rate(theta: f64) -> f64 {
    (0..3600)
        .map(|k| {
            let phi = PI * k as f64 / 3600.0;
            phi.cos().abs() + (phi - theta).cos().abs()
        })
        .fold(f64::INFINITY, f64::min)
}

// Oracle: sup of |x| / (d(x, A) + d(x, B)) over a polar grid for lines through 0.
fn line_ratio_oracle(theta: f64) -> f64 {
    (1..7200)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / 7200.0;
            1.0 / (phi.sin().abs() + (phi - theta).sin().abs())
        })
        .fold(0.0, f64::max)
}

// ---- transfers ----

#[test]
fn transfer_alpha_one() {
    let c = transfer_constants_transversal_to_tangential(1.0, 0.5).unwrap();
    assert_eq!(c.m.to_string(), "2");
    assert_eq!(c.eta.to_string(), "1");
    assert_eq!(c.delta.to_string(), "1/2");
    assert!(!c.degenerate);
}

#[test]
fn transfer_alpha_quarter() {
    let c = transfer_constants_transversal_to_tangential(0.25, 1.0).unwrap();
    assert_eq!((c.m.to_string(), c.eta.to_string(), c.delta.to_string()), ("5/4".into(), "1/4".into(), "1".into()));
}

#[test]
fn transfer_tiny_alpha_is_degenerate() {
    let c = transfer_constants_transversal_to_tangential(1e-9, 1.0).unwrap();
    assert!(c.degenerate);
    assert!((c.m.value() - 1.0).abs() < 1e-8);
}

#[test]
fn transfer_to_sub_examples() {
    let c = transfer_constants_tangential_to_sub(2.0, 1.0, 6.0).unwrap();
    assert_eq!(c.k.to_string(), "3");
    assert_eq!(c.zeta.to_string(), "3/5");
    let c = transfer_constants_tangential_to_sub(1.0, 1.0, 1.0).unwrap();
    assert_eq!(c.k.to_string(), "2");
    assert_eq!(c.zeta.to_string(), "1/6");
}

#[test]
fn transfer_to_sub_limit() {
    let c = transfer_constants_tangential_to_sub(1e-9, 1.0, 2.0).unwrap();
    assert!((c.k.value() - 1.0).abs() < 1e-8);
    assert!((c.zeta.value() - 1.0).abs() < 1e-8);
}

#[test]
fn admissible_radius_matches_formula() {
    assert_eq!(admissible_radius_exact(2.0, 1.0, 5.0).unwrap().to_string(), "1");
    assert_eq!(admissible_radius_exact(1.0, 1.0, 1.0).unwrap().to_string(), "1/3");
}

#[test]
fn transfers_reject_nonpositive() {
    assert!(matches!(transfer_constants_transversal_to_tangential(0.0, 1.0), Err(Error::InvalidArgument(_))));
    assert!(matches!(transfer_constants_tangential_to_sub(1.0, -1.0, 1.0), Err(Error::InvalidArgument(_))));
}

// ---- step oracle ----

#[test]
fn opposing_halfplanes_reach_rate_two() {
    let (a, b) = (lower(), upper());
    let xa = pt(&a, &[0.0, -0.3]);
    let xb = pt(&b, &[0.0, 0.2]);
    let grid = step_grid(0.5, 1.0, 2.0);
    let step = tangential_step_oracle(&a, &b, &xa, &xb, 1.0, 2.0, &grid).unwrap().expect("step at rate 2");
    assert!(verify_step(&a, &b, &xa.point, &xb.point, &step, 1.0, 2.0));
    assert!(step.rate() >= 2.0 - 1e-9);
    // ‖wA − wB‖ ≤ 2M bounds every rate.
    let grid = step_grid(0.5, 1.0, 2.01);
    assert!(tangential_step_oracle(&a, &b, &xa, &xb, 1.0, 2.01, &grid).unwrap().is_none());
}

#[test]
fn crossing_lines_steps_match_rate_oracle() {
    let theta = FRAC_PI_3;
    let (a, b) = (line_at(0.0), line_at(theta));
    let e = v(&[1.0, 0.0]);
    let u = v(&[theta.cos(), theta.sin()]);
    for (sa, sb) in [(0.4, 0.1), (-0.2, 0.3), (0.1, -0.5), (0.3, 0.3)] {
        let xa = pt(&a, &[sa, 0.0]);
        let xb = pt(&b, &[sb * u[0], sb * u[1]]);
        let d = (&xa.point - &xb.point).normalized().unwrap();
        let rate = line_rate_oracle(&d, &e, &u, 1.0);
        let gap = xa.point.dist(&xb.point);
        let ok = 0.95 * rate;
        let got = tangential_step_oracle(&a, &b, &xa, &xb, 1.0, ok, &step_grid(gap, 1.0, ok)).unwrap();
        assert!(got.is_some(), "no step at 95% of oracle rate {rate} for {sa},{sb}");
        let too_fast = 1.05 * rate;
        let got = tangential_step_oracle(&a, &b, &xa, &xb, 1.0, too_fast, &step_grid(gap, 1.0, too_fast)).unwrap();
        assert!(got.is_none(), "step beyond oracle rate {rate} for {sa},{sb}");
    }
}

#[test]
fn same_convex_set_has_unit_rate() {
    let a = SetSpec::ball(origin(), 1.0).unwrap();
    let xa = pt(&a, &[0.5, 0.0]);
    let xb = pt(&a, &[-0.2, 0.4]);
    let gap = xa.point.dist(&xb.point);
    let step = tangential_step_oracle(&a, &a, &xa, &xb, 1.0, 1.0, &step_grid(gap, 1.0, 1.0)).unwrap();
    assert!(step.is_some());
}

#[test]
fn step_oracle_rejects_equal_points() {
    let a = lower();
    let x = pt(&a, &[0.0, 0.0]);
    assert!(matches!(tangential_step_oracle(&a, &a, &x, &x, 1.0, 1.0, &[0.1]), Err(Error::Precondition(_))));
}

#[test]
fn step_grid_is_geometric_from_cap() {
    let g = step_grid(0.3, 1.0, 2.0);
    assert_eq!(g[0], 0.15);
    assert!(g.windows(2).all(|w| w[1] == 0.5 * w[0]));
    assert!(*g.last().unwrap() >= 0.15e-8 && g.last().unwrap() * 0.5 < 0.15e-8);
    let tiny = step_grid(1e-12, 1.0, 1.0);
    assert_eq!(tiny.len(), g.len());
}

// ---- tangential estimator ----

#[test]
fn crossing_lines_rate_near_angle_oracle() {
    for theta in [FRAC_PI_4, FRAC_PI_3, FRAC_PI_2] {
        let oracle = worst_line_rate(theta);
        assert!((oracle - theta.sin()).abs() < 1e-3);
        let c = estimate_tangential_constants(&line_at(0.0), &line_at(theta), &origin(), 1.0, Budget::default()).unwrap();
        assert!(c.status.is_certified(), "{theta}: {:?}", c.status);
        assert_eq!(c.constants.m, Some(1.0));
        let eta = c.constants.eta.unwrap();
        assert!(eta <= oracle * 1.02 && eta >= oracle * 0.85, "theta {theta}: eta {eta} vs oracle {oracle}");
        assert_eq!(c.evidence, Evidence::Empirical);
        assert!(!c.per_pair_eta.is_empty());
    }
}

#[test]
fn same_set_certified_with_unit_constants() {
    let a = lower();
    let c = estimate_tangential_constants(&a, &a, &origin(), 1.0, Budget::default()).unwrap();
    assert!(c.status.is_certified());
    assert_eq!(c.constants.m, Some(1.0));
    assert_eq!(c.constants.eta, Some(1.0));
}

#[test]
fn tangent_disks_inconclusive() {
    let (a, b) = tangent_disks();
    let c = estimate_tangential_constants(&a, &b, &origin(), 0.5, Budget::default()).unwrap();
    assert!(c.status.is_inconclusive(), "{:?}", c.status);
}

#[test]
fn unit_constants_validate_on_opposing_halfplanes() {
    let c = validate_tangential_constants(&lower(), &upper(), &origin(), 1.0, 1.0, 1.0, Budget::default()).unwrap();
    assert!(c.status.is_certified(), "{:?}", c.status);
    // From xB = 0 on the boundary of B, wB cannot point into A, so rate 2 fails for
    // pairs with a horizontal offset: e.g. xA = (0.3, -0.1) allows at most ~1.949.
    let c = validate_tangential_constants(&lower(), &upper(), &origin(), 1.0, 2.0, 1.0, Budget::default()).unwrap();
    assert!(!c.status.is_certified());
}

// ---- subtransversality estimator ----

#[test]
fn same_set_ratio_is_one_half() {
    let a = lower();
    let c = estimate_subtransversality_constant(&a, &a, &origin(), 1.0, Budget::default()).unwrap();
    assert!(c.status.is_certified());
    assert!((c.constants.k.unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn crossing_lines_ratio_matches_grid_oracle() {
    for theta in [FRAC_PI_4, FRAC_PI_3, 0.3] {
        let oracle = line_ratio_oracle(theta);
        assert!((oracle - 1.0 / theta.sin()).abs() / oracle < 1e-3);
        let c = estimate_subtransversality_constant(&line_at(0.0), &line_at(theta), &origin(), 1.0, Budget::default())
            .unwrap();
        assert!(c.status.is_certified());
        let k = c.constants.k.unwrap();
        assert!((k - oracle).abs() <= 0.1 * oracle, "theta {theta}: K {k} vs {oracle}");
        assert_eq!(c.levels.len(), 4);
    }
}

#[test]
fn tangent_disks_ratio_escalates() {
    // Closed form at x = (0, t): d(x, A∩B) = t, d(x, A) = d(x, B) = sqrt(1 + t²) − 1.
    let f = |t: f64| t / (2.0 * ((1.0 + t * t).sqrt() - 1.0));
    let (a, b) = tangent_disks();
    for t in [0.1, 0.01] {
        let x = v(&[0.0, t]);
        let closed = f(t);
        let num = x.norm();
        let den = a.distance(&x).unwrap() + b.distance(&x).unwrap();
        assert!((num / den - closed).abs() / closed < 1e-6);
    }
    let c = estimate_subtransversality_constant(&a, &b, &origin(), 0.5, Budget::default()).unwrap();
    assert!(c.status.is_refuted(), "{:?}", c.status);
    let ks: Vec<f64> = c.levels.iter().map(|l| l.k_hat).collect();
    assert!(ks.windows(2).all(|w| w[1] >= REFUTE_GROWTH * w[0]), "{ks:?}");
}

// ---- Kruger criterion ----

#[test]
fn perpendicular_axes_kruger_threshold() {
    // Exact: the translated axes meet at a point of norm ρ sqrt(w1y² + w2x²) ≤ ρ α √2.
    let (a, b) = (line_at(0.0), line_at(FRAC_PI_2));
    let c = certify_transversality_kruger(&a, &b, &origin(), 0.5, 1.0, Budget::default()).unwrap();
    assert!(c.status.is_certified(), "{:?}", c.status);
    let c = certify_transversality_kruger(&a, &b, &origin(), 0.9, 1.0, Budget::default()).unwrap();
    let Status::Refuted { witness } = &c.status else { panic!("{:?}", c.status) };
    assert!(witness.value.unwrap() > witness.bound.unwrap() * (1.0 + 1e-6));
}

#[test]
fn whole_space_absorbs_translates() {
    let a = SetSpec::whole_space(2);
    let c = certify_transversality_kruger(&a, &line_at(0.4), &origin(), 1.0, 1.0, Budget::default()).unwrap();
    assert!(c.status.is_certified());
}

#[test]
fn opposing_halfplanes_refuted_by_kruger() {
    for alpha in [0.05, 0.5] {
        let c = certify_transversality_kruger(&lower(), &upper(), &origin(), alpha, 1.0, Budget::default()).unwrap();
        assert!(c.status.is_refuted());
    }
}

#[test]
fn same_halfplane_passes_kruger_for_alpha_below_one() {
    let a = lower();
    let c = certify_transversality_kruger(&a, &a, &origin(), 0.9, 1.0, Budget::default()).unwrap();
    assert!(c.status.is_certified());
}

#[test]
fn kruger_needs_fallback_for_disks() {
    let (a, b) = tangent_disks();
    let r = certify_transversality_kruger(&a, &b, &origin(), 0.1, 0.5, Budget::default());
    assert!(matches!(r, Err(Error::Unsupported(_))));
    let c = certify_transversality_kruger_with(
        &a,
        &b,
        &origin(),
        0.1,
        0.5,
        Budget::default(),
        KrugerOptions { sampled_fallback: true },
    )
    .unwrap();
    assert!(c.status.is_refuted());
}

// ---- covering check ----

// Oracle: with G = R e capped at M and T = R u, the covering set is a strip of
// half-width M sin θ around R u, so the worst unit vector sits at distance
// max(0, 1 − M sin θ); brute-forced over the circle and the cap.
fn lines_covering_oracle(theta: f64, m: f64) -> f64 {
    let u = v(&[theta.cos(), theta.sin()]);
    (0..720)
        .map(|k| {
            let phi = PI * k as f64 / 720.0;
            let p = v(&[phi.cos(), phi.sin()]);
            (0..=400)
                .map(|i| {
                    let a = v(&[-m + 2.0 * m * i as f64 / 400.0, 0.0]);
                    let r = &a - &p;
                    (&r - &u.scale(r.dot(&u))).norm()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[test]
fn whole_space_covers() {
    let b = SetSpec::polyhedron(vec![vec![1.0, 1.0], vec![-1.0, 0.0]], vec![0.0, 0.0]).unwrap();
    let c = certify_prop44(&SetSpec::whole_space(2), &b, &origin(), 0.5, 0.0, 1.0, Budget::default()).unwrap();
    assert!(c.status.is_certified());
    assert_eq!(c.constants.m, Some(4.0));
}

#[test]
fn crossing_lines_covering_deficit() {
    let theta = 0.25f64.asin();
    let deficit = lines_covering_oracle(theta, 2.0);
    assert!((deficit - 0.5).abs() < 1e-3);
    let res = net_resolution(2);
    let (a, b) = (line_at(0.0), line_at(theta));
    let c = certify_prop44(&a, &b, &origin(), 0.5, deficit + 0.01, 2.0, Budget::default()).unwrap();
    assert!(c.status.is_certified(), "{:?}", c.status);
    let c = certify_prop44(&a, &b, &origin(), 0.5, deficit - 2.0 * res - 0.01, 2.0, Budget::default()).unwrap();
    assert!(c.status.is_refuted(), "{:?}", c.status);
    let c = certify_prop44(&a, &b, &origin(), 0.5, 0.0, 2.0, Budget::new(48, 0)).unwrap();
    assert!(c.status.is_certified() == (deficit <= res));
    let c = certify_prop44(&line_at(0.0), &line_at(FRAC_PI_4), &origin(), 0.5, 0.0, 2.0, Budget::default()).unwrap();
    assert!(c.status.is_certified());
    assert!(c.constants.eta.unwrap() > 0.0 && c.constants.eta.unwrap() < 0.5);
}

#[test]
fn opposing_halfplanes_fail_covering_along_normal() {
    let c = certify_prop44(&lower(), &upper(), &origin(), 0.5, 0.5, 1.0, Budget::default()).unwrap();
    let Status::Refuted { witness } = &c.status else { panic!("{:?}", c.status) };
    let dir = &witness.directions[0];
    assert!(dir.dist(&v(&[0.0, 1.0])) <= net_resolution(2) + 1e-12);
    assert!(witness.value.unwrap() > 0.9);
}

#[test]
fn net_resolution_in_plane() {
    assert!((net_resolution(2) - 2.0 * (PI / 720.0).sin()).abs() < 1e-15);
    assert!(net_resolution(3) > 0.0 && net_resolution(3) < 0.2);
}

// ---- Clarke cone density ----

#[test]
fn crossing_lines_dense_difference() {
    let c = certify_massive_dense(&line_at(0.0), &line_at(1.0), &origin()).unwrap();
    assert!(c.status.is_certified());
    assert_eq!(c.evidence, Evidence::Exact);
    assert!(c.cross_check.as_ref().unwrap().status.is_certified());
}

#[test]
fn same_halfplane_dense_difference() {
    let c = certify_massive_dense(&lower(), &lower(), &origin()).unwrap();
    assert!(c.status.is_certified());
    assert!(c.cross_check.as_ref().unwrap().status.is_certified());
}

#[test]
fn opposing_halfplanes_not_dense_but_tangential() {
    let c = certify_massive_dense(&lower(), &upper(), &origin()).unwrap();
    assert!(c.status.is_inconclusive());
    let cross = c.cross_check.as_ref().unwrap();
    assert!(cross.status.is_certified());
    assert_eq!(cross.constants.eta, Some(1.0));
}

#[test]
fn tangent_disks_share_a_supporting_line() {
    // Clarke cones at the tangency are the halfplanes {v1 <= 0} and {v1 >= 0}.
    let (a, b) = tangent_disks();
    let c = certify_massive_dense(&a, &b, &origin()).unwrap();
    assert!(c.status.is_inconclusive());
    assert!(c.cross_check.as_ref().unwrap().status.is_inconclusive());
}

#[test]
fn density_needs_convex_sets() {
    let cross = SetSpec::Union { members: vec![line_at(0.0), line_at(1.0)] };
    assert!(matches!(certify_massive_dense(&cross, &lower(), &origin()), Err(Error::Unsupported(_))));
}

// ---- alternating projections ----

// Oracle: direct iteration with closed-form line projections.
fn line_iteration_rate(theta: f64, x: [f64; 2], iters: usize) -> f64 {
    let proj = |d: [f64; 2], p: [f64; 2]| {
        let s = d[0] * p[0] + d[1] * p[1];
        [s * d[0], s * d[1]]
    };
    let (e, u) = ([1.0, 0.0], [theta.cos(), theta.sin()]);
    let mut p = proj(e, proj(u, x));
    let n0 = p[0].hypot(p[1]);
    for _ in 0..iters {
        p = proj(e, proj(u, p));
    }
    (p[0].hypot(p[1]) / n0).powf(1.0 / iters as f64)
}

#[test]
fn crossing_lines_rate_is_cos_squared() {
    for theta in [FRAC_PI_4, FRAC_PI_3, 0.5] {
        let oracle = line_iteration_rate(theta, [0.3, 0.8], 10);
        assert!((oracle - theta.cos().powi(2)).abs() < 1e-12);
        let r = altproj_rate(&line_at(0.0), &line_at(theta), &v(&[0.3, 0.8]), 200).unwrap();
        assert!(r.converged);
        assert_eq!(r.gap_kind, GapKind::Intersection);
        let rate = r.rate.unwrap();
        assert!((rate - oracle).abs() < 1e-6, "theta {theta}: {rate} vs {oracle}");
    }
}

#[test]
fn start_in_intersection_runs_no_iterations() {
    let r = altproj_rate(&line_at(0.0), &line_at(1.0), &origin(), 50).unwrap();
    assert!(r.start_in_intersection);
    assert_eq!(r.iterations, 0);
    assert!(r.rate.is_none());
}

#[test]
fn tangent_disks_decay_sublinearly() {
    let (a, b) = tangent_disks();
    let r = altproj_rate(&a, &b, &v(&[0.0, 0.8]), 400).unwrap();
    assert!(r.sublinear, "rate {:?} early {:?}", r.rate, r.early_rate);
    assert!(r.rate.unwrap() > 0.95);
    assert!(r.gaps.windows(2).all(|w| w[1] <= w[0] + 1e-15));
}

#[test]
fn disjoint_sets_stall() {
    let a = SetSpec::halfspace(vec![0.0, 1.0], -1.0).unwrap();
    let r = altproj_rate(&a, &upper(), &v(&[0.0, 3.0]), 50).unwrap();
    assert_eq!(r.gap_kind, GapKind::DistanceToB);
    assert!(r.stalled && !r.converged);
}

#[test]
fn certificate_serializes() {
    let c = estimate_subtransversality_constant(&line_at(0.0), &line_at(1.0), &origin(), 1.0, Budget::new(16, 3)).unwrap();
    let s = serde_json::to_string(&c).unwrap();
    assert!(s.contains("\"status\":\"certified\""));
    let back: TransversalityCertificate = serde_json::from_str(&s).unwrap();
    assert_eq!(back, c);
}

// ---- invariants ----

fn dilate_line(theta: f64, lambda: f64, offset: &Vector) -> SetSpec {
    SetSpec::line(offset.scale(lambda), v(&[theta.cos(), theta.sin()]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn subtransversality_is_symmetric(t1 in 0.0..PI, t2 in 0.0..PI, seed in 0u64..1000) {
        prop_assume!((t1 - t2).abs() > 0.2);
        let (a, b) = (line_at(t1), SetSpec::halfspace(vec![t2.cos(), t2.sin()], 0.0).unwrap());
        let budget = Budget::new(16, seed);
        let ab = estimate_subtransversality_constant(&a, &b, &origin(), 1.0, budget).unwrap();
        let ba = estimate_subtransversality_constant(&b, &a, &origin(), 1.0, budget).unwrap();
        prop_assert_eq!(ab.constants, ba.constants);
        prop_assert_eq!(ab.levels, ba.levels);
    }

    #[test]
    fn subtransversality_scales(theta in 0.3..2.8f64, ox in -1.0..1.0f64, oy in -1.0..1.0f64) {
        let off = v(&[ox, oy]);
        let base = {
            let (a, b) = (dilate_line(0.0, 1.0, &off), dilate_line(theta, 1.0, &off));
            estimate_subtransversality_constant(&a, &b, &off, 1.0, Budget::new(16, 1)).unwrap()
        };
        for lambda in [0.5, 2.0] {
            let x0 = off.scale(lambda);
            let (a, b) = (dilate_line(0.0, lambda, &off), dilate_line(theta, lambda, &off));
            let c = estimate_subtransversality_constant(&a, &b, &x0, lambda, Budget::new(16, 1)).unwrap();
            let (k0, k1) = (base.constants.k.unwrap(), c.constants.k.unwrap());
            prop_assert!((k0 - k1).abs() <= 1e-9 * k0, "K {} vs {}", k0, k1);
            prop_assert!((c.constants.delta.unwrap() - lambda).abs() < 1e-15);
            let z0 = transfer_constants_tangential_to_sub(1.0, 0.5, 1.0).unwrap().zeta.value();
            let z1 = transfer_constants_tangential_to_sub(1.0, 0.5, lambda).unwrap().zeta.value();
            prop_assert!((z1 - lambda * z0).abs() < 1e-15);
        }
    }

    #[test]
    fn implication_chain_on_crossing_lines(theta in 0.5..2.6f64, delta in 0.2..1.0f64) {
        let (a, b) = (line_at(0.0), line_at(theta));
        let alpha = 0.25 * theta.sin();
        let budget = Budget::new(16, 7);
        let k = certify_transversality_kruger(&a, &b, &origin(), alpha, delta, budget).unwrap();
        prop_assume!(k.status.is_certified());
        let t = transfer_constants_transversal_to_tangential(alpha, delta).unwrap();
        let val = validate_tangential_constants(&a, &b, &origin(), t.m.value(), t.eta.value(), delta, budget).unwrap();
        prop_assert!(val.status.is_certified(), "{:?}", val.status);
        let s = transfer_constants_tangential_to_sub(t.m.value(), t.eta.value(), delta).unwrap();
        let sub = estimate_subtransversality_constant(&a, &b, &origin(), s.zeta.value(), budget).unwrap();
        prop_assert!(sub.constants.k.unwrap() <= 1.05 * s.k.value());
    }

    #[test]
    fn returned_steps_always_verify(sa in -0.5..0.5f64, sb in -0.5..0.5f64, theta in 0.2..3.0f64, eta in 0.05..1.0f64) {
        let (a, b) = (line_at(0.0), line_at(theta));
        let xa = pt(&a, &[sa, 0.0]);
        let xb = pt(&b, &[sb * theta.cos(), sb * theta.sin()]);
        prop_assume!(xa.point.dist(&xb.point) > 1e-3);
        let grid = step_grid(xa.point.dist(&xb.point), 1.0, eta);
        if let Some(s) = tangential_step_oracle(&a, &b, &xa, &xb, 1.0, eta, &grid).unwrap() {
            prop_assert!(verify_step(&a, &b, &xa.point, &xb.point, &s, 1.0, eta));
            prop_assert!(s.w_a.norm() <= 1.0 + 1e-12 && s.w_b.norm() <= 1.0 + 1e-12);
        }
    }
}
