mod common;

use flatsurf::algebra::{Mat2, Vec2};
use flatsurf::constructions::{buffer, monster, parabolic_p, parabolic_p_prime, GroupSpec, TruncationParams};
use flatsurf::surface::geom::point_segment_distance;
use flatsurf::surface::Surface;
use flatsurf::verifier::{
    buffer_separation, buffer_separation_traced, equivariance, holonomy_nonmembership, labeled_o_copies,
    monster_sources, one_endedness_hypotheses, rigidity_at_o, tameness_window, window_equivariance, Status,
    VerifierError,
};
use proptest::prelude::*;

use common::{corrupted_vertices, hyperbolic, vertex, vertex_o};

/// Single-crossing distance from `S` to `S'` in the untransformed buffer,
/// scanning each glue slit densely and ignoring obstructions.
fn one_crossing_oracle(s: &Surface) -> f64 {
    let fam = |name: &str| -> Vec<(Vec2, Vec2)> {
        s.family(name)
            .unwrap()
            .mark_ids
            .iter()
            .map(|&m| (s.marks()[m].start, s.marks()[m].holonomy))
            .collect()
    };
    let (src, dst) = (fam("S"), fam("S'"));
    let (glue, glue2) = (fam("S_glue"), fam("S'_glue"));
    let to = |p: Vec2, set: &[(Vec2, Vec2)]| {
        set.iter()
            .map(|&(a, h)| point_segment_distance(p, a, h))
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = f64::INFINITY;
    for (&(a, h), &(a2, h2)) in glue.iter().zip(&glue2) {
        for i in 0..=10_000 {
            let t = i as f64 / 10_000.0;
            best = best.min(to(a + h.scale(t), &src) + to(a2 + h2.scale(t), &dst));
        }
    }
    best
}

#[test]
fn traced_buffer_distance_matches_oracle() {
    for n in 1..=3 {
        let s = buffer(n).unwrap();
        let report = buffer_separation_traced(&Mat2::IDENTITY, n, 10.0).unwrap();
        let oracle = one_crossing_oracle(&s);
        assert!(
            (report.measured["measured"] - oracle).abs() < 1e-6,
            "n = {n}: {report:?} vs {oracle}"
        );
        assert!((oracle - 2.0).abs() < 1e-9);
    }
}

#[test]
fn buffer_bound_rejects_u() {
    let err = buffer_separation(&Mat2::diag(0.5, 0.5)).unwrap_err();
    assert!(matches!(err, VerifierError::GeneratorInU(_)));
    assert!(err.to_string().contains("generator in U"));
}

#[test]
fn traced_dominates_closed_form() {
    for g in [
        Mat2::diag(2.0, 0.5),
        Mat2::diag(0.5, 2.0),
        Mat2::new(1.0, 1.0, 0.0, 1.0),
        Mat2::rotation(0.7),
    ] {
        let r = buffer_separation_traced(&g, 2, 20.0).unwrap();
        assert!(r.pass, "{g}: {r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_form_bound_holds(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, d in -5.0f64..5.0) {
        let g = Mat2::new(a, b, c, d);
        let g = if g.det() < 0.0 { Mat2::new(-a, -b, c, d) } else { g };
        match buffer_separation(&g) {
            Ok(r) => prop_assert!(r.measured["bound"] >= std::f64::consts::FRAC_1_SQRT_2 - 1e-9, "{:?}", r),
            Err(e) => prop_assert!(g.in_u() && matches!(e, VerifierError::GeneratorInU(_))),
        }
    }
}

#[test]
fn rigidity_passes_on_vertex_and_fails_on_corruptions() {
    let s = vertex();
    assert!(rigidity_at_o(&s, vertex_o(&s), &Mat2::IDENTITY).unwrap().pass);
    for (name, c) in corrupted_vertices() {
        let r = rigidity_at_o(&c, vertex_o(&c), &Mat2::IDENTITY).unwrap();
        assert!(!r.pass, "{name} not detected: {r:?}");
    }
}

#[test]
fn rigidity_at_every_monster_copy() {
    let s = monster(&hyperbolic(), &TruncationParams::new(4, 2)).unwrap();
    let copies = labeled_o_copies(&s);
    assert_eq!(copies.len(), 5);
    for (o, g) in copies {
        let r = rigidity_at_o(&s, o, &g).unwrap();
        assert!(r.pass, "{o} {g}: {r:?}");
    }
}

#[test]
fn equivariance_on_monster() {
    let s = monster(&hyperbolic(), &TruncationParams::new(2, 2)).unwrap();
    for word in [vec![1], vec![-1], vec![1, -1], vec![]] {
        assert!(equivariance(&s, &word).unwrap().pass, "{word:?}");
    }
    assert!(matches!(
        equivariance(&s, &[1, 1]),
        Err(VerifierError::WordLeavesBall(_))
    ));
    assert!(matches!(
        equivariance(&buffer(2).unwrap(), &[1]),
        Err(VerifierError::NotApplicable(_))
    ));
}

#[test]
fn equivariance_detects_a_missing_slit() {
    let s = monster(&hyperbolic(), &TruncationParams::new(2, 2)).unwrap();
    let id_sheet = s
        .sheets()
        .iter()
        .position(|sh| {
            sh.label.as_deref() == Some("L") && sh.group.is_some_and(|g| g.approx_eq(&Mat2::IDENTITY, 1e-12))
        })
        .unwrap();
    let k = s
        .slits()
        .iter()
        .position(|p| s.marks()[p.first].sheet == id_sheet)
        .unwrap();
    let broken = s.without_slit(k);
    assert!(!equivariance(&broken, &[1]).unwrap().pass);
}

#[test]
fn parabolic_window_symmetries() {
    let p = parabolic_p(6).unwrap();
    let shear = Mat2::new(1.0, 2.0, 0.0, 1.0);
    let minus = Mat2::diag(-1.0, -1.0);
    assert!(window_equivariance(&p, &shear, 10.0).unwrap().pass);
    assert!(!window_equivariance(&p, &minus, 10.0).unwrap().pass);
    let q = parabolic_p_prime(6).unwrap();
    assert!(window_equivariance(&q, &minus, 23.0).unwrap().pass);
}

#[test]
fn nonmembership_certificates() {
    let p = parabolic_p(6).unwrap();
    let r = holonomy_nonmembership(&p, &Mat2::rotation(1.0), 3.0, None, None).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert!(r.certificate.is_some());
    // the holonomy set is symmetric, so -Id is invisible to this test
    let r = holonomy_nonmembership(&p, &Mat2::diag(-1.0, -1.0), 3.0, None, None).unwrap();
    assert_eq!(r.status, Status::Inconclusive);
    let r = holonomy_nonmembership(&p, &Mat2::new(1.0, 2.0, 0.0, 1.0), 3.0, None, None).unwrap();
    assert_eq!(r.status, Status::Inconclusive);
    assert!(r.acceptable() && !r.pass);
    let err = holonomy_nonmembership(&p, &Mat2::diag(100.0, 0.01), 3.0, None, None).unwrap_err();
    assert!(matches!(err, VerifierError::RadiusExceedsWindow { .. }));
}

#[test]
fn nonmembership_never_certifies_monster_generators() {
    let s = monster(&hyperbolic(), &TruncationParams::new(2, 2)).unwrap();
    let g = Mat2::diag(2.0, 0.5);
    for h in [g, g.inverse().unwrap()] {
        let r = holonomy_nonmembership(&s, &h, 1.0, Some(6.0), Some(&monster_sources)).unwrap();
        assert_eq!(r.status, Status::Inconclusive, "{h}: {r:?}");
    }
}

#[test]
fn tameness_of_buffer_and_near_collision() {
    let s = buffer(3).unwrap();
    let r = tameness_window(&s, 20.0, 3.0).unwrap();
    assert!(r.pass);
    assert!((r.measured["min_gap"] - 1.0).abs() < 1e-9);

    let mut t = Surface::new(20.0);
    let a = t.add_plane(Mat2::IDENTITY, None).unwrap();
    let b = t.add_plane(Mat2::IDENTITY, None).unwrap();
    let m = t.add_mark(a, 0, Vec2::ZERO, Vec2::E).unwrap();
    let m2 = t.add_mark(b, 0, Vec2::ZERO, Vec2::E).unwrap();
    t.reglue(m, m2).unwrap();
    let m = t.add_mark(a, 0, Vec2::new(1.05, 0.0), Vec2::E).unwrap();
    let m2 = t.add_mark(b, 0, Vec2::new(1.05, 0.0), Vec2::E).unwrap();
    t.reglue(m, m2).unwrap();
    let r = tameness_window(&t, 10.0, 3.0).unwrap();
    assert!(!r.pass);
    assert!((r.measured["min_gap"] - 0.05).abs() < 1e-9);
}

#[test]
fn one_endedness_hypotheses_by_construction() {
    assert!(one_endedness_hypotheses(&parabolic_p_prime(3).unwrap()).unwrap().pass);
    let s = monster(&GroupSpec::trivial(), &TruncationParams::new(2, 1)).unwrap();
    let r = one_endedness_hypotheses(&s).unwrap();
    assert!(r.pass);
    assert_eq!(r.measured["cayley_match"], 1.0);

    let mut two = Surface::new(10.0);
    two.add_plane(Mat2::IDENTITY, None).unwrap();
    two.add_plane(Mat2::IDENTITY, None).unwrap();
    let r = one_endedness_hypotheses(&two).unwrap();
    assert!(!r.pass);
    assert_eq!(r.measured["components"], 2.0);
}
