mod common;

use std::f64::consts::TAU;

use flatsurf::algebra::{Mat2, Vec2};
use flatsurf::constructions::{buffer, decorated};
use flatsurf::surface::{IsoOptions, SingularityRef, Surface, SurfacePoint, Terminal};
use proptest::prelude::*;

use common::{fixtures, vertex, vertex_o};

fn contains(hs: &[Vec2], w: Vec2, tol: f64) -> bool {
    hs.iter().any(|u| u.approx_eq(w, tol))
}

#[test]
fn slit_endpoints_are_cones_of_angle_at_least_4pi() {
    for (name, s) in fixtures() {
        for k in 0..s.slits().len() {
            for sing in [SingularityRef::SlitStart(k), SingularityRef::SlitEnd(k)] {
                let angle = s.cone_record(sing).unwrap().angle;
                if angle.is_finite() {
                    let m = angle / TAU;
                    assert!(
                        (m - m.round()).abs() < 1e-9 && m.round() >= 2.0,
                        "{name} {sing}: {angle}"
                    );
                }
            }
        }
    }
    let s = buffer(3).unwrap();
    for sing in s.singularities() {
        assert!((s.cone_record(sing).unwrap().angle - 2.0 * TAU).abs() < 1e-9);
    }
}

#[test]
fn metric_and_analytic_cone_angles_agree() {
    let s = decorated(4).unwrap();
    for sing in s.singularities() {
        let rec = s.cone_record(sing).unwrap();
        let rho = 0.5 * s.isolation_radius(sing).unwrap();
        let metric = s.cone_angle(sing, rho).unwrap();
        assert!((metric - rec.angle).abs() < 1e-6, "{sing}: {metric} vs {}", rec.angle);
    }
}

#[test]
fn decorated_census() {
    let s = decorated(4).unwrap();
    let rows: Vec<(Option<u64>, usize)> = s
        .singularity_census(2.5)
        .iter()
        .map(|r| (r.multiple(), r.count))
        .collect();
    assert!(rows.contains(&(Some(3), 1)));
    assert!(rows.contains(&(Some(2), 2)));
}

#[test]
fn isomorphism_is_symmetric_on_fixtures() {
    for (name, s) in fixtures() {
        let t = Surface::from_json(&s.to_json()).unwrap();
        let opts = IsoOptions {
            respect_labels: true,
            fixed_origins: true,
        };
        assert!(s.is_isomorphic(&t, opts).is_some(), "{name}");
        assert!(t.is_isomorphic(&s, opts).is_some(), "{name}");
        if !s.slits().is_empty() {
            let cut = s.without_slit(0);
            assert!(s.is_isomorphic(&cut, IsoOptions::default()).is_none(), "{name}");
            assert!(cut.is_isomorphic(&s, IsoOptions::default()).is_none(), "{name}");
        }
    }
}

fn shifted_buffer(shift: Vec2) -> (Surface, Surface) {
    let s = buffer(2).unwrap();
    let mut t = Surface::new(s.window_radius);
    for sh in s.sheets() {
        t.add_plane(sh.chart, sh.label.as_deref()).unwrap();
    }
    for m in s.marks() {
        let off = if m.sheet == 1 { shift } else { Vec2::ZERO };
        t.add_mark(m.sheet, m.branch, m.start + off, m.holonomy).unwrap();
    }
    for p in s.slits() {
        t.reglue(p.first, p.second).unwrap();
    }
    (s, t)
}

#[test]
fn translation_is_free_unless_origins_fixed() {
    let (s, t) = shifted_buffer(Vec2::new(5.0, 7.0));
    let m = s.is_isomorphic(&t, IsoOptions::default()).unwrap();
    assert!(m.sheets[1].translation.approx_eq(Vec2::new(5.0, 7.0), 1e-12));
    assert!(s
        .is_isomorphic(
            &t,
            IsoOptions {
                fixed_origins: true,
                ..Default::default()
            }
        )
        .is_none());
}

#[test]
fn trace_stops_at_singularity() {
    let s = buffer(1).unwrap();
    let m = s.marks()[s.family("S_glue").unwrap().mark_ids[0]];
    let from = SurfacePoint::new(m.sheet, 0, m.start - Vec2::new(1.0, 0.0));
    let path = s.trace(&from, Vec2::E, 5.0).unwrap();
    assert!(matches!(path.terminal, Terminal::HitSingularity(_)));
    assert!((path.length - 1.0).abs() < 1e-9);
}

#[test]
fn trace_leaves_window() {
    let s = buffer(1).unwrap();
    let from = SurfacePoint::new(0, 0, Vec2::new(0.25, -3.0));
    let path = s.trace(&from, Vec2::new(0.0, -1.0), 10.0 * s.window_radius).unwrap();
    assert_eq!(path.terminal, Terminal::LeftWindow);
}

#[test]
fn scaling_scales_shortest_paths() {
    let s = buffer(2).unwrap();
    let fam = |s: &Surface, name: &str| -> Vec<flatsurf::surface::Locus> {
        s.family(name)
            .unwrap()
            .mark_ids
            .iter()
            .map(|&m| {
                let mk = s.marks()[m];
                flatsurf::surface::Locus {
                    sheet: mk.sheet,
                    branch: mk.branch,
                    a: mk.start,
                    b: mk.end(),
                }
            })
            .collect()
    };
    let d = s.shortest_path(&fam(&s, "S"), &fam(&s, "S'"), 10.0).length().unwrap();
    let t = s.postcompose(&Mat2::diag(3.0, 3.0)).unwrap();
    let d3 = t.shortest_path(&fam(&t, "S"), &fam(&t, "S'"), 30.0).length().unwrap();
    assert!((d3 - 3.0 * d).abs() < 1e-6, "{d} {d3}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unglued_marks_are_transparent(
        x in -6.0f64..6.0, y in -6.0f64..6.0, theta in 0.0f64..TAU,
        mx in -6.0f64..6.0, my in 4.0f64..8.0, mlen in 0.1f64..3.0,
    ) {
        let s = buffer(1).unwrap();
        let from = SurfacePoint::new(0, 0, Vec2::new(x, y));
        prop_assume!(s.trace(&from, Vec2::E, 0.0).is_ok());
        let mut t = s.clone();
        let new = t.add_mark(0, 0, Vec2::new(mx, my), Vec2::new(mlen, 0.0));
        prop_assume!(new.is_ok());
        let dir = Vec2::new(theta.cos(), theta.sin());
        let a = s.trace(&from, dir, 12.0).unwrap();
        let b = t.trace(&from, dir, 12.0).unwrap();
        prop_assert_eq!(a.terminal, b.terminal);
        prop_assert!((a.length - b.length).abs() < 1e-9);
        prop_assert!(a.holonomy.approx_eq(b.holonomy, 1e-9));
        prop_assert!(a.end().coords.approx_eq(b.end().coords, 1e-9));
        prop_assert_eq!(a.end().frame(), b.end().frame());
    }

    #[test]
    fn saddle_connections_are_equivariant(
        a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0,
    ) {
        let g = Mat2::new(a, b, c, d);
        prop_assume!(g.det() > 0.5);
        let s = vertex();
        let o = vertex_o(&s);
        let t = s.postcompose(&g).unwrap();
        let r = 2.5;
        let (gn, gin) = (g.operator_norm(), g.inverse().unwrap().operator_norm());
        let h: Vec<Vec2> = s.saddle_connections(o, r * gin).unwrap().iter().map(|c| c.holonomy).collect();
        let h2: Vec<Vec2> = t.saddle_connections(o, r * gn).unwrap().iter().map(|c| c.holonomy).collect();
        for sc in s.saddle_connections(o, r).unwrap() {
            let w = g.apply(sc.holonomy);
            prop_assert!(contains(&h2, w, 1e-9 * w.norm().max(1.0)), "{:?} missing", w);
        }
        for sc in t.saddle_connections(o, r).unwrap() {
            let v = g.inverse().unwrap().apply(sc.holonomy);
            prop_assert!(contains(&h, v, 1e-9 * v.norm().max(1.0)), "{:?} missing", v);
        }
    }
}
