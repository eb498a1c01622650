#![allow(dead_code)]

use flatsurf::algebra::{Mat2, Vec2};
use flatsurf::constructions::{
    buffer, decorated, monster, parabolic_p, parabolic_p_prime, vertex_surface, GroupSpec, TruncationParams,
};
use flatsurf::surface::{SingularityRef, Surface};
use rand::Rng;

pub fn hyperbolic() -> GroupSpec {
    GroupSpec::new("hyperbolic", vec![Mat2::diag(2.0, 0.5)])
}

/// The vertex surface for the trivial group: the decorated cover with
/// `C'` reglued to a plane.
pub fn vertex() -> Surface {
    vertex_surface(&[Mat2::IDENTITY], 4).unwrap()
}

/// Branch point of the decorated cover in `vertex()`.
pub fn vertex_o(s: &Surface) -> SingularityRef {
    let l = s
        .sheets()
        .iter()
        .position(|sh| sh.label.as_deref() == Some("L"))
        .unwrap();
    SingularityRef::BranchPoint(l)
}

/// Every built fixture, named.
pub fn fixtures() -> Vec<(&'static str, Surface)> {
    vec![
        ("buffer(1)", buffer(1).unwrap()),
        ("buffer(3)", buffer(3).unwrap()),
        ("decorated(4)", decorated(4).unwrap()),
        ("vertex", vertex()),
        ("parabolic_P(6)", parabolic_p(6).unwrap()),
        ("parabolic_Pprime(6)", parabolic_p_prime(6).unwrap()),
        (
            "monster(trivial, L=1, N=4)",
            monster(&GroupSpec::trivial(), &TruncationParams::new(4, 1)).unwrap(),
        ),
        (
            "monster(hyperbolic, L=1, N=2)",
            monster(&hyperbolic(), &TruncationParams::new(2, 1)).unwrap(),
        ),
        (
            "monster(hyperbolic, L=2, N=4)",
            monster(&hyperbolic(), &TruncationParams::new(4, 2)).unwrap(),
        ),
    ]
}

fn family_mark(s: &Surface, name: &str) -> usize {
    s.families
        .iter()
        .find(|(k, _)| k.as_str() == name || k.ends_with(&format!(".{name}")))
        .unwrap()
        .1
        .mark_ids[0]
}

/// Five perturbations of `vertex()`, each breaking the local structure at O.
pub fn corrupted_vertices() -> Vec<(&'static str, Surface)> {
    let s = vertex();
    let t = family_mark(&s, "t");
    let b = family_mark(&s, "b");
    let c0 = family_mark(&s, "C0");
    let glue_c0 = s.slits().iter().position(|p| p.first == c0 || p.second == c0).unwrap();
    let l = s
        .sheets()
        .iter()
        .position(|sh| sh.label.as_deref() == Some("L"))
        .unwrap();
    let a = s
        .sheets()
        .iter()
        .position(|sh| sh.label.as_deref() == Some("A"))
        .unwrap();

    let mut extra = s.clone();
    let m = extra.add_mark(l, 1, Vec2::new(0.5, 0.5), Vec2::E).unwrap();
    let m2 = extra.add_mark(a, 0, Vec2::new(-10.0, -10.0), Vec2::E).unwrap();
    extra.reglue(m, m2).unwrap();

    let mut moved = s.filtered(|_| true, |mk| mk.id != t && mk.id != b);
    let t2 = moved.add_mark(l, 0, Vec2::new(0.3, 1.0), Vec2::F).unwrap();
    let b2 = moved.add_mark(l, 0, Vec2::new(0.0, -2.0), Vec2::F).unwrap();
    moved.reglue(t2, b2).unwrap();

    vec![
        ("delete t", s.filtered(|_| true, |mk| mk.id != t)),
        ("delete b", s.filtered(|_| true, |mk| mk.id != b)),
        ("unglue C0/C' pair 1", s.without_slit(glue_c0)),
        ("extra pair near O", extra),
        ("move t", moved),
    ]
}

/// Uniform matrix with entries in `[-k, k]` and determinant above `min_det`.
pub fn random_gl_plus(rng: &mut impl Rng, k: f64, min_det: f64) -> Mat2 {
    loop {
        let g = Mat2::new(
            rng.gen_range(-k..k),
            rng.gen_range(-k..k),
            rng.gen_range(-k..k),
            rng.gen_range(-k..k),
        );
        if g.det() > min_det {
            return g;
        }
    }
}

/// Descriptions agree up to a relative tolerance, window radius aside.
pub fn same_description(a: &Surface, b: &Surface, tol: f64) -> bool {
    let close = |x: Vec2, y: Vec2| (x - y).norm() <= tol * x.norm().max(y.norm()).max(1.0);
    a.sheets().len() == b.sheets().len()
        && a.sheets().iter().zip(b.sheets()).all(|(x, y)| {
            x.kind == y.kind
                && x.label == y.label
                && x.chart.approx_eq(&y.chart, tol)
                && match (x.group, y.group) {
                    (Some(g), Some(h)) => g.approx_eq(&h, tol),
                    (None, None) => true,
                    _ => false,
                }
        })
        && a.marks().len() == b.marks().len()
        && a.marks().iter().zip(b.marks()).all(|(x, y)| {
            x.sheet == y.sheet && x.branch == y.branch && close(x.start, y.start) && close(x.holonomy, y.holonomy)
        })
        && a.slits() == b.slits()
        && a.families == b.families
}
