//! Window-scale checks of the constructions.
//!
//! Every check returns a [`VerifierReport`]. Non-membership in the Veech
//! group is only ever certified negatively; a missing certificate is
//! reported as inconclusive.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{Mat2, Vec2};
use crate::constructions::{buffer, subdivided_cayley_graph, word_matrix, WordBall};
use crate::surface::{departure_gaps, Distance, IsoOptions, Locus, SheetKind, SingularityRef, Surface, SurfaceError};
use crate::tolerance::eps_geom;

/// Smallest singularity gap accepted as tame at desk scale.
pub const TAMENESS_GAP: f64 = 0.1;

/// Slack for lengths produced by the chain optimizer.
pub const TRACED_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifierError {
    #[error("generator in U: {0} has operator norm < 1")]
    GeneratorInU(Mat2),
    #[error("word leaves the ball: {0}")]
    WordLeavesBall(String),
    #[error("radius {needed} exceeds the enumeration radius {r_full}")]
    RadiusExceedsWindow { needed: f64, r_full: f64 },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifierReport {
    pub check: String,
    pub pass: bool,
    pub status: Status,
    pub measured: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Value>,
    pub truncation_note: String,
}

impl VerifierReport {
    fn new(check: &str, status: Status, note: &str) -> Self {
        VerifierReport {
            check: check.to_owned(),
            pass: status == Status::Pass,
            status,
            measured: BTreeMap::new(),
            certificate: None,
            truncation_note: note.to_owned(),
        }
    }

    fn verdict(check: &str, pass: bool, note: &str) -> Self {
        Self::new(check, if pass { Status::Pass } else { Status::Fail }, note)
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.measured.insert(key.to_owned(), v);
        self
    }

    fn cert(mut self, v: Value) -> Self {
        self.certificate = Some(v);
        self
    }

    /// Passed, or inconclusive (no certificate found).
    pub fn acceptable(&self) -> bool {
        self.status != Status::Fail
    }
}

fn vec_json(v: Vec2) -> Value {
    json!([v.x, v.y])
}

fn require_not_in_u(g: &Mat2) -> Result<(), VerifierError> {
    if g.in_u() {
        Err(VerifierError::GeneratorInU(*g))
    } else {
        Ok(())
    }
}

/// Lower bound `|g e| + min_{|s| <= 1} |g(f + s e)|` on the distance
/// between the two attachment families of the buffer `g`-copy.
pub fn buffer_separation(g: &Mat2) -> Result<VerifierReport, VerifierError> {
    require_not_in_u(g)?;
    let d = g.apply(Vec2::E).norm();
    let d_prime = g.min_shear_image();
    let bound = d + d_prime;
    Ok(VerifierReport::verdict(
        "buffer_separation",
        bound >= FRAC_1_SQRT_2 - eps_geom(),
        "closed form; no truncation",
    )
    .with("d", d)
    .with("d_prime", d_prime)
    .with("bound", bound))
}

/// Distance between `gS` and `gS'` in the `g`-copy of `buffer(n)`, found by
/// searching crossing sequences up to `cap`.
pub fn buffer_separation_traced(g: &Mat2, n: usize, cap: f64) -> Result<VerifierReport, VerifierError> {
    let analytic = buffer_separation(g)?;
    let bound = analytic.measured["bound"];
    let s = buffer(n)
        .map_err(|e| VerifierError::NotApplicable(e.to_string()))?
        .postcompose(g)?;
    let loci = |name: &str| -> Vec<Locus> {
        s.family(name)
            .map(|f| f.mark_ids.iter().map(|&m| s.marks()[m]).collect::<Vec<_>>())
            .unwrap_or_default()
            .into_iter()
            .map(|m| Locus {
                sheet: m.sheet,
                branch: m.branch,
                a: m.start,
                b: m.end(),
            })
            .collect()
    };
    let dist = s.shortest_path(&loci("S"), &loci("S'"), cap);
    let note = format!("buffer truncated to N = {n}; search capped at length {cap}");
    let mut report = match &dist {
        Distance::Found { length, crossings } => {
            let ok = *length >= bound - TRACED_TOL && *length >= FRAC_1_SQRT_2 - TRACED_TOL;
            VerifierReport::verdict("buffer_separation_traced", ok, &note)
                .with("measured", *length)
                .cert(json!({ "crossings": crossings }))
        }
        Distance::NoPathWithinCap => VerifierReport::verdict("buffer_separation_traced", true, &note)
            .cert(json!({ "status": "no_path_within_cap" })),
    };
    for (k, v) in &analytic.measured {
        report.measured.insert(k.clone(), *v);
    }
    report.measured.insert("cap".into(), cap);
    Ok(report)
}

/// Decorated-cover branch points with their group tags: the copies of `O`.
pub fn labeled_o_copies(s: &Surface) -> Vec<(SingularityRef, Mat2)> {
    s.sheets()
        .iter()
        .filter(|sh| sh.label.as_deref() == Some("L") && matches!(sh.kind, SheetKind::CyclicCover { order: 3 }))
        .map(|sh| (SingularityRef::BranchPoint(sh.id), sh.group.unwrap_or(Mat2::IDENTITY)))
        .collect()
}

/// Exactly three saddle connections of length `<= 1.5 |g|` leave `o`,
/// with holonomies `g(-f), g(e), g(f)` and exactly one angle gap above pi.
pub fn rigidity_at_o(s: &Surface, o: SingularityRef, g: &Mat2) -> Result<VerifierReport, VerifierError> {
    let r = 1.5 * g.operator_norm();
    let rec = s.cone_record(o)?;
    let scs = s.saddle_connections(o, r)?;
    let gaps = departure_gaps(&scs, rec.angle);
    let eps = eps_geom();
    let mut expected = vec![g.apply(-Vec2::F), g.apply(Vec2::E), g.apply(Vec2::F)];
    let mut matched = scs.len() == 3;
    for sc in &scs {
        match expected
            .iter()
            .position(|v| v.approx_eq(sc.holonomy, eps * v.norm().max(1.0)))
        {
            Some(i) => {
                expected.swap_remove(i);
            }
            None => matched = false,
        }
    }
    let wide = gaps.iter().filter(|&&x| x > PI + eps).count();
    let pass = matched && wide == 1;
    let mut report = VerifierReport::verdict("rigidity_at_O", pass, "saddle connections enumerated inside the window")
        .with("count", scs.len() as f64)
        .with("cone_angle", rec.angle)
        .with("radius", r)
        .with("wide_gaps", wide as f64)
        .cert(json!({
            "singularity": o.to_string(),
            "holonomies": scs.iter().map(|c| vec_json(c.holonomy)).collect::<Vec<_>>(),
            "gaps": gaps,
        }));
    for (i, gap) in gaps.iter().enumerate() {
        report.measured.insert(format!("gap_{i}"), *gap);
    }
    Ok(report)
}

/// Sheets of the monster copies indexed by `keep` (ball indices): vertex
/// sheets tagged with a kept element and buffers with both ends kept.
fn restrict_to(s: &Surface, ball: &WordBall, keep: &[Mat2]) -> Surface {
    let inside = |g: &Mat2| keep.iter().any(|k| k.approx_eq(g, 1e-9));
    s.filtered(
        |sh| {
            let g = sh.group.unwrap_or(Mat2::IDENTITY);
            match sh.label.as_deref() {
                Some("A") | Some("L") => inside(&g),
                Some(label) => {
                    let idx: usize = label
                        .trim_start_matches('E')
                        .trim_end_matches('\'')
                        .parse()
                        .unwrap_or(0);
                    match idx.checked_sub(1).and_then(|i| ball.generators.get(i)) {
                        Some(a) => inside(&g) && inside(&(g * *a)),
                        None => false,
                    }
                }
                None => false,
            }
        },
        |_| true,
    )
}

fn monster_ball(s: &Surface) -> Result<(WordBall, usize), VerifierError> {
    let info = s
        .construction
        .as_ref()
        .filter(|c| c.name == "monster")
        .ok_or_else(|| VerifierError::NotApplicable("surface is not a monster construction".into()))?;
    let group = info
        .group
        .as_ref()
        .ok_or_else(|| VerifierError::NotApplicable("missing group".into()))?;
    let l = info.l.unwrap_or(0);
    Ok((WordBall::new(&group.effective_generators(), l), l))
}

/// The action of the word `h` on the interior sub-ball: the `h`-image of
/// the copies of radius `L - 1` matches, label for label and with fixed
/// origins, the copies tagged by the translated elements.
pub fn equivariance(s: &Surface, word: &[i32]) -> Result<VerifierReport, VerifierError> {
    let (ball, l) = monster_ball(s)?;
    let h = word_matrix(&ball.generators, word)
        .ok_or_else(|| VerifierError::WordLeavesBall(format!("bad generator index in {word:?}")))?;
    let interior: Vec<Mat2> = match l.checked_sub(1) {
        Some(r) => ball.within(r).iter().map(|&j| ball.elements[j].matrix).collect(),
        None => return Err(VerifierError::WordLeavesBall("ball radius 0 has no interior".into())),
    };
    let image: Vec<Mat2> = interior.iter().map(|k| h * *k).collect();
    if let Some(k) = image.iter().find(|m| ball.index_of(m).is_none()) {
        return Err(VerifierError::WordLeavesBall(format!(
            "{k} is outside the ball of radius {l}"
        )));
    }
    let left = restrict_to(s, &ball, &interior).postcompose(&h)?;
    let right = restrict_to(s, &ball, &image);
    let matching = left.is_isomorphic(
        &right,
        IsoOptions {
            respect_labels: true,
            fixed_origins: true,
        },
    );
    let report = VerifierReport::verdict(
        "equivariance",
        matching.is_some(),
        &format!(
            "restricted to the {} copies of word length <= {}",
            interior.len(),
            l - 1
        ),
    )
    .with("interior_elements", interior.len() as f64)
    .with("sheets", left.sheets().len() as f64)
    .with("slits", left.slits().len() as f64);
    Ok(match matching {
        Some(m) => report.cert(json!({
            "word": word,
            "sheet_map": m.sheets.iter().map(|x| [x.from, x.to]).collect::<Vec<_>>(),
        })),
        None => report.cert(json!({ "word": word, "matching": null })),
    })
}

/// `g` acting with fixed origins: the `g`-image of the marks within `rho`
/// of the origin matches the marks whose `g`-preimage lies within `rho`.
pub fn window_equivariance(s: &Surface, g: &Mat2, rho: f64) -> Result<VerifierReport, VerifierError> {
    let ginv = g.inverse().ok_or(SurfaceError::NotOrientationPreserving(*g))?;
    let eps = eps_geom();
    let within = |p: Vec2| p.norm() <= rho + eps;
    let left = s
        .filtered(|_| true, |m| within(m.start) && within(m.end()))
        .postcompose(g)?;
    let right = s.filtered(|_| true, |m| within(ginv.apply(m.start)) && within(ginv.apply(m.end())));
    let matching = left.is_isomorphic(
        &right,
        IsoOptions {
            respect_labels: false,
            fixed_origins: true,
        },
    );
    Ok(VerifierReport::verdict(
        "window_equivariance",
        matching.is_some(),
        &format!("marks within radius {rho} of the sheet origins"),
    )
    .with("rho", rho)
    .with("marks", left.marks().len() as f64)
    .with("slits", left.slits().len() as f64)
    .cert(json!({ "matrix": g, "matched": matching.is_some() })))
}

/// Singularities counted as lying in the window of radius `r`.
fn window_singularities(s: &Surface, r: f64) -> Vec<SingularityRef> {
    s.singularities()
        .into_iter()
        .filter(|&x| s.within_radius(x, r))
        .collect()
}

/// Every saddle connection of length `<= r` from window singularities is
/// parallel to `dir`.
pub fn parallel_holonomies(s: &Surface, dir: Vec2, r: f64) -> Result<VerifierReport, VerifierError> {
    let mut count = 0usize;
    let mut offender = None;
    for sing in window_singularities(s, r) {
        for sc in s.saddle_connections(sing, r)? {
            count += 1;
            if sc.holonomy.cross(dir).abs() > eps_geom() * sc.holonomy.norm().max(1.0) && offender.is_none() {
                offender = Some(json!({ "from": sing.to_string(), "holonomy": vec_json(sc.holonomy) }));
            }
        }
    }
    let mut report = VerifierReport::verdict(
        "parallel_holonomies",
        offender.is_none(),
        &format!("connections of length <= {r}"),
    )
    .with("connections", count as f64)
    .with("radius", r);
    report.certificate = offender;
    Ok(report)
}

/// Which singularities may serve as certificate sources.
pub type SourceFilter<'a> = &'a dyn Fn(&Surface, SingularityRef) -> bool;

/// Sources deep enough inside the word ball that their `g`-images, for `g`
/// a generator, are still fully enumerated.
pub fn monster_sources(s: &Surface, sing: SingularityRef) -> bool {
    let Ok((ball, l)) = monster_ball(s) else { return true };
    let Some(r) = l.checked_sub(2) else { return false };
    let deep: Vec<Mat2> = ball.within(r).iter().map(|&j| ball.elements[j].matrix).collect();
    let Ok((frame, _)) = s.singularity_location(sing) else {
        return false;
    };
    let sheet = &s.sheets()[frame.sheet];
    let sheets = match sing {
        SingularityRef::BranchPoint(_) => vec![sheet.clone()],
        SingularityRef::SlitStart(k) | SingularityRef::SlitEnd(k) => {
            let pair = s.slits()[k];
            [pair.first, pair.second]
                .iter()
                .map(|&m| s.sheets()[s.marks()[m].sheet].clone())
                .collect()
        }
    };
    sheets.iter().all(|sh| {
        matches!(sh.label.as_deref(), Some("A") | Some("L"))
            && sh.group.is_some_and(|g| deep.iter().any(|k| k.approx_eq(&g, 1e-9)))
    })
}

/// Looks for a saddle-connection holonomy `v` with `|v| <= r` whose image
/// `g v` is not a holonomy; such a `v` certifies that `g` is not in the
/// Veech group.
pub fn holonomy_nonmembership(
    s: &Surface,
    g: &Mat2,
    r: f64,
    r_full: Option<f64>,
    sources: Option<SourceFilter>,
) -> Result<VerifierReport, VerifierError> {
    let r_full = r_full.unwrap_or(0.5 * s.window_radius);
    let needed = r * g.operator_norm().max(1.0);
    if needed > r_full + eps_geom() {
        return Err(VerifierError::RadiusExceedsWindow { needed, r_full });
    }
    let mut h: Vec<Vec2> = Vec::new();
    let mut candidates: Vec<(SingularityRef, Vec2)> = Vec::new();
    for sing in window_singularities(s, r_full) {
        let source = sources.is_none_or(|f| f(s, sing));
        for sc in s.saddle_connections(sing, r_full)? {
            h.push(sc.holonomy);
            if source && sc.length <= r + eps_geom() {
                candidates.push((sing, sc.holonomy));
            }
        }
    }
    let eps = eps_geom();
    let member = |w: Vec2| h.iter().any(|u| u.approx_eq(w, eps * w.norm().max(1.0)));
    let witness = candidates.iter().find(|(_, v)| {
        let w = g.apply(*v);
        w.norm() <= r_full && !member(w)
    });
    let note = format!("holonomies of connections of length <= {r_full} from window singularities");
    let report = match witness {
        Some((sing, v)) => VerifierReport::new("holonomy_nonmembership", Status::Pass, &note).cert(json!({
            "from": sing.to_string(),
            "v": vec_json(*v),
            "g_v": vec_json(g.apply(*v)),
        })),
        None => VerifierReport::new("holonomy_nonmembership", Status::Inconclusive, &note),
    };
    Ok(report
        .with("holonomies", h.len() as f64)
        .with("candidates", candidates.len() as f64)
        .with("r", r)
        .with("r_full", r_full))
}

/// Window singularities are at least [`TAMENESS_GAP`] apart and have finite
/// cone angles. Gaps are searched up to `search`.
pub fn tameness_window(s: &Surface, big_r: f64, search: f64) -> Result<VerifierReport, VerifierError> {
    let sings = window_singularities(s, big_r);
    let mut min_gap = f64::INFINITY;
    let mut closest = None;
    let mut infinite = Vec::new();
    for &sing in &sings {
        if s.cone_record(sing)?.angle.is_infinite() {
            infinite.push(sing.to_string());
        }
        for sc in s.saddle_connections(sing, search)? {
            if sc.target != sing && sc.length < min_gap {
                min_gap = sc.length;
                closest = Some((sing, sc.target));
            }
        }
    }
    let pass = min_gap >= TAMENESS_GAP && infinite.is_empty();
    let mut report = VerifierReport::verdict(
        "tameness_window",
        pass,
        &format!("singularities within {big_r}; gaps searched up to {search}"),
    )
    .with("singularities", sings.len() as f64)
    .with("threshold", TAMENESS_GAP);
    if min_gap.is_finite() {
        report.measured.insert("min_gap".into(), min_gap);
    } else {
        report.measured.insert("min_gap_lower_bound".into(), search);
    }
    Ok(report.cert(json!({
        "closest_pair": closest.map(|(a, b)| [a.to_string(), b.to_string()]),
        "infinite_angle": infinite,
    })))
}

/// Hypotheses of the one-endedness criterion: connected gluing graph,
/// every family glued across sheets flagged as truncated infinite, and
/// pairwise disjoint marks. For monsters the gluing graph must also be the
/// subdivided Cayley ball.
pub fn one_endedness_hypotheses(s: &Surface) -> Result<VerifierReport, VerifierError> {
    let graph = s.gluing_graph();
    let components = petgraph::algo::connected_components(&graph);
    let unflagged: Vec<String> = s
        .families
        .iter()
        .filter(|(_, f)| {
            !f.truncated_infinite
                && f.mark_ids
                    .iter()
                    .any(|&m| s.partner(m).is_some_and(|p| s.marks()[p].sheet != s.marks()[m].sheet))
        })
        .map(|(k, _)| k.clone())
        .collect();
    let overlaps = s.overlapping_marks();
    let cayley = match monster_ball(s) {
        Ok((ball, _)) => Some(petgraph::algo::is_isomorphic(&subdivided_cayley_graph(&ball), &graph)),
        Err(_) => None,
    };
    let pass = components == 1 && unflagged.is_empty() && overlaps.is_empty() && cayley != Some(false);
    let mut report = VerifierReport::verdict(
        "one_endedness_hypotheses",
        pass,
        "hypotheses of the criterion only; the topological conclusion is not checked",
    )
    .with("components", components as f64)
    .with("sheets", graph.node_count() as f64)
    .with("edges", graph.edge_count() as f64)
    .with("overlapping_marks", overlaps.len() as f64);
    if let Some(c) = cayley {
        report.measured.insert("cayley_match".into(), if c { 1.0 } else { 0.0 });
    }
    Ok(report.cert(json!({ "unflagged_families": unflagged })))
}

/// Regluing the slit pairs one at a time from the unglued union: each
/// step lowers the Euler characteristic by 2 and adds two 4pi cones.
pub fn reglue_bookkeeping(s: &Surface) -> Result<VerifierReport, VerifierError> {
    let pairs = s.slits().to_vec();
    let mut t = s.clone();
    while !t.slits().is_empty() {
        t = t.without_slit(t.slits().len() - 1);
    }
    let four_pi = |t: &Surface| t.census_count(f64::INFINITY, 2);
    let mut bad = Vec::new();
    let (mut chi, mut cones) = (t.euler_delta(), four_pi(&t));
    for (k, p) in pairs.iter().enumerate() {
        t.reglue(p.first, p.second)?;
        let (chi2, cones2) = (t.euler_delta(), four_pi(&t));
        if chi2 != chi - 2 || cones2 != cones + 2 {
            bad.push(k);
        }
        (chi, cones) = (chi2, cones2);
    }
    Ok(VerifierReport::verdict(
        "reglue_bookkeeping",
        bad.is_empty(),
        "all slit pairs of the description",
    )
    .with("slits", pairs.len() as f64)
    .with("euler_delta", chi as f64)
    .with("four_pi_cones", cones as f64)
    .cert(json!({ "failed_steps": bad })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{monster, parabolic_p, GroupSpec, TruncationParams};

    #[test]
    fn buffer_bound_examples() {
        let r = buffer_separation(&Mat2::IDENTITY).unwrap();
        assert!((r.measured["bound"] - 2.0).abs() < 1e-12 && r.pass);
        let r = buffer_separation(&Mat2::diag(2.0, 0.5)).unwrap();
        assert!((r.measured["bound"] - 2.5).abs() < 1e-12);
        assert!(matches!(
            buffer_separation(&Mat2::diag(0.5, 0.5)),
            Err(VerifierError::GeneratorInU(_))
        ));
    }

    #[test]
    fn traced_buffer_small_cap() {
        let r = buffer_separation_traced(&Mat2::IDENTITY, 3, 0.1).unwrap();
        assert!(r.pass);
        assert!(!r.measured.contains_key("measured"));
    }

    #[test]
    fn nonmembership_identity_is_inconclusive() {
        let s = parabolic_p(3).unwrap();
        let r = holonomy_nonmembership(&s, &Mat2::IDENTITY, 2.0, None, None).unwrap();
        assert_eq!(r.status, Status::Inconclusive);
        assert!(matches!(
            holonomy_nonmembership(&s, &Mat2::IDENTITY, 100.0, None, None),
            Err(VerifierError::RadiusExceedsWindow { .. })
        ));
    }

    #[test]
    fn two_free_planes_are_not_connected() {
        let mut s = Surface::new(10.0);
        s.add_plane(Mat2::IDENTITY, None).unwrap();
        s.add_plane(Mat2::IDENTITY, None).unwrap();
        assert!(!one_endedness_hypotheses(&s).unwrap().pass);
    }

    #[test]
    fn equivariance_needs_interior() {
        let g = GroupSpec::new("h", vec![Mat2::diag(2.0, 0.5)]);
        let s = monster(&g, &TruncationParams::new(1, 0)).unwrap();
        assert!(matches!(equivariance(&s, &[1]), Err(VerifierError::WordLeavesBall(_))));
        let s = monster(&g, &TruncationParams::new(1, 1)).unwrap();
        assert!(equivariance(&s, &[]).unwrap().pass);
        assert!(equivariance(&s, &[1]).unwrap().pass);
        assert!(matches!(
            equivariance(&s, &[1, 1]),
            Err(VerifierError::WordLeavesBall(_))
        ));
    }
}
