//! Builders for the buffer, decorated, parabolic and monster surfaces,
//! truncated to finitely many marks per family and a finite word ball.

use petgraph::graph::UnGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Mat2, Vec2};
use crate::surface::{ConstructionInfo, CoverOrder, MarkId, Surface, SurfaceError};
use crate::tolerance::EPS_MAT;

/// Extra room between the outermost mark and the window boundary.
const WINDOW_MARGIN: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("generator in U: {0} has operator norm < 1")]
    GeneratorInU(Mat2),
    #[error("generator {0} is not in GL+(2,R)")]
    NotOrientationPreserving(Mat2),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("placement overlap: {0}")]
    PlacementOverlap(String),
    #[error("window radius {radius} does not contain all marks (extent {extent})")]
    WindowTooSmall { radius: f64, extent: f64 },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub name: String,
    pub generators: Vec<Mat2>,
}

impl GroupSpec {
    pub fn new(name: &str, generators: Vec<Mat2>) -> Self {
        GroupSpec {
            name: name.to_owned(),
            generators,
        }
    }

    pub fn trivial() -> Self {
        GroupSpec::new("trivial", Vec::new())
    }

    pub fn validate(&self) -> Result<(), ConstructionError> {
        for g in &self.generators {
            if !g.is_orientation_preserving() {
                return Err(ConstructionError::NotOrientationPreserving(*g));
            }
            if g.in_u() {
                return Err(ConstructionError::GeneratorInU(*g));
            }
        }
        Ok(())
    }

    /// The generators used to build: the identity alone for the trivial group.
    pub fn effective_generators(&self) -> Vec<Mat2> {
        if self.generators.is_empty() {
            vec![Mat2::IDENTITY]
        } else {
            self.generators.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationParams {
    /// Marks per infinite family.
    pub n: usize,
    /// Word-ball radius.
    pub l: usize,
    /// Window radius; derived from the mark extent when absent.
    pub r: Option<f64>,
}

impl TruncationParams {
    pub fn new(n: usize, l: usize) -> Self {
        TruncationParams { n, l, r: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallElement {
    pub matrix: Mat2,
    /// Shortest word, as signed 1-based generator indices.
    pub word: Vec<i32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CayleyEdge {
    pub from: usize,
    /// 0-based generator index.
    pub generator: usize,
    pub to: usize,
}

/// Elements of word length `<= radius`, in breadth-first order, matrices
/// identified within `EPS_MAT`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordBall {
    pub generators: Vec<Mat2>,
    pub radius: usize,
    pub elements: Vec<BallElement>,
}

impl WordBall {
    pub fn new(generators: &[Mat2], radius: usize) -> Self {
        let mut elements = vec![BallElement {
            matrix: Mat2::IDENTITY,
            word: Vec::new(),
        }];
        let mut frontier = vec![0];
        let steps: Vec<(i32, Mat2)> = generators
            .iter()
            .enumerate()
            .flat_map(|(i, g)| {
                let inv = g.inverse().expect("generators are invertible");
                [(i as i32 + 1, *g), (-(i as i32 + 1), inv)]
            })
            .collect();
        for _ in 0..radius {
            let mut next = Vec::new();
            for &j in &frontier {
                for &(letter, a) in &steps {
                    let m = elements[j].matrix * a;
                    if elements.iter().any(|e| e.matrix.approx_eq(&m, EPS_MAT)) {
                        continue;
                    }
                    let mut word = elements[j].word.clone();
                    word.push(letter);
                    next.push(elements.len());
                    elements.push(BallElement { matrix: m, word });
                }
            }
            frontier = next;
        }
        WordBall {
            generators: generators.to_vec(),
            radius,
            elements,
        }
    }

    pub fn index_of(&self, g: &Mat2) -> Option<usize> {
        self.elements.iter().position(|e| e.matrix.approx_eq(g, EPS_MAT))
    }

    /// Right-multiplication edges `g -> g a_i` with both ends in the ball.
    pub fn edges(&self) -> Vec<CayleyEdge> {
        let mut out = Vec::new();
        for (from, e) in self.elements.iter().enumerate() {
            for (generator, a) in self.generators.iter().enumerate() {
                if let Some(to) = self.index_of(&(e.matrix * *a)) {
                    out.push(CayleyEdge { from, generator, to });
                }
            }
        }
        out
    }

    /// Indices of elements of word length `<= r`.
    pub fn within(&self, r: usize) -> Vec<usize> {
        (0..self.elements.len())
            .filter(|&j| self.elements[j].word.len() <= r)
            .collect()
    }
}

/// Matrix of a word of signed 1-based generator indices.
pub fn word_matrix(generators: &[Mat2], word: &[i32]) -> Option<Mat2> {
    let mut m = Mat2::IDENTITY;
    for &w in word {
        let g = generators.get(w.unsigned_abs() as usize - 1)?;
        m = m * if w > 0 { *g } else { g.inverse()? };
    }
    Some(m)
}

/// The Cayley ball graph with every edge subdivided into three and a pendant
/// vertex at every original vertex; the expected sheet adjacency of the
/// monster.
pub fn subdivided_cayley_graph(ball: &WordBall) -> UnGraph<(), ()> {
    let mut g = UnGraph::new_undirected();
    let vertices: Vec<_> = ball.elements.iter().map(|_| g.add_node(())).collect();
    for &v in &vertices {
        let pendant = g.add_node(());
        g.add_edge(v, pendant, ());
    }
    for e in ball.edges() {
        let (x, y) = (g.add_node(()), g.add_node(()));
        g.add_edge(vertices[e.from], x, ());
        g.add_edge(x, y, ());
        g.add_edge(y, vertices[e.to], ());
    }
    g
}

fn check_n(n: usize) -> Result<(), ConstructionError> {
    if n == 0 {
        return Err(ConstructionError::InvalidParams("N must be at least 1".into()));
    }
    Ok(())
}

fn placed(r: Result<MarkId, SurfaceError>, what: &str) -> Result<MarkId, ConstructionError> {
    r.map_err(|e| match e {
        SurfaceError::IntersectsExisting(m) => ConstructionError::PlacementOverlap(format!("{what} meets mark {m}")),
        other => other.into(),
    })
}

fn finish(s: &mut Surface, r: Option<f64>) -> Result<(), ConstructionError> {
    if let Some((a, b)) = s.overlapping_marks().first() {
        return Err(ConstructionError::PlacementOverlap(format!("marks {a} and {b}")));
    }
    let extent = s.mark_extent();
    match r {
        Some(radius) if radius <= extent => return Err(ConstructionError::WindowTooSmall { radius, extent }),
        Some(radius) => s.window_radius = radius,
        None => s.window_radius = extent + WINDOW_MARGIN,
    }
    Ok(())
}

fn horizontal_family(
    s: &mut Surface,
    sheet: usize,
    name: &str,
    starts: impl Iterator<Item = Vec2>,
    holonomy: Vec2,
) -> Result<Vec<MarkId>, ConstructionError> {
    let ids = starts
        .map(|p| placed(s.add_mark(sheet, 0, p, holonomy), name))
        .collect::<Result<Vec<_>, _>>()?;
    s.add_family(name, ids.clone(), true);
    Ok(ids)
}

fn glue_families(s: &mut Surface, a: &[MarkId], b: &[MarkId]) -> Result<(), ConstructionError> {
    for (&m, &m2) in a.iter().zip(b) {
        s.reglue_exact(m, m2)?;
    }
    Ok(())
}

fn buffer_labeled(n: usize, e: &str, e2: &str) -> Result<Surface, ConstructionError> {
    check_n(n)?;
    let mut s = Surface::new(1.0);
    let a = s.add_plane(Mat2::IDENTITY, Some(e))?;
    let b = s.add_plane(Mat2::IDENTITY, Some(e2))?;
    s.set_group(a, Mat2::IDENTITY)?;
    s.set_group(b, Mat2::IDENTITY)?;
    let ns = || (1..=n).map(|k| k as f64);
    horizontal_family(&mut s, a, "S", ns().map(|k| Vec2::new(4.0 * k, 0.0)), Vec2::E)?;
    let glue = horizontal_family(
        &mut s,
        a,
        "S_glue",
        ns().map(|k| Vec2::new(4.0 * k + 2.0, 0.0)),
        Vec2::E,
    )?;
    horizontal_family(&mut s, b, "S'", ns().map(|k| Vec2::new(0.0, 2.0 * k)), Vec2::E)?;
    let glue2 = horizontal_family(
        &mut s,
        b,
        "S'_glue",
        ns().map(|k| Vec2::new(0.0, 2.0 * k + 1.0)),
        Vec2::E,
    )?;
    glue_families(&mut s, &glue, &glue2)?;
    finish(&mut s, None)?;
    s.construction = Some(ConstructionInfo {
        name: "buffer".into(),
        n,
        l: None,
        group: None,
    });
    Ok(s)
}

/// Two planes `E`, `E'` joined along `S_glue`/`S'_glue`; `S` and `S'`
/// stay unglued.
pub fn buffer(n: usize) -> Result<Surface, ConstructionError> {
    buffer_labeled(n, "E", "E'")
}

/// Adds the decorated 3-fold cover to `s`: `C'` on the right half of
/// branch 0, and `t`, `b` reglued. Returns the sheet id.
fn add_decorated(s: &mut Surface, n: usize) -> Result<usize, ConstructionError> {
    let l = s.add_cyclic_cover(CoverOrder::Finite(3), Mat2::IDENTITY, Some("L"))?;
    s.set_group(l, Mat2::IDENTITY)?;
    horizontal_family(
        s,
        l,
        "C'",
        (1..=n).map(|k| Vec2::new(2.0 * k as f64 - 1.0, 0.0)),
        Vec2::E,
    )?;
    let t = placed(s.add_mark(l, 0, Vec2::new(0.0, 1.0), Vec2::F), "t")?;
    let b = placed(s.add_mark(l, 0, Vec2::new(0.0, -2.0), Vec2::F), "b")?;
    s.add_family("t", vec![t], false);
    s.add_family("b", vec![b], false);
    s.reglue_exact(t, b)?;
    Ok(l)
}

/// The decorated surface alone; its branch point is `O`.
pub fn decorated(n: usize) -> Result<Surface, ConstructionError> {
    check_n(n)?;
    let mut s = Surface::new(1.0);
    add_decorated(&mut s, n)?;
    finish(&mut s, None)?;
    s.construction = Some(ConstructionInfo {
        name: "decorated".into(),
        n,
        l: None,
        group: None,
    });
    Ok(s)
}

/// Vertical offsets of the `C^{-i}` families and horizontal spacings.
fn negative_family_placement(generators: &[Mat2]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let (mut y, mut h_prev) = (-1.0, 0.0);
    for a in generators {
        let v = a.inverse().expect("invertible").apply(Vec2::E);
        let h = v.y.abs() + 1.0;
        y -= h_prev + h + 1.0;
        h_prev = h;
        out.push((v.x.abs().ceil() + 1.0, y));
    }
    out
}

/// The vertex surface `V_Id`: plane `A` with families `C0..Ck` and
/// `C-1..C-k`, and the decorated cover with `C0` reglued to `C'`.
pub fn vertex_surface(generators: &[Mat2], n: usize) -> Result<Surface, ConstructionError> {
    check_n(n)?;
    let mut s = Surface::new(1.0);
    let a = s.add_plane(Mat2::IDENTITY, Some("A"))?;
    s.set_group(a, Mat2::IDENTITY)?;
    let ns = || (1..=n).map(|k| k as f64);
    let c0 = horizontal_family(&mut s, a, "C0", ns().map(|k| Vec2::new(2.0 * k - 1.0, 0.0)), Vec2::E)?;
    for i in 1..=generators.len() {
        let y = i as f64;
        horizontal_family(
            &mut s,
            a,
            &format!("C{i}"),
            ns().map(|k| Vec2::new(2.0 * k - 1.0, y)),
            Vec2::E,
        )?;
    }
    for (i, (g, (x, y))) in generators.iter().zip(negative_family_placement(generators)).enumerate() {
        let hol = g.inverse().expect("invertible").apply(Vec2::E);
        horizontal_family(
            &mut s,
            a,
            &format!("C-{}", i + 1),
            ns().map(|k| Vec2::new(k * x, y)),
            hol,
        )?;
    }
    add_decorated(&mut s, n)?;
    let cp = s.family("C'").expect("decorated family").mark_ids.clone();
    glue_families(&mut s, &c0, &cp)?;
    finish(&mut s, None)?;
    Ok(s)
}

fn parabolic(name: &str, ns: impl Iterator<Item = i64> + Clone, n: usize) -> Result<Surface, ConstructionError> {
    check_n(n)?;
    let mut s = Surface::new(1.0);
    let a = s.add_plane(Mat2::IDENTITY, Some("A"))?;
    let b = s.add_plane(Mat2::IDENTITY, Some("A'"))?;
    let hol = Vec2::new(2.0, 0.0);
    let starts = ns.map(|k| Vec2::new(4.0 * k as f64 + 1.0, 0.0));
    let c = horizontal_family(&mut s, a, "C", starts.clone(), hol)?;
    let c2 = horizontal_family(&mut s, b, "C'", starts, hol)?;
    glue_families(&mut s, &c, &c2)?;
    finish(&mut s, None)?;
    s.construction = Some(ConstructionInfo {
        name: name.into(),
        n,
        l: None,
        group: None,
    });
    Ok(s)
}

/// Planes `A`, `A'` with marks `[4n+1, 4n+3] x {0}`, `n` in `1..=N`.
pub fn parabolic_p(n: usize) -> Result<Surface, ConstructionError> {
    parabolic("parabolic_P", 1..=n as i64, n)
}

/// As [`parabolic_p`] with `n` in `-N..=N`.
pub fn parabolic_p_prime(n: usize) -> Result<Surface, ConstructionError> {
    parabolic("parabolic_Pprime", -(n as i64)..=n as i64, n)
}

/// Family-name prefix of the vertex copy for ball element `j`.
pub fn vertex_prefix(j: usize) -> String {
    format!("g{j}.")
}

/// Family-name prefix of the buffer for the edge leaving element `j` along
/// generator `i` (0-based).
pub fn buffer_prefix(j: usize, i: usize) -> String {
    format!("g{j}.e{}.", i + 1)
}

/// The monster surface over the word ball of radius `L`.
pub fn monster(group: &GroupSpec, params: &TruncationParams) -> Result<Surface, ConstructionError> {
    group.validate()?;
    let n = params.n;
    check_n(n)?;
    let gens = group.effective_generators();
    let ball = WordBall::new(&gens, params.l);
    let vertex = vertex_surface(&gens, n)?;

    let mut s = Surface::new(1.0);
    for (j, el) in ball.elements.iter().enumerate() {
        s.append(&vertex.postcompose(&el.matrix)?, &vertex_prefix(j));
    }
    let ids = |s: &Surface, name: &str| s.family(name).expect("family exists").mark_ids.clone();
    for (j, el) in ball.elements.iter().enumerate() {
        for (i, a) in gens.iter().enumerate() {
            let up = format!("{}C{}", vertex_prefix(j), i + 1);
            match ball.index_of(&(el.matrix * *a)) {
                Some(j2) => {
                    let buf = buffer_labeled(n, &format!("E{}", i + 1), &format!("E{}'", i + 1))?;
                    let prefix = buffer_prefix(j, i);
                    s.append(&buf.postcompose(&el.matrix)?, &prefix);
                    let (c, sf) = (ids(&s, &up), ids(&s, &format!("{prefix}S")));
                    glue_families(&mut s, &c, &sf)?;
                    let (sp, cm) = (
                        ids(&s, &format!("{prefix}S'")),
                        ids(&s, &format!("{}C-{}", vertex_prefix(j2), i + 1)),
                    );
                    glue_families(&mut s, &sp, &cm)?;
                }
                None => s.set_boundary(&up),
            }
            if ball.index_of(&(el.matrix * a.inverse().expect("invertible"))).is_none() {
                s.set_boundary(&format!("{}C-{}", vertex_prefix(j), i + 1));
            }
        }
    }
    finish(&mut s, params.r)?;
    s.construction = Some(ConstructionInfo {
        name: "monster".into(),
        n,
        l: Some(params.l),
        group: Some(group.clone()),
    });
    Ok(s)
}
