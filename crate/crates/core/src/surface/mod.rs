//! Slit-construction flat surfaces.
//!
//! A [`Surface`] is a finite union of sheets (planes and cyclic branched
//! covers of the plane) carrying marks. Pairs of marks with equal holonomy
//! can be reglued crosswise: the left bank of the first mark is identified
//! with the right bank of the second at equal segment parameter, and vice
//! versa. Marks that are not reglued are inert labels and do not affect the
//! flat structure.
//!
//! Coordinates are developed per sheet: the sheet chart is already applied
//! to every stored point and vector, and is kept only as a label (and, on
//! covers, to place the branch cut).

mod cone;
pub mod geom;
mod iso;
pub mod json;
mod path;
mod saddle;
mod trace;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::algebra::{Mat2, Vec2};
use crate::constructions::GroupSpec;
use crate::tolerance::eps_geom;

pub use cone::{CensusRow, ConeKind, ConeRecord, Sector};
pub use iso::{IsoOptions, Matching, SheetMatch};
pub use path::{Distance, Locus};
pub use saddle::{departure_gaps, SaddleConnection};
pub use trace::{Bank, GeodesicPath, OnSlit, SurfacePoint, Terminal};

pub type SheetId = usize;
pub type MarkId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("chart {0} is not in GL+(2,R)")]
    NotOrientationPreserving(Mat2),
    #[error("invalid cover order: {0}")]
    InvalidOrder(String),
    #[error("unknown sheet {0}")]
    UnknownSheet(SheetId),
    #[error("unknown mark {0}")]
    UnknownMark(MarkId),
    #[error("branch {branch} is not valid on sheet {sheet}")]
    BadBranch { sheet: SheetId, branch: i64 },
    #[error("mark has zero length")]
    ZeroLength,
    #[error("mark is not finite")]
    NotFinite,
    #[error("mark intersects existing mark {0}")]
    IntersectsExisting(MarkId),
    #[error("mark meets a singularity")]
    MeetsSingularity,
    #[error("mark meets the branch cut of sheet {0}")]
    CrossesBranchCut(SheetId),
    #[error("marks {0} and {1} have different holonomy")]
    SlopeMismatch(MarkId, MarkId),
    #[error("marks {0} and {1} are not disjoint")]
    NotDisjoint(MarkId, MarkId),
    #[error("mark {0} is already reglued")]
    AlreadyGlued(MarkId),
    #[error("radius {radius} too large: nearest obstruction at {limit}")]
    RadiusTooLarge { radius: f64, limit: f64 },
    #[error("unknown singularity {0:?}")]
    UnknownSingularity(SingularityRef),
}

/// How many sheets a cover has over the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverOrder {
    /// `k`-fold cyclic cover, `k >= 2`.
    Finite(u32),
    /// Infinite cyclic cover, faithful for branch indices in `[-B, B]`.
    TruncatedInfinite(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SheetKind {
    Plane,
    CyclicCover { order: u32 },
    TruncatedInfiniteCover { branch_window: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sheet {
    pub id: SheetId,
    pub kind: SheetKind,
    pub chart: Mat2,
    pub label: Option<String>,
    /// Group element this sheet is a copy for.
    pub group: Option<Mat2>,
}

impl Sheet {
    pub fn is_cover(&self) -> bool {
        !matches!(self.kind, SheetKind::Plane)
    }

    /// Direction of the branch cut ray from the origin: the chart image of
    /// the negative horizontal ray.
    pub fn cut_direction(&self) -> Vec2 {
        self.chart.apply(-Vec2::E).normalized()
    }

    /// Canonical branch index, or `None` outside the faithful range.
    pub fn normalize_branch(&self, branch: i64) -> Option<i64> {
        match self.kind {
            SheetKind::Plane => (branch == 0).then_some(0),
            SheetKind::CyclicCover { order } => Some(branch.rem_euclid(order as i64)),
            SheetKind::TruncatedInfiniteCover { branch_window } => {
                (branch.abs() <= branch_window as i64).then_some(branch)
            }
        }
    }

    /// Cone angle at the branch point, `None` for truncated infinite covers.
    pub fn branch_angle(&self) -> Option<f64> {
        match self.kind {
            SheetKind::Plane => None,
            SheetKind::CyclicCover { order } => Some(std::f64::consts::TAU * order as f64),
            SheetKind::TruncatedInfiniteCover { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mark {
    pub id: MarkId,
    pub sheet: SheetId,
    pub branch: i64,
    pub start: Vec2,
    pub holonomy: Vec2,
}

impl Mark {
    pub fn end(&self) -> Vec2 {
        self.start + self.holonomy
    }

    pub fn point_at(&self, t: f64) -> Vec2 {
        self.start + self.holonomy.scale(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlitPair {
    pub first: MarkId,
    pub second: MarkId,
}

/// A named, ordered family of marks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Family {
    pub mark_ids: Vec<MarkId>,
    /// The family stands for an infinite family cut off at the window.
    pub truncated_infinite: bool,
    /// The family would be reglued across an edge leaving the truncated
    /// region and is left unglued.
    pub boundary: bool,
}

/// Parameters a surface was built from, kept so that checks needing the
/// group structure can recover it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionInfo {
    pub name: String,
    pub n: usize,
    pub l: Option<usize>,
    pub group: Option<GroupSpec>,
}

/// A singular point: a class of reglued mark endpoints or a branch point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SingularityRef {
    /// Common start point of slit pair `k`.
    SlitStart(usize),
    /// Common end point of slit pair `k`.
    SlitEnd(usize),
    BranchPoint(SheetId),
}

/// A chart region: one sheet and one branch of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Frame {
    pub sheet: SheetId,
    pub branch: i64,
}

/// A singular point as seen from one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FramePoint {
    pub sing: SingularityRef,
    pub pos: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    sheets: Vec<Sheet>,
    marks: Vec<Mark>,
    slits: Vec<SlitPair>,
    partner: Vec<Option<MarkId>>,
    pub window_radius: f64,
    pub families: BTreeMap<String, Family>,
    pub construction: Option<ConstructionInfo>,
}

impl Surface {
    pub fn new(window_radius: f64) -> Self {
        Surface {
            sheets: Vec::new(),
            marks: Vec::new(),
            slits: Vec::new(),
            partner: Vec::new(),
            window_radius,
            families: BTreeMap::new(),
            construction: None,
        }
    }

    pub fn sheets(&self) -> &[Sheet] {
        &self.sheets
    }

    pub fn marks(&self) -> &[Mark] {
        &self.marks
    }

    pub fn slits(&self) -> &[SlitPair] {
        &self.slits
    }

    pub fn sheet(&self, id: SheetId) -> Result<&Sheet, SurfaceError> {
        self.sheets.get(id).ok_or(SurfaceError::UnknownSheet(id))
    }

    pub fn mark(&self, id: MarkId) -> Result<&Mark, SurfaceError> {
        self.marks.get(id).ok_or(SurfaceError::UnknownMark(id))
    }

    /// The mark `id` is reglued to, if any.
    pub fn partner(&self, id: MarkId) -> Option<MarkId> {
        self.partner.get(id).copied().flatten()
    }

    pub fn add_plane(&mut self, chart: Mat2, label: Option<&str>) -> Result<SheetId, SurfaceError> {
        self.push_sheet(SheetKind::Plane, chart, label)
    }

    pub fn add_cyclic_cover(
        &mut self,
        order: CoverOrder,
        chart: Mat2,
        label: Option<&str>,
    ) -> Result<SheetId, SurfaceError> {
        let kind = match order {
            CoverOrder::Finite(k) if k >= 2 => SheetKind::CyclicCover { order: k },
            CoverOrder::TruncatedInfinite(b) if b >= 1 => SheetKind::TruncatedInfiniteCover { branch_window: b },
            other => return Err(SurfaceError::InvalidOrder(format!("{other:?}"))),
        };
        self.push_sheet(kind, chart, label)
    }

    fn push_sheet(&mut self, kind: SheetKind, chart: Mat2, label: Option<&str>) -> Result<SheetId, SurfaceError> {
        if !chart.is_orientation_preserving() {
            return Err(SurfaceError::NotOrientationPreserving(chart));
        }
        let id = self.sheets.len();
        self.sheets.push(Sheet {
            id,
            kind,
            chart,
            label: label.map(str::to_owned),
            group: None,
        });
        Ok(id)
    }

    pub fn set_group(&mut self, sheet: SheetId, g: Mat2) -> Result<(), SurfaceError> {
        self.sheets
            .get_mut(sheet)
            .ok_or(SurfaceError::UnknownSheet(sheet))?
            .group = Some(g);
        Ok(())
    }

    pub fn add_mark(
        &mut self,
        sheet: SheetId,
        branch: i64,
        start: Vec2,
        holonomy: Vec2,
    ) -> Result<MarkId, SurfaceError> {
        let eps = eps_geom();
        let sh = self.sheet(sheet)?;
        let branch = sh
            .normalize_branch(branch)
            .ok_or(SurfaceError::BadBranch { sheet, branch })?;
        if !start.is_finite() || !holonomy.is_finite() {
            return Err(SurfaceError::NotFinite);
        }
        if holonomy.norm() <= eps {
            return Err(SurfaceError::ZeroLength);
        }
        if sh.is_cover() {
            if geom::point_segment_distance(Vec2::ZERO, start, holonomy) <= eps {
                return Err(SurfaceError::MeetsSingularity);
            }
            let cut = sh.cut_direction();
            let reach = start.norm().max((start + holonomy).norm()) + 1.0;
            if geom::segment_distance(start, holonomy, Vec2::ZERO, cut.scale(reach)) <= eps {
                return Err(SurfaceError::CrossesBranchCut(sheet));
            }
        }
        for m in self.marks.iter().filter(|m| m.sheet == sheet && m.branch == branch) {
            if geom::segment_distance(start, holonomy, m.start, m.holonomy) <= eps {
                return Err(SurfaceError::IntersectsExisting(m.id));
            }
        }
        let id = self.marks.len();
        self.marks.push(Mark {
            id,
            sheet,
            branch,
            start,
            holonomy,
        });
        self.partner.push(None);
        Ok(id)
    }

    /// Reglues `m` with `m2` crosswise. Returns the slit-pair index.
    pub fn reglue(&mut self, m: MarkId, m2: MarkId) -> Result<usize, SurfaceError> {
        let a = *self.mark(m)?;
        let b = *self.mark(m2)?;
        if m == m2 {
            return Err(SurfaceError::NotDisjoint(m, m2));
        }
        if !a.holonomy.approx_eq(b.holonomy, eps_geom()) {
            return Err(SurfaceError::SlopeMismatch(m, m2));
        }
        if a.sheet == b.sheet
            && a.branch == b.branch
            && geom::segment_distance(a.start, a.holonomy, b.start, b.holonomy) <= eps_geom()
        {
            return Err(SurfaceError::NotDisjoint(m, m2));
        }
        for id in [m, m2] {
            if self.partner[id].is_some() {
                return Err(SurfaceError::AlreadyGlued(id));
            }
        }
        self.partner[m] = Some(m2);
        self.partner[m2] = Some(m);
        self.slits.push(SlitPair { first: m, second: m2 });
        Ok(self.slits.len() - 1)
    }

    /// Like [`reglue`](Self::reglue), then copies the first holonomy onto
    /// the second mark so the pair is exactly equal.
    pub fn reglue_exact(&mut self, m: MarkId, m2: MarkId) -> Result<usize, SurfaceError> {
        let k = self.reglue(m, m2)?;
        self.marks[m2].holonomy = self.marks[m].holonomy;
        Ok(k)
    }

    pub fn add_family(&mut self, name: &str, mark_ids: Vec<MarkId>, truncated_infinite: bool) {
        self.families.insert(
            name.to_owned(),
            Family {
                mark_ids,
                truncated_infinite,
                boundary: false,
            },
        );
    }

    pub fn set_boundary(&mut self, name: &str) {
        if let Some(f) = self.families.get_mut(name) {
            f.boundary = true;
        }
    }

    /// Copies all of `other` into `self` as disjoint new sheets, prefixing
    /// family names. Returns the sheet and mark id offsets.
    pub(crate) fn append(&mut self, other: &Surface, prefix: &str) -> (SheetId, MarkId) {
        let (so, mo) = (self.sheets.len(), self.marks.len());
        self.sheets.extend(other.sheets.iter().map(|s| Sheet {
            id: s.id + so,
            ..s.clone()
        }));
        self.marks.extend(other.marks.iter().map(|m| Mark {
            id: m.id + mo,
            sheet: m.sheet + so,
            ..*m
        }));
        self.partner.extend(other.partner.iter().map(|p| p.map(|q| q + mo)));
        self.slits.extend(other.slits.iter().map(|p| SlitPair {
            first: p.first + mo,
            second: p.second + mo,
        }));
        for (name, f) in &other.families {
            let ids = f.mark_ids.iter().map(|m| m + mo).collect();
            self.families
                .insert(format!("{prefix}{name}"), Family { mark_ids: ids, ..*f });
        }
        (so, mo)
    }

    pub fn family(&self, name: &str) -> Option<&Family> {
        self.families.get(name)
    }

    /// Change of Euler characteristic relative to the unglued union.
    pub fn euler_delta(&self) -> i64 {
        -2 * self.slits.len() as i64
    }

    /// All singularities: two per slit pair, one per cover sheet.
    pub fn singularities(&self) -> Vec<SingularityRef> {
        let mut out = Vec::with_capacity(2 * self.slits.len());
        for k in 0..self.slits.len() {
            out.push(SingularityRef::SlitStart(k));
            out.push(SingularityRef::SlitEnd(k));
        }
        out.extend(
            self.sheets
                .iter()
                .filter(|s| s.is_cover())
                .map(|s| SingularityRef::BranchPoint(s.id)),
        );
        out
    }

    /// A frame and position representing `sing`.
    pub fn singularity_location(&self, sing: SingularityRef) -> Result<(Frame, Vec2), SurfaceError> {
        let bad = || SurfaceError::UnknownSingularity(sing);
        match sing {
            SingularityRef::SlitStart(k) | SingularityRef::SlitEnd(k) => {
                let pair = self.slits.get(k).ok_or_else(bad)?;
                let m = &self.marks[pair.first];
                let pos = if matches!(sing, SingularityRef::SlitStart(_)) {
                    m.start
                } else {
                    m.end()
                };
                Ok((
                    Frame {
                        sheet: m.sheet,
                        branch: m.branch,
                    },
                    pos,
                ))
            }
            SingularityRef::BranchPoint(s) => {
                let sh = self.sheets.get(s).filter(|sh| sh.is_cover()).ok_or_else(bad)?;
                let branch = sh.normalize_branch(0).unwrap_or(0);
                Ok((Frame { sheet: s, branch }, Vec2::ZERO))
            }
        }
    }

    /// Reglued marks lying in `frame`.
    pub(crate) fn glued_marks_in(&self, frame: Frame) -> impl Iterator<Item = &Mark> + '_ {
        self.marks
            .iter()
            .filter(move |m| m.sheet == frame.sheet && m.branch == frame.branch && self.partner[m.id].is_some())
    }

    /// Singular points visible in `frame`, with local positions.
    pub(crate) fn singular_points_in(&self, frame: Frame) -> Vec<FramePoint> {
        let mut out = Vec::new();
        for (k, pair) in self.slits.iter().enumerate() {
            for id in [pair.first, pair.second] {
                let m = &self.marks[id];
                if m.sheet == frame.sheet && m.branch == frame.branch {
                    out.push(FramePoint {
                        sing: SingularityRef::SlitStart(k),
                        pos: m.start,
                    });
                    out.push(FramePoint {
                        sing: SingularityRef::SlitEnd(k),
                        pos: m.end(),
                    });
                }
            }
        }
        if self.sheets[frame.sheet].is_cover() {
            out.push(FramePoint {
                sing: SingularityRef::BranchPoint(frame.sheet),
                pos: Vec2::ZERO,
            });
        }
        out
    }

    /// Affine copy with every chart post-composed with `g`.
    pub fn postcompose(&self, g: &Mat2) -> Result<Surface, SurfaceError> {
        if !g.is_orientation_preserving() {
            return Err(SurfaceError::NotOrientationPreserving(*g));
        }
        let mut out = self.clone();
        for sh in &mut out.sheets {
            sh.chart = *g * sh.chart;
            sh.group = sh.group.map(|h| *g * h);
        }
        for m in &mut out.marks {
            m.start = g.apply(m.start);
            m.holonomy = g.apply(m.holonomy);
        }
        // Reglued holonomies stay bitwise equal when they were.
        for pair in &out.slits.clone() {
            let (a, b) = (self.marks[pair.first].holonomy, self.marks[pair.second].holonomy);
            if a == b {
                out.marks[pair.second].holonomy = out.marks[pair.first].holonomy;
            }
        }
        out.window_radius = self.window_radius * g.operator_norm();
        Ok(out)
    }

    /// Sub-surface keeping the selected sheets and marks. Slit pairs survive
    /// only when both marks do; ids are renumbered densely.
    pub fn filtered(&self, keep_sheet: impl Fn(&Sheet) -> bool, keep_mark: impl Fn(&Mark) -> bool) -> Surface {
        let mut sheet_map = vec![None; self.sheets.len()];
        let mut out = Surface::new(self.window_radius);
        out.construction = self.construction.clone();
        for sh in self.sheets.iter().filter(|s| keep_sheet(s)) {
            let id = out.sheets.len();
            sheet_map[sh.id] = Some(id);
            out.sheets.push(Sheet { id, ..sh.clone() });
        }
        let mut mark_map = vec![None; self.marks.len()];
        for m in &self.marks {
            if let Some(sheet) = sheet_map[m.sheet] {
                if keep_mark(m) {
                    let id = out.marks.len();
                    mark_map[m.id] = Some(id);
                    out.marks.push(Mark { id, sheet, ..*m });
                    out.partner.push(None);
                }
            }
        }
        for pair in &self.slits {
            if let (Some(a), Some(b)) = (mark_map[pair.first], mark_map[pair.second]) {
                out.partner[a] = Some(b);
                out.partner[b] = Some(a);
                out.slits.push(SlitPair { first: a, second: b });
            }
        }
        for (name, fam) in &self.families {
            let ids: Vec<_> = fam.mark_ids.iter().filter_map(|&m| mark_map[m]).collect();
            if !ids.is_empty() {
                out.families.insert(name.clone(), Family { mark_ids: ids, ..*fam });
            }
        }
        out
    }

    /// Drops slit pair `k`; both marks stay as inert marks.
    pub fn without_slit(&self, k: usize) -> Surface {
        let mut out = self.clone();
        if k < out.slits.len() {
            let pair = out.slits.remove(k);
            out.partner[pair.first] = None;
            out.partner[pair.second] = None;
        }
        out
    }

    /// Every pair of marks in one frame at distance `<= eps`.
    pub fn overlapping_marks(&self) -> Vec<(MarkId, MarkId)> {
        let eps = eps_geom();
        let mut out = Vec::new();
        for (i, a) in self.marks.iter().enumerate() {
            for b in &self.marks[i + 1..] {
                if a.sheet == b.sheet
                    && a.branch == b.branch
                    && geom::segment_distance(a.start, a.holonomy, b.start, b.holonomy) <= eps
                {
                    out.push((a.id, b.id));
                }
            }
        }
        out
    }

    /// Largest distance from a sheet origin to a mark endpoint.
    pub fn mark_extent(&self) -> f64 {
        self.marks
            .iter()
            .map(|m| m.start.norm().max(m.end().norm()))
            .fold(0.0, f64::max)
    }

    /// Sheet adjacency through slit pairs, self-gluings dropped.
    pub fn gluing_graph(&self) -> petgraph::graph::UnGraph<SheetId, ()> {
        let mut g = petgraph::graph::UnGraph::new_undirected();
        let nodes: Vec<_> = self.sheets.iter().map(|s| g.add_node(s.id)).collect();
        let mut seen = std::collections::BTreeSet::new();
        for pair in &self.slits {
            let (a, b) = (self.marks[pair.first].sheet, self.marks[pair.second].sheet);
            if a != b && seen.insert((a.min(b), a.max(b))) {
                g.add_edge(nodes[a.min(b)], nodes[a.max(b)], ());
            }
        }
        g
    }
}
