//! Straight-line development across slits and branch cuts.

use serde::Serialize;

use super::geom::ray_segment;
use super::{Frame, MarkId, SingularityRef, Surface, SurfaceError};
use crate::algebra::Vec2;
use crate::tolerance::eps_geom;

/// Events closer than this to the current point are the point itself.
const S_MIN: f64 = 1e-10;
const MAX_STEPS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bank {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OnSlit {
    pub mark: MarkId,
    pub bank: Bank,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub sheet: usize,
    pub branch: i64,
    pub coords: Vec2,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub on_slit: Option<OnSlit>,
}

impl SurfacePoint {
    pub fn new(sheet: usize, branch: i64, coords: Vec2) -> Self {
        SurfacePoint {
            sheet,
            branch,
            coords,
            on_slit: None,
        }
    }

    pub fn frame(&self) -> Frame {
        Frame {
            sheet: self.sheet,
            branch: self.branch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", content = "singularity", rename_all = "snake_case")]
pub enum Terminal {
    Interior,
    HitSingularity(SingularityRef),
    LeftWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicPath {
    pub segments: Vec<(SurfacePoint, SurfacePoint)>,
    pub length: f64,
    pub terminal: Terminal,
    /// Developed displacement from start to end.
    pub holonomy: Vec2,
}

impl GeodesicPath {
    pub fn end(&self) -> &SurfacePoint {
        &self.segments.last().expect("paths have a segment").1
    }

    /// Marks crossed, in order.
    pub fn crossings(&self) -> Vec<MarkId> {
        self.segments
            .iter()
            .filter_map(|(_, b)| b.on_slit.map(|o| o.mark))
            .collect()
    }
}

impl serde::Serialize for SingularityRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl std::fmt::Display for SingularityRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SingularityRef::SlitStart(k) => write!(f, "slit{k}.start"),
            SingularityRef::SlitEnd(k) => write!(f, "slit{k}.end"),
            SingularityRef::BranchPoint(s) => write!(f, "sheet{s}.branch"),
        }
    }
}

enum Event {
    Singular(SingularityRef, Vec2),
    Mark { id: MarkId, t: f64 },
    Cut { step: i64 },
    Window,
}

impl Surface {
    /// Traces the geodesic from `from` in direction `dir` for at most
    /// `max_len`, stopping at singularities and at the window boundary.
    pub fn trace(&self, from: &SurfacePoint, dir: Vec2, max_len: f64) -> Result<GeodesicPath, SurfaceError> {
        let sheet = self.sheet(from.sheet)?;
        let branch = sheet.normalize_branch(from.branch).ok_or(SurfaceError::BadBranch {
            sheet: from.sheet,
            branch: from.branch,
        })?;
        let frame = Frame {
            sheet: from.sheet,
            branch,
        };
        if self
            .singular_points_in(frame)
            .iter()
            .any(|q| (q.pos - from.coords).norm() <= eps_geom())
        {
            return Err(SurfaceError::MeetsSingularity);
        }
        Ok(self.develop(
            frame,
            from.coords,
            dir.normalized(),
            max_len,
            from.on_slit.map(|o| o.mark),
        ))
    }

    /// Core tracer. `skip` is a mark the start point lies on.
    pub(crate) fn develop(&self, frame: Frame, p: Vec2, d: Vec2, max_len: f64, skip: Option<MarkId>) -> GeodesicPath {
        let eps = eps_geom();
        let mut frame = frame;
        let mut p = p;
        let mut skip = skip;
        let mut remaining = max_len;
        let mut segments = Vec::new();
        let mut start_pt = SurfacePoint {
            sheet: frame.sheet,
            branch: frame.branch,
            coords: p,
            on_slit: None,
        };
        let mut terminal = Terminal::Interior;

        for _ in 0..MAX_STEPS {
            let sheet = &self.sheets[frame.sheet];
            let mut best: Option<(f64, Event)> = None;
            let consider = |s: f64, ev: Event, best: &mut Option<(f64, Event)>| {
                if best.as_ref().is_none_or(|(bs, _)| s < *bs) {
                    *best = Some((s, ev));
                }
            };

            let points = self.singular_points_in(frame);
            for q in &points {
                let rel = q.pos - p;
                let s = rel.dot(d);
                if s > S_MIN && rel.cross(d).abs() <= eps {
                    consider(s, Event::Singular(q.sing, q.pos), &mut best);
                }
            }
            for m in self.glued_marks_in(frame) {
                if Some(m.id) == skip {
                    continue;
                }
                if let Some((s, t)) = ray_segment(p, d, m.start, m.holonomy) {
                    let tol = eps / m.holonomy.norm();
                    if s > S_MIN && t > tol && t < 1.0 - tol {
                        consider(s, Event::Mark { id: m.id, t }, &mut best);
                    }
                }
            }
            if sheet.is_cover() {
                let cut = sheet.cut_direction();
                let reach = p.norm() + remaining + 1.0;
                if let Some((s, u)) = ray_segment(p, d, Vec2::ZERO, cut.scale(reach)) {
                    if s > S_MIN && u * reach > eps && u <= 1.0 {
                        let step = if cut.cross(d) < 0.0 { 1 } else { -1 };
                        consider(s, Event::Cut { step }, &mut best);
                    }
                }
            }
            if self.window_radius > 0.0 {
                let r = self.window_radius;
                // |p + s d|^2 = r^2
                let b = p.dot(d);
                let c = p.norm_sq() - r * r;
                if c > 0.0 {
                    consider(0.0, Event::Window, &mut best);
                } else {
                    let s = -b + (b * b - c).max(0.0).sqrt();
                    consider(s, Event::Window, &mut best);
                }
            }

            let (s, ev) = match best {
                Some((s, ev)) if s <= remaining => (s, ev),
                _ => {
                    let end = p + d.scale(remaining);
                    segments.push((
                        start_pt,
                        SurfacePoint {
                            sheet: frame.sheet,
                            branch: frame.branch,
                            coords: end,
                            on_slit: None,
                        },
                    ));
                    break;
                }
            };
            let hit = p + d.scale(s);
            remaining -= s;
            let mut end_pt = SurfacePoint {
                sheet: frame.sheet,
                branch: frame.branch,
                coords: hit,
                on_slit: None,
            };
            match ev {
                Event::Singular(sing, pos) => {
                    end_pt.coords = pos;
                    segments.push((start_pt, end_pt));
                    terminal = Terminal::HitSingularity(sing);
                    break;
                }
                Event::Window => {
                    segments.push((start_pt, end_pt));
                    terminal = Terminal::LeftWindow;
                    break;
                }
                Event::Mark { id, t } => {
                    let m = &self.marks[id];
                    let bank = if m.holonomy.cross(d) > 0.0 {
                        Bank::Right
                    } else {
                        Bank::Left
                    };
                    end_pt.on_slit = Some(OnSlit { mark: id, bank, t });
                    segments.push((start_pt, end_pt));
                    let other = &self.marks[self.partner[id].expect("glued")];
                    frame = Frame {
                        sheet: other.sheet,
                        branch: other.branch,
                    };
                    p = other.point_at(t);
                    skip = Some(other.id);
                    let out_bank = match bank {
                        Bank::Right => Bank::Left,
                        Bank::Left => Bank::Right,
                    };
                    start_pt = SurfacePoint {
                        sheet: frame.sheet,
                        branch: frame.branch,
                        coords: p,
                        on_slit: Some(OnSlit {
                            mark: other.id,
                            bank: out_bank,
                            t,
                        }),
                    };
                }
                Event::Cut { step } => {
                    segments.push((start_pt, end_pt));
                    match sheet.normalize_branch(frame.branch + step) {
                        Some(b) => {
                            frame.branch = b;
                            p = hit;
                            skip = None;
                            start_pt = SurfacePoint {
                                sheet: frame.sheet,
                                branch: b,
                                coords: p,
                                on_slit: None,
                            };
                        }
                        None => {
                            terminal = Terminal::LeftWindow;
                            break;
                        }
                    }
                }
            }
        }

        let length = segments.iter().map(|(a, b)| (b.coords - a.coords).norm()).sum();
        let holonomy = segments
            .iter()
            .fold(Vec2::ZERO, |acc, (a, b)| acc + (b.coords - a.coords));
        GeodesicPath {
            segments,
            length,
            terminal,
            holonomy,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Mat2;
    use crate::surface::CoverOrder;

    fn slit_planes() -> Surface {
        let mut s = Surface::new(50.0);
        let a = s.add_plane(Mat2::IDENTITY, Some("A")).unwrap();
        let b = s.add_plane(Mat2::IDENTITY, Some("B")).unwrap();
        let m = s.add_mark(a, 0, Vec2::new(1.0, 0.0), Vec2::E).unwrap();
        let m2 = s.add_mark(b, 0, Vec2::new(1.0, 0.0), Vec2::E).unwrap();
        s.reglue(m, m2).unwrap();
        s
    }

    #[test]
    fn straight_on_a_plane() {
        let mut s = Surface::new(50.0);
        s.add_plane(Mat2::IDENTITY, None).unwrap();
        let path = s.trace(&SurfacePoint::new(0, 0, Vec2::ZERO), Vec2::E, 5.0).unwrap();
        assert_eq!(path.terminal, Terminal::Interior);
        assert!(path.end().coords.approx_eq(Vec2::new(5.0, 0.0), 1e-12));
        assert!((path.length - 5.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_a_slit_changes_sheet() {
        let s = slit_planes();
        let path = s
            .trace(&SurfacePoint::new(0, 0, Vec2::new(1.5, -1.0)), Vec2::F, 2.0)
            .unwrap();
        let end = path.end();
        assert_eq!(end.sheet, 1);
        assert!(end.coords.approx_eq(Vec2::new(1.5, 1.0), 1e-12));
        assert_eq!(path.crossings(), vec![0]);
        assert_eq!(path.segments[0].1.on_slit.unwrap().bank, Bank::Right);
        assert_eq!(path.segments[1].0.on_slit.unwrap().bank, Bank::Left);
    }

    #[test]
    fn hitting_a_mark_endpoint() {
        let s = slit_planes();
        let path = s
            .trace(&SurfacePoint::new(0, 0, Vec2::new(0.5, 0.0)), Vec2::E, 3.0)
            .unwrap();
        assert_eq!(path.terminal, Terminal::HitSingularity(SingularityRef::SlitStart(0)));
        assert!((path.length - 0.5).abs() < 1e-12);
    }

    #[test]
    fn slit_transparency() {
        let s = slit_planes();
        // Cross upward, then come straight back down through the same point.
        let up = s
            .trace(&SurfacePoint::new(0, 0, Vec2::new(1.3, -0.5)), Vec2::F, 1.0)
            .unwrap();
        let back = s.trace(up.end(), -Vec2::F, 1.0).unwrap();
        assert_eq!(back.end().sheet, 0);
        assert!(back.end().coords.approx_eq(Vec2::new(1.3, -0.5), 1e-12));
    }

    #[test]
    fn unglued_marks_are_transparent() {
        let mut s = Surface::new(50.0);
        let a = s.add_plane(Mat2::IDENTITY, None).unwrap();
        s.add_mark(a, 0, Vec2::new(1.0, 0.0), Vec2::E).unwrap();
        let path = s
            .trace(&SurfacePoint::new(0, 0, Vec2::new(1.5, -1.0)), Vec2::F, 2.0)
            .unwrap();
        assert_eq!(path.segments.len(), 1);
        assert_eq!(path.terminal, Terminal::Interior);
    }

    #[test]
    fn branch_cut_crossing() {
        let mut s = Surface::new(50.0);
        let c = s.add_cyclic_cover(CoverOrder::Finite(3), Mat2::IDENTITY, None).unwrap();
        // Upward across the negative real axis increments the branch.
        let path = s
            .trace(&SurfacePoint::new(c, 0, Vec2::new(-1.0, -1.0)), Vec2::F, 2.0)
            .unwrap();
        assert_eq!(path.end().branch, 1);
        let down = s
            .trace(&SurfacePoint::new(c, 0, Vec2::new(-1.0, 1.0)), -Vec2::F, 2.0)
            .unwrap();
        assert_eq!(down.end().branch, 2);
        // Three loops around the branch point close up.
        let mut p = SurfacePoint::new(c, 0, Vec2::new(-1.0, -1.0));
        for _ in 0..3 {
            for d in [Vec2::F, Vec2::E, -Vec2::F, -Vec2::E] {
                p = *s.trace(&p, d, 2.0).unwrap().end();
            }
            assert!(p.coords.approx_eq(Vec2::new(-1.0, -1.0), 1e-12));
        }
        assert_eq!(p.branch, 0);
    }

    #[test]
    fn truncated_infinite_cover_reports_window() {
        let mut s = Surface::new(50.0);
        let c = s
            .add_cyclic_cover(CoverOrder::TruncatedInfinite(1), Mat2::IDENTITY, None)
            .unwrap();
        let mut p = SurfacePoint::new(c, 0, Vec2::new(-1.0, -1.0));
        p = *s.trace(&p, Vec2::F, 2.0).unwrap().end();
        assert_eq!(p.branch, 1);
        let p = SurfacePoint::new(c, 1, Vec2::new(-1.0, -1.0));
        let path = s.trace(&p, Vec2::F, 2.0).unwrap();
        assert_eq!(path.terminal, Terminal::LeftWindow);
    }

    #[test]
    fn leaving_the_window() {
        let mut s = Surface::new(3.0);
        s.add_plane(Mat2::IDENTITY, None).unwrap();
        let path = s.trace(&SurfacePoint::new(0, 0, Vec2::ZERO), Vec2::E, 5.0).unwrap();
        assert_eq!(path.terminal, Terminal::LeftWindow);
        assert!((path.length - 3.0).abs() < 1e-12);
    }
}
