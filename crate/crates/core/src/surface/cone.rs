//! Cone angles: the sector structure around a singularity, a metric
//! loop-development measurement, and the census of singularities.

use std::f64::consts::TAU;

use serde::Serialize;

use super::geom::{angle_from, point_segment_distance};
use super::{Frame, MarkId, SingularityRef, Surface, SurfaceError};
use crate::algebra::Vec2;
use crate::tolerance::eps_geom;

const MAX_SECTORS: usize = 100_000;
/// Chord steps per full turn in the loop development.
const LOOP_STEPS: usize = 1440;

/// A maximal angular interval around a singularity that lies in one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    /// Cumulative angle at which the sector begins.
    pub cum_start: f64,
    pub width: f64,
    pub frame: Frame,
    /// Position of the singularity in the frame.
    pub center: Vec2,
    /// Direction angle, in frame coordinates, at which the sector begins.
    pub local_start: f64,
}

impl Sector {
    pub fn local_angle(&self, cumulative: f64) -> f64 {
        self.local_start + (cumulative - self.cum_start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    FiniteAngle,
    TruncatedInfinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeRecord {
    pub location: SingularityRef,
    pub angle: f64,
    pub kind: ConeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusRow {
    /// Cone angle in radians (`inf` for truncated infinite-angle points).
    pub angle: f64,
    pub count: usize,
    pub locations: Vec<SingularityRef>,
}

impl CensusRow {
    /// Angle as a multiple of `2 pi`, if finite.
    pub fn multiple(&self) -> Option<u64> {
        self.angle.is_finite().then(|| (self.angle / TAU).round() as u64)
    }
}

#[derive(Clone, Copy)]
enum Crossing {
    Mark { id: MarkId, at_start: bool },
    Cut,
}

impl Surface {
    fn incident_events(&self, frame: Frame, center: Vec2) -> Vec<(f64, Crossing)> {
        let eps = eps_geom();
        let mut out = Vec::new();
        for m in self.glued_marks_in(frame) {
            if (m.start - center).norm() <= eps {
                out.push((
                    m.holonomy.angle(),
                    Crossing::Mark {
                        id: m.id,
                        at_start: true,
                    },
                ));
            } else if (m.end() - center).norm() <= eps {
                out.push((
                    (-m.holonomy).angle(),
                    Crossing::Mark {
                        id: m.id,
                        at_start: false,
                    },
                ));
            }
        }
        let sheet = &self.sheets[frame.sheet];
        if sheet.is_cover() && center.norm() <= eps {
            out.push((sheet.cut_direction().angle(), Crossing::Cut));
        }
        out
    }

    /// Sectors around `sing`, in counterclockwise order. The sum of their
    /// widths is the cone angle.
    pub fn sectors(&self, sing: SingularityRef) -> Result<(Vec<Sector>, ConeKind), SurfaceError> {
        let (frame0, center0) = self.singularity_location(sing)?;
        let first = self.incident_events(frame0, center0);
        let alpha0 = match first.first() {
            Some((a, _)) => *a,
            None => {
                let s = Sector {
                    cum_start: 0.0,
                    width: TAU,
                    frame: frame0,
                    center: center0,
                    local_start: 0.0,
                };
                return Ok((vec![s], ConeKind::FiniteAngle));
            }
        };
        let eps = eps_geom();
        let mut sectors = Vec::new();
        let (mut frame, mut center, mut alpha, mut cum) = (frame0, center0, alpha0, 0.0);
        for _ in 0..MAX_SECTORS {
            let events = self.incident_events(frame, center);
            let (next, crossing) = events
                .iter()
                .map(|&(a, c)| {
                    let mut x = angle_from(alpha, a);
                    if x - alpha < 1e-12 {
                        x += TAU;
                    }
                    (x, c)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .expect("a singular point has incident crossings");
            let width = next - alpha;
            sectors.push(Sector {
                cum_start: cum,
                width,
                frame,
                center,
                local_start: alpha,
            });
            cum += width;
            alpha = next;
            match crossing {
                Crossing::Mark { id, at_start } => {
                    let other = &self.marks[self.partner[id].expect("glued")];
                    frame = Frame {
                        sheet: other.sheet,
                        branch: other.branch,
                    };
                    center = if at_start { other.start } else { other.end() };
                }
                Crossing::Cut => {
                    // Counterclockwise rotation crosses the cut downward.
                    match self.sheets[frame.sheet].normalize_branch(frame.branch - 1) {
                        Some(b) => frame.branch = b,
                        None => return Ok((sectors, ConeKind::TruncatedInfinite)),
                    }
                }
            }
            let back = frame == frame0
                && (center - center0).norm() <= eps
                && (angle_from(alpha0, alpha) - alpha0).abs() < 1e-9;
            if back {
                return Ok((sectors, ConeKind::FiniteAngle));
            }
        }
        Ok((sectors, ConeKind::TruncatedInfinite))
    }

    /// Cone angle from the sector structure.
    pub fn cone_record(&self, sing: SingularityRef) -> Result<ConeRecord, SurfaceError> {
        let (sectors, kind) = self.sectors(sing)?;
        let angle = match kind {
            ConeKind::FiniteAngle => sectors.iter().map(|s| s.width).sum(),
            ConeKind::TruncatedInfinite => f64::INFINITY,
        };
        Ok(ConeRecord {
            location: sing,
            angle,
            kind,
        })
    }

    /// Distance from `sing` to the nearest singular point or reglued mark
    /// not incident to it, over every frame it touches.
    pub fn isolation_radius(&self, sing: SingularityRef) -> Result<f64, SurfaceError> {
        let eps = eps_geom();
        let (sectors, _) = self.sectors(sing)?;
        let mut limit = f64::INFINITY;
        let mut seen = Vec::new();
        for s in &sectors {
            if seen.contains(&(s.frame, s.center)) {
                continue;
            }
            seen.push((s.frame, s.center));
            for q in self.singular_points_in(s.frame) {
                let d = (q.pos - s.center).norm();
                if d > eps {
                    limit = limit.min(d);
                }
            }
            for m in self.glued_marks_in(s.frame) {
                let incident = (m.start - s.center).norm() <= eps || (m.end() - s.center).norm() <= eps;
                if !incident {
                    limit = limit.min(point_segment_distance(s.center, m.start, m.holonomy));
                }
            }
            if self.window_radius > 0.0 {
                limit = limit.min(self.window_radius - s.center.norm());
            }
        }
        Ok(limit)
    }

    /// Total angle swept by developing a loop of radius `rho` around
    /// `sing`, chord by chord through the tracer. Infinite when the loop
    /// runs out of a truncated infinite cover.
    pub fn cone_angle(&self, sing: SingularityRef, rho: f64) -> Result<f64, SurfaceError> {
        let limit = self.isolation_radius(sing)?;
        if !(rho > 0.0 && rho < limit) {
            return Err(SurfaceError::RadiusTooLarge { radius: rho, limit });
        }
        let (sectors, _) = self.sectors(sing)?;
        let s0 = sectors[0];
        let step = TAU / LOOP_STEPS as f64;
        let phi0 = s0.local_start + 0.37 * step;
        let frame0 = s0.frame;
        let p0 = s0.center + Vec2::from_angle(phi0).scale(rho);
        let (mut frame, mut p) = (frame0, p0);
        let max_order = self
            .sheets
            .iter()
            .map(|s| match s.kind {
                super::SheetKind::CyclicCover { order } => order as usize,
                _ => 1,
            })
            .max()
            .unwrap_or(1);
        let max_steps = LOOP_STEPS * (2 * max_order + 8);
        for j in 1..=max_steps {
            let phi = phi0 + j as f64 * step;
            let offset = Vec2::from_angle(phi).scale(rho);
            let prev_center = p - Vec2::from_angle(phi - step).scale(rho);
            let chord = prev_center + offset - p;
            let path = self.develop(frame, p, chord.normalized(), chord.norm(), None);
            match path.terminal {
                super::Terminal::Interior => {}
                super::Terminal::LeftWindow => return Ok(f64::INFINITY),
                super::Terminal::HitSingularity(_) => {
                    return Err(SurfaceError::RadiusTooLarge { radius: rho, limit });
                }
            }
            let end = path.end();
            frame = end.frame();
            p = end.coords;
            if j % LOOP_STEPS == 0 && frame == frame0 && (p - p0).norm() < 1e-7 {
                return Ok(j as f64 * step);
            }
        }
        Ok(f64::INFINITY)
    }

    /// Singularities whose representative lies within `r` of its sheet
    /// origin, grouped by cone angle, largest angle first.
    pub fn singularity_census(&self, r: f64) -> Vec<CensusRow> {
        let mut rows: Vec<CensusRow> = Vec::new();
        for sing in self.singularities() {
            if !self.within_radius(sing, r) {
                continue;
            }
            let Ok(rec) = self.cone_record(sing) else { continue };
            let bucket = 10.0 * eps_geom();
            match rows.iter_mut().find(|row| {
                (row.angle.is_infinite() && rec.angle.is_infinite()) || (row.angle - rec.angle).abs() <= bucket
            }) {
                Some(row) => {
                    row.count += 1;
                    row.locations.push(sing);
                }
                None => rows.push(CensusRow {
                    angle: rec.angle,
                    count: 1,
                    locations: vec![sing],
                }),
            }
        }
        rows.sort_by(|a, b| b.angle.total_cmp(&a.angle));
        rows
    }

    /// Whether some representative of `sing` lies within `r` of its sheet
    /// origin.
    pub fn within_radius(&self, sing: SingularityRef, r: f64) -> bool {
        let eps = eps_geom();
        match sing {
            SingularityRef::BranchPoint(_) => true,
            SingularityRef::SlitStart(k) | SingularityRef::SlitEnd(k) => {
                let Some(pair) = self.slits.get(k) else { return false };
                [pair.first, pair.second].iter().any(|&id| {
                    let m = &self.marks[id];
                    let pos = if matches!(sing, SingularityRef::SlitStart(_)) {
                        m.start
                    } else {
                        m.end()
                    };
                    pos.norm() <= r + eps
                })
            }
        }
    }

    /// Count of census entries with angle `multiple * 2 pi`.
    pub fn census_count(&self, r: f64, multiple: u64) -> usize {
        self.singularity_census(r)
            .iter()
            .filter(|row| row.multiple() == Some(multiple))
            .map(|row| row.count)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Mat2;
    use crate::surface::CoverOrder;
    use std::f64::consts::PI;

    fn slit_planes() -> Surface {
        let mut s = Surface::new(50.0);
        let a = s.add_plane(Mat2::IDENTITY, None).unwrap();
        let b = s.add_plane(Mat2::IDENTITY, None).unwrap();
        let m = s.add_mark(a, 0, Vec2::new(1.0, 0.0), Vec2::E).unwrap();
        let m2 = s.add_mark(b, 0, Vec2::new(1.0, 0.0), Vec2::E).unwrap();
        s.reglue(m, m2).unwrap();
        s
    }

    #[test]
    fn slit_endpoints_are_4pi() {
        let s = slit_planes();
        for sing in s.singularities() {
            assert!((s.cone_record(sing).unwrap().angle - 4.0 * PI).abs() < 1e-12);
            assert!((s.cone_angle(sing, 0.3).unwrap() - 4.0 * PI).abs() < 1e-6);
        }
        let census = s.singularity_census(100.0);
        assert_eq!(census.len(), 1);
        assert_eq!((census[0].multiple(), census[0].count), (Some(2), 2));
    }

    #[test]
    fn branch_point_angles() {
        let mut s = Surface::new(50.0);
        let c3 = s.add_cyclic_cover(CoverOrder::Finite(3), Mat2::IDENTITY, None).unwrap();
        let c2 = s
            .add_cyclic_cover(CoverOrder::Finite(2), Mat2::rotation(0.4), None)
            .unwrap();
        let inf = s
            .add_cyclic_cover(CoverOrder::TruncatedInfinite(2), Mat2::IDENTITY, None)
            .unwrap();
        let b3 = SingularityRef::BranchPoint(c3);
        let b2 = SingularityRef::BranchPoint(c2);
        assert!((s.cone_record(b3).unwrap().angle - 6.0 * PI).abs() < 1e-12);
        assert!((s.cone_angle(b3, 1.0).unwrap() - 6.0 * PI).abs() < 1e-6);
        assert!((s.cone_angle(b2, 1.0).unwrap() - 4.0 * PI).abs() < 1e-6);
        let rec = s.cone_record(SingularityRef::BranchPoint(inf)).unwrap();
        assert_eq!(rec.kind, ConeKind::TruncatedInfinite);
        assert!(s
            .cone_angle(SingularityRef::BranchPoint(inf), 1.0)
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn radius_too_large() {
        let s = slit_planes();
        assert!(matches!(
            s.cone_angle(SingularityRef::SlitStart(0), 1.5),
            Err(SurfaceError::RadiusTooLarge { .. })
        ));
    }

    #[test]
    fn fresh_plane_has_empty_census() {
        let mut s = Surface::new(10.0);
        s.add_plane(Mat2::IDENTITY, None).unwrap();
        assert!(s.singularity_census(10.0).is_empty());
    }

    #[test]
    fn regular_point_full_turn() {
        let s = slit_planes();
        let sectors = s.sectors(SingularityRef::SlitStart(0)).unwrap().0;
        assert_eq!(sectors.len(), 2);
        assert_ne!(sectors[0].frame.sheet, sectors[1].frame.sheet);
    }
}
