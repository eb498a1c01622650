//! Saddle-connection enumeration.
//!
//! Every saddle connection of length `<= r` leaving a singularity starts in
//! one of its sectors and develops to a straight segment that passes through
//! the interiors of a sequence of reglued marks (and branch cuts). Unfolding
//! all such sequences within the radius gives a finite superset of candidate
//! targets; each candidate direction is then shot with the tracer and kept
//! only if the trace really ends on a singularity at the expected place.

use std::f64::consts::TAU;

use serde::Serialize;

use super::geom::{angle_from, point_segment_distance, ray_segment};
use super::{Frame, MarkId, Sector, SingularityRef, Surface, SurfaceError, Terminal};
use crate::algebra::Vec2;
use crate::tolerance::eps_geom;

const MAX_DEPTH: usize = 256;
const MAX_NODES: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleConnection {
    pub holonomy: Vec2,
    /// Departure angle measured inside the cone at the source, from the
    /// start of its first sector.
    pub departure: f64,
    pub target: SingularityRef,
    pub length: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum Obstacle {
    Mark(MarkId),
    Cut,
}

/// A developed segment that continues into another frame.
#[derive(Clone, Copy)]
struct Gate {
    obstacle: Obstacle,
    a: Vec2,
    h: Vec2,
}

struct Unfold<'a> {
    s: &'a Surface,
    apex: Vec2,
    r: f64,
    nodes: usize,
    out: Vec<f64>,
}

impl Unfold<'_> {
    /// Distance along `dir` from the apex to the first gate beyond `min_s`.
    fn nearest(&self, gates: &[Gate], dir: Vec2, min_s: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, g) in gates.iter().enumerate() {
            if let Some((s, t)) = ray_segment(self.apex, dir, g.a, g.h) {
                if (-1e-12..=1.0 + 1e-12).contains(&t) && s > min_s + 1e-10 && best.is_none_or(|(_, b)| s < b) {
                    best = Some((i, s));
                }
            }
        }
        best
    }

    /// Rays leave the apex in directions `[lo, hi]` and enter `frame`
    /// through `entry`; each ray continues through the first gate it meets.
    fn visit(&mut self, frame: Frame, offset: Vec2, lo: f64, hi: f64, entry: Option<Gate>, depth: usize) {
        self.nodes += 1;
        if depth > MAX_DEPTH || self.nodes > MAX_NODES {
            return;
        }
        let eps = eps_geom();
        let tol = 1e-9;
        let sheet = &self.s.sheets[frame.sheet];
        let mut gates: Vec<Gate> = self
            .s
            .glued_marks_in(frame)
            .filter(|m| entry.is_none_or(|e| e.obstacle != Obstacle::Mark(m.id)))
            .map(|m| Gate {
                obstacle: Obstacle::Mark(m.id),
                a: m.start + offset,
                h: m.holonomy,
            })
            .collect();
        if sheet.is_cover() && entry.is_none_or(|e| e.obstacle != Obstacle::Cut) {
            let reach = (self.apex - offset).norm() + self.r + 1.0;
            gates.push(Gate {
                obstacle: Obstacle::Cut,
                a: offset,
                h: sheet.cut_direction().scale(reach),
            });
        }
        let behind = |dir: Vec2| {
            entry
                .and_then(|e| ray_segment(self.apex, dir, e.a, e.h))
                .map(|(s, _)| s.max(0.0))
                .unwrap_or(0.0)
        };

        for q in self.s.singular_points_in(frame) {
            let rel = q.pos + offset - self.apex;
            let d = rel.norm();
            if d <= eps || d > self.r + eps {
                continue;
            }
            let theta = angle_from(lo - tol, rel.angle());
            if theta > hi + tol {
                continue;
            }
            let dir = rel.scale(1.0 / d);
            let start = behind(dir);
            if d < start - tol {
                continue;
            }
            if self.nearest(&gates, dir, start).is_some_and(|(_, s)| s < d - tol) {
                continue;
            }
            self.out.push(theta.clamp(lo, hi));
        }

        let mut bounds = vec![lo, hi];
        for g in &gates {
            if let Some((l2, h2)) = self.window(g.a, g.h, lo, hi) {
                bounds.push(l2);
                bounds.push(h2);
            }
        }
        bounds.sort_by(f64::total_cmp);
        bounds.dedup();
        let mut runs: Vec<(usize, f64, f64)> = Vec::new();
        for w in bounds.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 - t0 <= 1e-13 {
                continue;
            }
            let dir = Vec2::from_angle(0.5 * (t0 + t1));
            let Some((gi, s)) = self.nearest(&gates, dir, behind(dir)) else {
                continue;
            };
            if s > self.r + eps {
                let g = gates[gi];
                let at = |t: f64| {
                    let u =
                        ray_segment(self.apex, Vec2::from_angle(t), g.a, g.h).map_or(0.0, |(_, u)| u.clamp(0.0, 1.0));
                    g.a + g.h.scale(u)
                };
                let (p0, p1) = (at(t0), at(t1));
                if point_segment_distance(self.apex, p0, p1 - p0) > self.r + eps {
                    continue;
                }
            }
            match runs.last_mut() {
                Some(run) if run.0 == gi && run.2 == t0 => run.2 = t1,
                _ => runs.push((gi, t0, t1)),
            }
        }

        for (gi, l2, h2) in runs {
            let gate = gates[gi];
            match gate.obstacle {
                Obstacle::Mark(id) => {
                    let other = &self.s.marks[self.s.partner[id].expect("glued")];
                    let next = Frame {
                        sheet: other.sheet,
                        branch: other.branch,
                    };
                    let off = gate.a - other.start;
                    let entry = Gate {
                        obstacle: Obstacle::Mark(other.id),
                        ..gate
                    };
                    self.visit(next, off, l2, h2, Some(entry), depth + 1);
                }
                Obstacle::Cut => {
                    let mid = Vec2::from_angle(0.5 * (l2 + h2));
                    let step = if gate.h.cross(mid) < 0.0 { 1 } else { -1 };
                    if let Some(b) = sheet.normalize_branch(frame.branch + step) {
                        let next = Frame {
                            sheet: frame.sheet,
                            branch: b,
                        };
                        self.visit(next, offset, l2, h2, Some(gate), depth + 1);
                    }
                }
            }
        }
    }

    /// Angular window, within `[lo, hi]`, of directions from the apex that
    /// pass through the interior of the developed segment `[a, a + h]`.
    fn window(&self, a: Vec2, h: Vec2, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let ra = a - self.apex;
        let rb = a + h - self.apex;
        if h.cross(ra).abs() <= eps_geom() * h.norm() {
            return None;
        }
        if point_segment_distance(self.apex, a, h) > self.r {
            return None;
        }
        let ta = angle_from(lo, ra.angle());
        let delta = ra.cross(rb).atan2(ra.dot(rb));
        let (mut l, mut u) = if delta >= 0.0 {
            (ta, ta + delta)
        } else {
            (ta + delta, ta)
        };
        for shift in [-TAU, 0.0, TAU] {
            let (l2, u2) = ((l + shift).max(lo), (u + shift).min(hi));
            if u2 - l2 > 1e-13 {
                l = l2;
                u = u2;
                return Some((l, u));
            }
        }
        None
    }
}

impl Surface {
    /// All saddle connections of length `<= r` issuing from `from`, sorted
    /// by departure angle.
    pub fn saddle_connections(&self, from: SingularityRef, r: f64) -> Result<Vec<SaddleConnection>, SurfaceError> {
        let (sectors, _) = self.sectors(from)?;
        let total: f64 = sectors.iter().map(|s| s.width).sum();
        let mut found: Vec<SaddleConnection> = Vec::new();
        for sector in &sectors {
            for sc in self.sector_connections(sector, r) {
                let dup = found.iter().any(|f| {
                    let d = (f.departure - sc.departure).abs();
                    d < 1e-9 || (total.is_finite() && (d - total).abs() < 1e-9)
                });
                if !dup {
                    found.push(sc);
                }
            }
        }
        found.sort_by(|a, b| a.departure.total_cmp(&b.departure));
        Ok(found)
    }

    fn sector_connections(&self, sector: &Sector, r: f64) -> Vec<SaddleConnection> {
        let lo = sector.local_start;
        let hi = sector.local_start + sector.width;
        let mut unfold = Unfold {
            s: self,
            apex: sector.center,
            r,
            nodes: 0,
            out: Vec::new(),
        };
        unfold.visit(sector.frame, Vec2::ZERO, lo, hi, None, 0);
        self.shoot(sector, unfold.out, r)
    }

    /// Keeps the candidate directions whose trace ends on a singularity.
    fn shoot(&self, sector: &Sector, mut thetas: Vec<f64>, r: f64) -> Vec<SaddleConnection> {
        let lo = sector.local_start;
        thetas.sort_by(f64::total_cmp);
        thetas.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

        let eps = eps_geom();
        let mut out = Vec::new();
        for theta in thetas {
            let path = self.develop(sector.frame, sector.center, Vec2::from_angle(theta), r + eps, None);
            if let Terminal::HitSingularity(target) = path.terminal {
                if path.length <= r + eps {
                    out.push(SaddleConnection {
                        holonomy: path.holonomy,
                        departure: sector.cum_start + (theta - lo),
                        target,
                        length: path.length,
                    });
                }
            }
        }
        out
    }

    /// Departure from `sing` at cumulative angle `departure` inside its cone.
    pub fn trace_from_singularity(
        &self,
        sing: SingularityRef,
        departure: f64,
        max_len: f64,
    ) -> Result<super::GeodesicPath, SurfaceError> {
        let (sectors, _) = self.sectors(sing)?;
        let total: f64 = sectors.iter().map(|s| s.width).sum();
        let theta = if total.is_finite() {
            departure.rem_euclid(total)
        } else {
            departure
        };
        let sector = sectors
            .iter()
            .find(|s| theta >= s.cum_start && theta <= s.cum_start + s.width)
            .unwrap_or(&sectors[0]);
        let dir = Vec2::from_angle(sector.local_angle(theta));
        Ok(self.develop(sector.frame, sector.center, dir, max_len, None))
    }
}

/// Consecutive departure-angle gaps, cyclically, for connections sorted by
/// departure inside a cone of angle `total`.
pub fn departure_gaps(connections: &[SaddleConnection], total: f64) -> Vec<f64> {
    let n = connections.len();
    (0..n)
        .map(|i| {
            let a = connections[i].departure;
            let b = if i + 1 < n {
                connections[i + 1].departure
            } else {
                connections[0].departure + total
            };
            b - a
        })
        .collect()
}
