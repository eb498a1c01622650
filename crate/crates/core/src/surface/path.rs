//! Shortest paths between point sets, by best-first search over the
//! sequences of reglued marks a path crosses.
//!
//! For a fixed crossing sequence the gluings are translations, so the path
//! develops to a polyline whose waypoints slide along the crossed marks;
//! its length is a convex function of the waypoint parameters and is
//! minimized by coordinate descent. Extending a sequence never shortens it,
//! so the search stops once the cheapest open sequence costs more than the
//! best complete path.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::geom::segments_cross;
use super::{Frame, MarkId, Surface};
use crate::algebra::Vec2;

const MAX_EXPANSIONS: usize = 200_000;

/// A closed segment `[a, b]` in one frame; a point when `a == b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Locus {
    pub sheet: usize,
    pub branch: i64,
    pub a: Vec2,
    pub b: Vec2,
}

impl Locus {
    pub fn point(sheet: usize, branch: i64, p: Vec2) -> Self {
        Locus {
            sheet,
            branch,
            a: p,
            b: p,
        }
    }

    pub fn frame(&self) -> Frame {
        Frame {
            sheet: self.sheet,
            branch: self.branch,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Distance {
    Found { length: f64, crossings: Vec<MarkId> },
    NoPathWithinCap,
}

impl Distance {
    pub fn length(&self) -> Option<f64> {
        match self {
            Distance::Found { length, .. } => Some(*length),
            Distance::NoPathWithinCap => None,
        }
    }
}

/// A developed segment the path must touch.
#[derive(Debug, Clone, Copy)]
struct Gate {
    a: Vec2,
    h: Vec2,
}

fn chain_length(gates: &[Gate], t: &[f64]) -> f64 {
    gates
        .windows(2)
        .zip(t.windows(2))
        .map(|(g, t)| (g[1].a + g[1].h.scale(t[1]) - g[0].a - g[0].h.scale(t[0])).norm())
        .sum()
}

/// Minimizes the polyline length over the gate parameters.
fn solve_chain(gates: &[Gate]) -> (f64, Vec<f64>) {
    let n = gates.len();
    let mut t = vec![0.5; n];
    let mut best = chain_length(gates, &t);
    for _ in 0..2000 {
        for i in 0..n {
            if gates[i].h.norm() == 0.0 {
                continue;
            }
            let local = |x: f64| {
                let p = gates[i].a + gates[i].h.scale(x);
                let mut f = 0.0;
                if i > 0 {
                    f += (p - gates[i - 1].a - gates[i - 1].h.scale(t[i - 1])).norm();
                }
                if i + 1 < n {
                    f += (gates[i + 1].a + gates[i + 1].h.scale(t[i + 1]) - p).norm();
                }
                f
            };
            t[i] = golden_min(local, 0.0, 1.0);
        }
        let len = chain_length(gates, &t);
        if best - len < 1e-15 {
            best = best.min(len);
            break;
        }
        best = len;
    }
    (best, t)
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..90 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    // Endpoints are often optimal for clamped problems.
    [0.0, mid, 1.0]
        .into_iter()
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap_or(mid)
}

#[derive(Debug, Clone)]
struct State {
    cost: f64,
    source: usize,
    crossings: Vec<MarkId>,
}

impl PartialEq for State {
    fn eq(&self, o: &Self) -> bool {
        self.cost == o.cost
    }
}
impl Eq for State {}
impl PartialOrd for State {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for State {
    fn cmp(&self, o: &Self) -> Ordering {
        o.cost.total_cmp(&self.cost)
    }
}

impl Surface {
    /// Frames and developed offsets along a crossing sequence.
    fn chain_frames(&self, start: Frame, crossings: &[MarkId]) -> Vec<(Frame, Vec2)> {
        let mut out = vec![(start, Vec2::ZERO)];
        for &m in crossings {
            let (_, off) = *out.last().expect("nonempty");
            let mk = &self.marks[m];
            let other = &self.marks[self.partner[m].expect("glued")];
            out.push((
                Frame {
                    sheet: other.sheet,
                    branch: other.branch,
                },
                off + mk.start - other.start,
            ));
        }
        out
    }

    fn gates(&self, source: &Locus, crossings: &[MarkId], target: Option<&Locus>) -> Vec<Gate> {
        let frames = self.chain_frames(source.frame(), crossings);
        let mut gates = vec![Gate {
            a: source.a,
            h: source.b - source.a,
        }];
        for (i, &m) in crossings.iter().enumerate() {
            let mk = &self.marks[m];
            gates.push(Gate {
                a: mk.start + frames[i].1,
                h: mk.holonomy,
            });
        }
        if let Some(tg) = target {
            let off = frames.last().expect("nonempty").1;
            gates.push(Gate {
                a: tg.a + off,
                h: tg.b - tg.a,
            });
        }
        gates
    }

    /// Every leg stays inside its frame: no transversal crossing of a
    /// reglued mark other than the ones it starts or ends on.
    fn legs_valid(&self, source: &Locus, crossings: &[MarkId], gates: &[Gate], t: &[f64]) -> bool {
        let frames = self.chain_frames(source.frame(), crossings);
        for (i, w) in gates.windows(2).enumerate() {
            let (frame, off) = frames[i];
            let p = w[0].a + w[0].h.scale(t[i]) - off;
            let q = w[1].a + w[1].h.scale(t[i + 1]) - off;
            let entered = i.checked_sub(1).and_then(|j| self.partner(crossings[j]));
            let leaving = crossings.get(i).copied();
            for m in self.glued_marks_in(frame) {
                if Some(m.id) == entered || Some(m.id) == leaving {
                    continue;
                }
                if segments_cross(p, q - p, m.start, m.holonomy) {
                    return false;
                }
            }
            let sheet = &self.sheets[frame.sheet];
            if sheet.is_cover() {
                let reach = p.norm().max(q.norm()) + 1.0;
                if segments_cross(p, q - p, Vec2::ZERO, sheet.cut_direction().scale(reach)) {
                    return false;
                }
            }
        }
        true
    }

    /// Length of the shortest path found from `from` to `to`, among paths
    /// no longer than `cap`.
    pub fn shortest_path(&self, from: &[Locus], to: &[Locus], cap: f64) -> Distance {
        let mut heap = BinaryHeap::new();
        for (i, _) in from.iter().enumerate() {
            heap.push(State {
                cost: 0.0,
                source: i,
                crossings: Vec::new(),
            });
        }
        let mut best: Option<(f64, Vec<MarkId>)> = None;
        let mut expansions = 0;
        while let Some(state) = heap.pop() {
            let bound = best.as_ref().map_or(cap, |b| b.0.min(cap));
            if state.cost > bound || expansions > MAX_EXPANSIONS {
                break;
            }
            expansions += 1;
            let source = &from[state.source];
            let frames = self.chain_frames(source.frame(), &state.crossings);
            let (frame, _) = *frames.last().expect("nonempty");

            for target in to.iter().filter(|t| t.frame() == frame) {
                let gates = self.gates(source, &state.crossings, Some(target));
                let (len, t) = solve_chain(&gates);
                let current = best.as_ref().map_or(cap, |b| b.0.min(cap));
                if len <= current && self.legs_valid(source, &state.crossings, &gates, &t) {
                    best = Some((len, state.crossings.clone()));
                }
            }

            let came_through = state.crossings.last().and_then(|&m| self.partner(m));
            let next: Vec<MarkId> = self
                .glued_marks_in(frame)
                .map(|m| m.id)
                .filter(|&m| Some(m) != came_through)
                .collect();
            for m in next {
                let mut crossings = state.crossings.clone();
                crossings.push(m);
                let gates = self.gates(source, &crossings, None);
                let (cost, _) = solve_chain(&gates);
                let current = best.as_ref().map_or(cap, |b| b.0.min(cap));
                if cost <= current {
                    heap.push(State {
                        cost,
                        source: state.source,
                        crossings,
                    });
                }
            }
        }
        match best {
            Some((length, crossings)) => Distance::Found { length, crossings },
            None => Distance::NoPathWithinCap,
        }
    }

    /// Length of the best path through a given crossing sequence.
    pub fn chain_distance(&self, from: &Locus, crossings: &[MarkId], to: &Locus) -> f64 {
        solve_chain(&self.gates(from, crossings, Some(to))).0
    }
}
