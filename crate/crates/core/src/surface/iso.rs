//! Isomorphism of surface descriptions up to one translation per sheet.

use serde::Serialize;

use super::{MarkId, Sheet, SheetId, Surface};
use crate::algebra::Vec2;
use crate::tolerance::eps_geom;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IsoOptions {
    /// Require equal sheet labels and group tags.
    pub respect_labels: bool,
    /// Require every sheet translation to vanish.
    pub fixed_origins: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SheetMatch {
    pub from: SheetId,
    pub to: SheetId,
    pub translation: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matching {
    pub sheets: Vec<SheetMatch>,
    /// Mark correspondence, indexed by mark id of the first surface.
    pub marks: Vec<MarkId>,
}

struct Candidate {
    to: SheetId,
    translation: Vec2,
    marks: Vec<(MarkId, MarkId)>,
}

impl Surface {
    fn sheets_compatible(&self, a: &Sheet, other: &Surface, b: &Sheet, opts: IsoOptions) -> bool {
        if a.kind != b.kind {
            return false;
        }
        if a.is_cover() && !a.cut_direction().approx_eq(b.cut_direction(), 1e-9) {
            return false;
        }
        if opts.respect_labels {
            if a.label != b.label {
                return false;
            }
            match (a.group, b.group) {
                (None, None) => {}
                (Some(g), Some(h)) if g.approx_eq(&h, 1e-9) => {}
                _ => return false,
            }
        }
        let count = |s: &Surface, id| s.marks.iter().filter(|m| m.sheet == id).count();
        count(self, a.id) == count(other, b.id)
    }

    fn sheet_candidates(&self, x: &Sheet, other: &Surface, opts: IsoOptions) -> Vec<Candidate> {
        let eps = eps_geom();
        let xs: Vec<_> = self.marks.iter().filter(|m| m.sheet == x.id).collect();
        let mut out = Vec::new();
        for y in other
            .sheets
            .iter()
            .filter(|y| self.sheets_compatible(x, other, y, opts))
        {
            let ys: Vec<_> = other.marks.iter().filter(|m| m.sheet == y.id).collect();
            let Some(x0) = xs.first() else {
                out.push(Candidate {
                    to: y.id,
                    translation: Vec2::ZERO,
                    marks: Vec::new(),
                });
                continue;
            };
            // A mark matches its reversal: reversing both marks of a pair
            // describes the same gluing.
            let seeds = ys.iter().filter_map(|y0| {
                if y0.branch != x0.branch {
                    None
                } else if y0.holonomy.approx_eq(x0.holonomy, eps) {
                    Some(y0.start - x0.start)
                } else if y0.holonomy.approx_eq(-x0.holonomy, eps) {
                    Some(y0.start - x0.end())
                } else {
                    None
                }
            });
            for tau in seeds {
                if (x.is_cover() || opts.fixed_origins) && tau.norm() > eps {
                    continue;
                }
                let mut used = vec![false; ys.len()];
                let mut pairs = Vec::with_capacity(xs.len());
                for xm in &xs {
                    let hit = ys.iter().enumerate().position(|(j, ym)| {
                        !used[j]
                            && ym.branch == xm.branch
                            && ((ym.start.approx_eq(xm.start + tau, eps) && ym.holonomy.approx_eq(xm.holonomy, eps))
                                || (ym.start.approx_eq(xm.end() + tau, eps)
                                    && ym.holonomy.approx_eq(-xm.holonomy, eps)))
                    });
                    match hit {
                        Some(j) => {
                            used[j] = true;
                            pairs.push((xm.id, ys[j].id));
                        }
                        None => break,
                    }
                }
                if pairs.len() == xs.len() {
                    out.push(Candidate {
                        to: y.id,
                        translation: tau,
                        marks: pairs,
                    });
                }
            }
        }
        out
    }

    /// A sheet bijection with per-sheet translations carrying marks to
    /// marks and slit pairs to slit pairs, if one exists.
    pub fn is_isomorphic(&self, other: &Surface, opts: IsoOptions) -> Option<Matching> {
        if self.sheets.len() != other.sheets.len()
            || self.marks.len() != other.marks.len()
            || self.slits.len() != other.slits.len()
        {
            return None;
        }
        let cands: Vec<Vec<Candidate>> = self
            .sheets
            .iter()
            .map(|x| self.sheet_candidates(x, other, opts))
            .collect();
        let mut order: Vec<SheetId> = (0..self.sheets.len()).collect();
        order.sort_by_key(|&i| cands[i].len());

        let mut mark_map: Vec<Option<MarkId>> = vec![None; self.marks.len()];
        let mut chosen: Vec<Option<usize>> = vec![None; self.sheets.len()];
        let mut used = vec![false; other.sheets.len()];
        if self.assign(other, &cands, &order, 0, &mut chosen, &mut used, &mut mark_map) {
            let sheets = (0..self.sheets.len())
                .map(|i| {
                    let c = &cands[i][chosen[i].expect("assigned")];
                    SheetMatch {
                        from: i,
                        to: c.to,
                        translation: c.translation,
                    }
                })
                .collect();
            Some(Matching {
                sheets,
                marks: mark_map.into_iter().map(|m| m.expect("assigned")).collect(),
            })
        } else {
            None
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn assign(
        &self,
        other: &Surface,
        cands: &[Vec<Candidate>],
        order: &[SheetId],
        depth: usize,
        chosen: &mut [Option<usize>],
        used: &mut [bool],
        mark_map: &mut [Option<MarkId>],
    ) -> bool {
        let Some(&x) = order.get(depth) else { return true };
        for (ci, c) in cands[x].iter().enumerate() {
            if used[c.to] {
                continue;
            }
            for &(a, b) in &c.marks {
                mark_map[a] = Some(b);
            }
            if self.gluing_consistent(other, &c.marks, mark_map) {
                used[c.to] = true;
                chosen[x] = Some(ci);
                if self.assign(other, cands, order, depth + 1, chosen, used, mark_map) {
                    return true;
                }
                used[c.to] = false;
                chosen[x] = None;
            }
            for &(a, _) in &c.marks {
                mark_map[a] = None;
            }
        }
        false
    }

    fn gluing_consistent(&self, other: &Surface, new: &[(MarkId, MarkId)], mark_map: &[Option<MarkId>]) -> bool {
        new.iter().all(|&(a, b)| match (self.partner(a), other.partner(b)) {
            (None, None) => true,
            (Some(pa), Some(pb)) => mark_map[pa].is_none_or(|m| m == pb),
            _ => false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Mat2;

    fn fixture() -> Surface {
        let mut s = Surface::new(50.0);
        let a = s.add_plane(Mat2::IDENTITY, Some("A")).unwrap();
        let b = s.add_plane(Mat2::IDENTITY, Some("B")).unwrap();
        for n in 0..3 {
            let x = Vec2::new(3.0 * n as f64, n as f64);
            let m = s.add_mark(a, 0, x, Vec2::E).unwrap();
            let m2 = s.add_mark(b, 0, x + Vec2::new(0.0, 2.0), Vec2::E).unwrap();
            s.reglue(m, m2).unwrap();
        }
        s
    }

    #[test]
    fn reflexive() {
        let s = fixture();
        let m = s.is_isomorphic(&s, IsoOptions::default()).unwrap();
        assert!(m
            .sheets
            .iter()
            .all(|sm| sm.from == sm.to && sm.translation == Vec2::ZERO));
    }

    #[test]
    fn translated_sheet() {
        let s = fixture();
        let mut t = Surface::new(50.0);
        t.add_plane(Mat2::IDENTITY, Some("A")).unwrap();
        t.add_plane(Mat2::IDENTITY, Some("B")).unwrap();
        let shift = Vec2::new(5.0, 7.0);
        for m in s.marks() {
            let off = if m.sheet == 1 { shift } else { Vec2::ZERO };
            t.add_mark(m.sheet, 0, m.start + off, m.holonomy).unwrap();
        }
        for p in s.slits() {
            t.reglue(p.first, p.second).unwrap();
        }
        let m = s
            .is_isomorphic(
                &t,
                IsoOptions {
                    respect_labels: true,
                    ..Default::default()
                },
            )
            .unwrap();
        assert!(m.sheets[1].translation.approx_eq(shift, 1e-12));
        assert!(t
            .is_isomorphic(
                &s,
                IsoOptions {
                    respect_labels: true,
                    ..Default::default()
                }
            )
            .is_some());
    }

    #[test]
    fn missing_slit_detected() {
        let s = fixture();
        assert!(s.is_isomorphic(&s.without_slit(1), IsoOptions::default()).is_none());
    }

    #[test]
    fn crossed_gluing_detected() {
        let s = fixture();
        let mut t = Surface::new(50.0);
        t.add_plane(Mat2::IDENTITY, Some("A")).unwrap();
        t.add_plane(Mat2::IDENTITY, Some("B")).unwrap();
        for m in s.marks() {
            t.add_mark(m.sheet, 0, m.start, m.holonomy).unwrap();
        }
        t.reglue(0, 3).unwrap();
        t.reglue(2, 1).unwrap();
        t.reglue(4, 5).unwrap();
        assert!(s.is_isomorphic(&t, IsoOptions::default()).is_none());
    }

    #[test]
    fn reversed_pair_matches() {
        let s = fixture();
        let mut t = Surface::new(50.0);
        t.add_plane(Mat2::IDENTITY, Some("A")).unwrap();
        t.add_plane(Mat2::IDENTITY, Some("B")).unwrap();
        for m in s.marks() {
            t.add_mark(m.sheet, 0, m.end(), -m.holonomy).unwrap();
        }
        for p in s.slits() {
            t.reglue(p.first, p.second).unwrap();
        }
        assert!(s.is_isomorphic(&t, IsoOptions::default()).is_some());
    }
}
