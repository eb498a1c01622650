//! SVG diagram: one pane per sheet branch, marks as slits colored by pair,
//! singularities as dots labeled by angle / 2π.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use flatsurf::algebra::Vec2;
use flatsurf::surface::{Frame, SheetKind, Surface};

const MARGIN: f64 = 24.0;
const MAX_BRANCH_PANES: i64 = 3;

fn pair_color(k: usize) -> String {
    let hue = (k as f64 * 137.508) % 360.0;
    format!("hsl({hue:.1},70%,42%)")
}

fn branches(kind: SheetKind) -> Vec<i64> {
    match kind {
        SheetKind::Plane => vec![0],
        SheetKind::CyclicCover { order } => (0..order as i64).collect(),
        SheetKind::TruncatedInfiniteCover { branch_window } => {
            let b = (branch_window as i64).min(MAX_BRANCH_PANES);
            (-b..=b).collect()
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(s: &Surface, extent: f64, size: f64) -> String {
    let scale = size / (2.0 * extent);
    let to_px = |p: Vec2| (size / 2.0 + p.x * scale, size / 2.0 - p.y * scale);
    let rows: Vec<Vec<i64>> = s.sheets().iter().map(|sh| branches(sh.kind)).collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(1);
    let width = MARGIN + cols as f64 * (size + MARGIN);
    let height = MARGIN + rows.len() as f64 * (size + 2.0 * MARGIN);

    let mut pair_of = vec![None; s.marks().len()];
    for (k, p) in s.slits().iter().enumerate() {
        pair_of[p.first] = Some(k);
        pair_of[p.second] = Some(k);
    }
    let mut dots: Vec<(Frame, Vec2, String)> = Vec::new();
    for sing in s.singularities() {
        let (Ok((frame, pos)), Ok(rec)) = (s.singularity_location(sing), s.cone_record(sing)) else {
            continue;
        };
        let label = if rec.angle.is_finite() {
            format!("{}", (rec.angle / TAU).round())
        } else {
            "inf".into()
        };
        dots.push((frame, pos, label));
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    for (sheet, branch_list) in s.sheets().iter().zip(&rows) {
        let top = MARGIN + sheet.id as f64 * (size + 2.0 * MARGIN);
        let title = match &sheet.label {
            Some(l) => format!("sheet {} ({})", sheet.id, escape(l)),
            None => format!("sheet {}", sheet.id),
        };
        let _ = writeln!(out, r#"<g id="sheet-{}" transform="translate(0,{top:.1})">"#, sheet.id);
        let _ = writeln!(out, r#"<text x="{MARGIN}" y="12">{title}</text>"#);
        for (col, &branch) in branch_list.iter().enumerate() {
            let left = MARGIN + col as f64 * (size + MARGIN);
            let frame = Frame {
                sheet: sheet.id,
                branch,
            };
            let _ = writeln!(
                out,
                r##"<rect x="{left:.1}" y="{MARGIN}" width="{size:.1}" height="{size:.1}" fill="#fafafa" stroke="#999"/>"##
            );
            if sheet.is_cover() {
                let _ = writeln!(
                    out,
                    r#"<text x="{:.1}" y="{:.1}">branch {branch}</text>"#,
                    left + 4.0,
                    MARGIN + 14.0
                );
                let (cx, cy) = to_px(Vec2::ZERO);
                let (ex, ey) = to_px(-sheet.cut_direction().scale(extent));
                let _ = writeln!(
                    out,
                    r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbb" stroke-dasharray="4 3"/>"##,
                    left + cx,
                    MARGIN + cy,
                    left + ex,
                    MARGIN + ey
                );
            }
            for m in s.marks().iter().filter(|m| m.sheet == sheet.id && m.branch == branch) {
                let (x1, y1) = to_px(m.start);
                let (x2, y2) = to_px(m.end());
                let color = pair_of[m.id].map(pair_color).unwrap_or_else(|| "#888".into());
                let dash = if pair_of[m.id].is_none() {
                    r#" stroke-dasharray="2 2""#
                } else {
                    ""
                };
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"{dash}><title>mark {}</title></line>"#,
                    left + x1,
                    MARGIN + y1,
                    left + x2,
                    MARGIN + y2,
                    m.id
                );
            }
            for (_, pos, label) in dots.iter().filter(|(f, _, _)| *f == frame) {
                let (x, y) = to_px(*pos);
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="black"/><text x="{:.2}" y="{:.2}" font-size="9">{label}</text>"#,
                    left + x,
                    MARGIN + y,
                    left + x + 3.0,
                    MARGIN + y - 3.0
                );
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
