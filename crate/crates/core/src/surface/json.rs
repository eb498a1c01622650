//! Surface files: schema `flatsurf/1`, canonical key order, floats with
//! 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{ConstructionInfo, CoverOrder, SheetKind, Surface, SurfaceError};
use crate::algebra::{Mat2, Vec2};
use crate::constructions::GroupSpec;

pub const SCHEMA: &str = "flatsurf/1";

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("invalid surface: {0}")]
    Surface(#[from] SurfaceError),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SheetDto {
    id: usize,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    branch_window: Option<u32>,
    chart: Mat2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<Mat2>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkDto {
    id: usize,
    sheet: usize,
    branch: i64,
    start: Vec2,
    holonomy: Vec2,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyDto {
    #[serde(rename = "markIds")]
    mark_ids: Vec<usize>,
    truncated_infinite: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    boundary: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstructionDto {
    name: String,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<GroupSpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceDto {
    schema: String,
    sheets: Vec<SheetDto>,
    marks: Vec<MarkDto>,
    slits: Vec<[usize; 2]>,
    families: BTreeMap<String, FamilyDto>,
    window_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    construction: Option<ConstructionDto>,
}

impl Surface {
    fn to_dto(&self) -> SurfaceDto {
        let sheets = self
            .sheets
            .iter()
            .map(|s| {
                let (kind, order, branch_window) = match s.kind {
                    SheetKind::Plane => ("plane", None, None),
                    SheetKind::CyclicCover { order } => ("cyclic_cover", Some(order), None),
                    SheetKind::TruncatedInfiniteCover { branch_window } => {
                        ("truncated_infinite_cover", None, Some(branch_window))
                    }
                };
                SheetDto {
                    id: s.id,
                    kind: kind.to_owned(),
                    order,
                    branch_window,
                    chart: s.chart,
                    label: s.label.clone(),
                    group: s.group,
                }
            })
            .collect();
        let marks = self
            .marks
            .iter()
            .map(|m| MarkDto {
                id: m.id,
                sheet: m.sheet,
                branch: m.branch,
                start: m.start,
                holonomy: m.holonomy,
            })
            .collect();
        SurfaceDto {
            schema: SCHEMA.to_owned(),
            sheets,
            marks,
            slits: self.slits.iter().map(|p| [p.first, p.second]).collect(),
            families: self
                .families
                .iter()
                .map(|(k, f)| {
                    (
                        k.clone(),
                        FamilyDto {
                            mark_ids: f.mark_ids.clone(),
                            truncated_infinite: f.truncated_infinite,
                            boundary: f.boundary,
                        },
                    )
                })
                .collect(),
            window_radius: self.window_radius,
            construction: self.construction.as_ref().map(|c| ConstructionDto {
                name: c.name.clone(),
                n: c.n,
                l: c.l,
                group: c.group.clone(),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self.to_dto()).expect("surface serializes");
        canonical(&value)
    }

    pub fn from_json(text: &str) -> Result<Surface, JsonError> {
        let dto: SurfaceDto = serde_json::from_str(text)?;
        if dto.schema != SCHEMA {
            return Err(JsonError::Schema(format!("unsupported schema {:?}", dto.schema)));
        }
        if !dto.window_radius.is_finite() || dto.window_radius <= 0.0 {
            return Err(JsonError::Schema("window_radius must be positive".into()));
        }
        let mut s = Surface::new(dto.window_radius);
        for (i, sh) in dto.sheets.iter().enumerate() {
            if sh.id != i {
                return Err(JsonError::Schema(format!("sheet {i} has id {}", sh.id)));
            }
            let label = sh.label.as_deref();
            let id = match (sh.kind.as_str(), sh.order, sh.branch_window) {
                ("plane", None, None) => s.add_plane(sh.chart, label)?,
                ("cyclic_cover", Some(k), None) => s.add_cyclic_cover(CoverOrder::Finite(k), sh.chart, label)?,
                ("truncated_infinite_cover", None, Some(b)) => {
                    s.add_cyclic_cover(CoverOrder::TruncatedInfinite(b), sh.chart, label)?
                }
                (kind, _, _) => return Err(JsonError::Schema(format!("sheet {i}: bad kind {kind:?} or parameters"))),
            };
            if let Some(g) = sh.group {
                s.set_group(id, g)?;
            }
        }
        for (i, m) in dto.marks.iter().enumerate() {
            if m.id != i {
                return Err(JsonError::Schema(format!("mark {i} has id {}", m.id)));
            }
            s.add_mark(m.sheet, m.branch, m.start, m.holonomy)?;
            if s.marks[i].branch != m.branch {
                return Err(JsonError::Schema(format!(
                    "mark {i}: non-canonical branch {}",
                    m.branch
                )));
            }
        }
        for [a, b] in dto.slits {
            s.reglue(a, b)?;
        }
        for (name, f) in dto.families {
            if let Some(&bad) = f.mark_ids.iter().find(|&&m| m >= s.marks.len()) {
                return Err(SurfaceError::UnknownMark(bad).into());
            }
            s.add_family(&name, f.mark_ids, f.truncated_infinite);
            if f.boundary {
                s.set_boundary(&name);
            }
        }
        s.construction = dto.construction.map(|c| ConstructionInfo {
            name: c.name,
            n: c.n,
            l: c.l,
            group: c.group,
        });
        Ok(s)
    }
}

/// Compact JSON with sorted keys and every float written as `{:.16e}`.
pub fn canonical(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                let _ = write!(out, "{:.16e}", n.as_f64().unwrap_or(f64::NAN));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, x);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<_> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push(':');
                write_value(out, &map[k]);
            }
            out.push('}');
        }
    }
}
