//! Numerical tolerances shared by the whole crate.

use std::sync::OnceLock;

/// Tolerance for matrix predicates (`in_U`, `in_P`, group-element equality).
pub const EPS_MAT: f64 = 1e-12;

/// Default geometric tolerance for incidence and equal-slope tests.
pub const DEFAULT_EPS_GEOM: f64 = 1e-9;

static EPS_GEOM: OnceLock<f64> = OnceLock::new();

/// Geometric tolerance in effect. Fixed on first use.
pub fn eps_geom() -> f64 {
    *EPS_GEOM.get_or_init(|| DEFAULT_EPS_GEOM)
}

/// Overrides the geometric tolerance. Returns `false` if it was already
/// fixed (by an earlier call or by a geometric query).
pub fn set_eps_geom(eps: f64) -> bool {
    eps.is_finite() && eps > 0.0 && EPS_GEOM.set(eps).is_ok()
}
