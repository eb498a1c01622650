//! Segment predicates in a single chart.

use crate::algebra::Vec2;

/// Distance from `p` to the closed segment `[a, a + h]`.
pub fn point_segment_distance(p: Vec2, a: Vec2, h: Vec2) -> f64 {
    let len2 = h.norm_sq();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(h) / len2).clamp(0.0, 1.0);
    (p - (a + h.scale(t))).norm()
}

/// Distance between the closed segments `[a, a + h]` and `[b, b + k]`.
pub fn segment_distance(a: Vec2, h: Vec2, b: Vec2, k: Vec2) -> f64 {
    if segments_cross(a, h, b, k) {
        return 0.0;
    }
    point_segment_distance(a, b, k)
        .min(point_segment_distance(a + h, b, k))
        .min(point_segment_distance(b, a, h))
        .min(point_segment_distance(b + k, a, h))
}

/// Proper (transversal, interior) crossing of two segments.
pub fn segments_cross(a: Vec2, h: Vec2, b: Vec2, k: Vec2) -> bool {
    let denom = h.cross(k);
    if denom == 0.0 {
        return false;
    }
    let d = b - a;
    let s = d.cross(k) / denom;
    let t = d.cross(h) / denom;
    s > 0.0 && s < 1.0 && t > 0.0 && t < 1.0
}

/// Ray `p + s d` against segment `[a, a + h]`: returns `(s, t)` of the
/// transversal intersection, or `None` when parallel.
pub fn ray_segment(p: Vec2, d: Vec2, a: Vec2, h: Vec2) -> Option<(f64, f64)> {
    let denom = d.cross(h);
    if denom.abs() <= 1e-12 * h.norm() * d.norm() {
        return None;
    }
    let w = a - p;
    let s = w.cross(h) / denom;
    let t = w.cross(d) / denom;
    Some((s, t))
}

/// Reduces `theta` into `[base, base + 2 pi)`.
pub fn angle_from(base: f64, theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut x = (theta - base) % tau;
    if x < 0.0 {
        x += tau;
    }
    base + x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_and_distance() {
        let a = Vec2::new(0.0, 0.0);
        let h = Vec2::new(2.0, 0.0);
        assert!(segments_cross(a, h, Vec2::new(1.0, -1.0), Vec2::new(0.0, 2.0)));
        assert!(!segments_cross(a, h, Vec2::new(3.0, -1.0), Vec2::new(0.0, 2.0)));
        assert_eq!(segment_distance(a, h, Vec2::new(3.0, -1.0), Vec2::new(0.0, 2.0)), 1.0);
        assert_eq!(segment_distance(a, h, Vec2::new(0.5, 1.0), Vec2::new(1.0, 0.0)), 1.0);
        assert_eq!(point_segment_distance(Vec2::new(-3.0, 4.0), a, h), 5.0);
    }

    #[test]
    fn ray_hits() {
        let (s, t) = ray_segment(Vec2::new(1.5, -1.0), Vec2::F, Vec2::new(1.0, 0.0), Vec2::E).unwrap();
        assert!((s - 1.0).abs() < 1e-15 && (t - 0.5).abs() < 1e-15);
        assert!(ray_segment(Vec2::ZERO, Vec2::E, Vec2::new(1.0, 0.0), Vec2::E).is_none());
    }

    #[test]
    fn angle_reduction() {
        let tau = std::f64::consts::TAU;
        assert!((angle_from(0.0, -0.5) - (tau - 0.5)).abs() < 1e-15);
        assert!((angle_from(1.0, 1.0 + 3.0 * tau + 0.25) - 1.25).abs() < 1e-12);
    }
}
