//! Plane vectors, 2x2 real matrices and the matrix-set predicates used by
//! the constructions: the contracting set `U` and the parabolic groups `P`
//! and `P'`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::tolerance::EPS_MAT;

/// A vector in the plane. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };
    /// Horizontal base vector `e`.
    pub const E: Vec2 = Vec2 { x: 1.0, y: 0.0 };
    /// Vertical base vector `f`.
    pub const F: Vec2 = Vec2 { x: 0.0, y: 1.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Vec2::new(c, s)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3d cross product; positive when `o` lies to the
    /// left of `self`.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Angle in `(-pi, pi]`.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }

    pub fn normalized(self) -> Vec2 {
        self.scale(1.0 / self.norm())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn approx_eq(self, o: Vec2, eps: f64) -> bool {
        (self - o).norm() <= eps
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v.scale(self)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A row-major 2x2 matrix `[[a, b], [c, d]]`. Serialized as nested arrays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Default for Mat2 {
    fn default() -> Self {
        Mat2::IDENTITY
    }
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub const fn diag(x: f64, y: f64) -> Self {
        Mat2::new(x, 0.0, 0.0, y)
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    /// Inverse, or `None` for a singular matrix.
    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    /// Columns `g(e)` and `g(f)`.
    pub fn columns(&self) -> (Vec2, Vec2) {
        (Vec2::new(self.a, self.c), Vec2::new(self.b, self.d))
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Membership in `GL+(2, R)`.
    pub fn is_orientation_preserving(&self) -> bool {
        self.is_finite() && self.det() > 0.0
    }

    /// Entrywise comparison, relative to the entry size when it exceeds one.
    pub fn approx_eq(&self, o: &Mat2, eps: f64) -> bool {
        let close = |x: f64, y: f64| (x - y).abs() <= eps * x.abs().max(y.abs()).max(1.0);
        close(self.a, o.a) && close(self.b, o.b) && close(self.c, o.c) && close(self.d, o.d)
    }

    /// Largest singular value, via the split into conformal and
    /// anticonformal parts (stable near rotations, unlike the eigenvalues
    /// of `gᵀg`).
    pub fn operator_norm(&self) -> f64 {
        let conformal = (self.a + self.d).hypot(self.c - self.b);
        let anti = (self.a - self.d).hypot(self.b + self.c);
        0.5 * (conformal + anti)
    }

    /// Membership in `U`: strictly contracting every nonzero vector. The
    /// boundary `||g|| = 1` is excluded.
    pub fn in_u(&self) -> bool {
        self.operator_norm() < 1.0 - EPS_MAT
    }

    /// Membership in `P = {[[1, t], [0, s]] : s > 0}`.
    pub fn in_p(&self) -> bool {
        (self.a - 1.0).abs() <= EPS_MAT && self.c.abs() <= EPS_MAT && self.d > EPS_MAT && self.b.is_finite()
    }

    /// Membership in `P'`, the group generated by `P` and `-Id`.
    pub fn in_p_prime(&self) -> bool {
        self.in_p() || (-*self).in_p()
    }

    /// `min_{|s| <= 1} |g(f + s e)|`, minimizing the quadratic in `s` in
    /// closed form.
    pub fn min_shear_image(&self) -> f64 {
        let (ge, gf) = self.columns();
        let qa = ge.norm_sq();
        let qb = ge.dot(gf);
        let s = if qa > 0.0 { (-qb / qa).clamp(-1.0, 1.0) } else { 0.0 };
        (gf + ge.scale(s)).norm()
    }
}

impl From<[[f64; 2]; 2]> for Mat2 {
    fn from(m: [[f64; 2]; 2]) -> Self {
        Mat2::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl From<Mat2> for [[f64; 2]; 2] {
    fn from(m: Mat2) -> Self {
        [[m.a, m.b], [m.c, m.d]]
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        self.apply(v)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}
