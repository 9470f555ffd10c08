//! Four-dimensional vector algebra: inner products, 4x4 determinants and
//! the triple wedge product that completes a tangent frame to a normal.

use std::ops::{Add, Mul, Neg, Sub};

/// A point or tangent vector of the ambient space of the 3-sphere.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct Vec4 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
}

impl Vec4 {
    pub const ZERO: Vec4 = Vec4 {
        x1: 0.0,
        x2: 0.0,
        x3: 0.0,
        x4: 0.0,
    };

    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Vec4 { x1, x2, x3, x4 }
    }

    /// Canonical inner product of the ambient space.
    pub fn dot(self, rhs: Vec4) -> f64 {
        self.x1 * rhs.x1 + self.x2 * rhs.x2 + self.x3 * rhs.x3 + self.x4 * rhs.x4
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Unit vector in the same direction. The callers only normalize
    /// vectors that are bounded away from zero.
    pub fn normalized(self) -> Vec4 {
        self * (1.0 / self.norm())
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite() && self.x4.is_finite()
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.x3, self.x4]
    }
}

impl From<[f64; 4]> for Vec4 {
    fn from(a: [f64; 4]) -> Self {
        Vec4::new(a[0], a[1], a[2], a[3])
    }
}

impl Add for Vec4 {
    type Output = Vec4;
    fn add(self, rhs: Vec4) -> Vec4 {
        Vec4::new(
            self.x1 + rhs.x1,
            self.x2 + rhs.x2,
            self.x3 + rhs.x3,
            self.x4 + rhs.x4,
        )
    }
}

impl Sub for Vec4 {
    type Output = Vec4;
    fn sub(self, rhs: Vec4) -> Vec4 {
        Vec4::new(
            self.x1 - rhs.x1,
            self.x2 - rhs.x2,
            self.x3 - rhs.x3,
            self.x4 - rhs.x4,
        )
    }
}

impl Neg for Vec4 {
    type Output = Vec4;
    fn neg(self) -> Vec4 {
        Vec4::new(-self.x1, -self.x2, -self.x3, -self.x4)
    }
}

impl Mul<f64> for Vec4 {
    type Output = Vec4;
    fn mul(self, s: f64) -> Vec4 {
        Vec4::new(self.x1 * s, self.x2 * s, self.x3 * s, self.x4 * s)
    }
}

/// Determinant of the 4x4 matrix with columns `a`, `b`, `c`, `d`.
///
/// Computed by Laplace expansion over complementary 2x2 minors of the
/// (a, b) and (c, d) column pairs; alternating and multilinear by
/// construction, no pivoting.
pub fn det4(a: Vec4, b: Vec4, c: Vec4, d: Vec4) -> f64 {
    let s12 = a.x1 * b.x2 - a.x2 * b.x1;
    let s13 = a.x1 * b.x3 - a.x3 * b.x1;
    let s14 = a.x1 * b.x4 - a.x4 * b.x1;
    let s23 = a.x2 * b.x3 - a.x3 * b.x2;
    let s24 = a.x2 * b.x4 - a.x4 * b.x2;
    let s34 = a.x3 * b.x4 - a.x4 * b.x3;

    let t12 = c.x1 * d.x2 - c.x2 * d.x1;
    let t13 = c.x1 * d.x3 - c.x3 * d.x1;
    let t14 = c.x1 * d.x4 - c.x4 * d.x1;
    let t23 = c.x2 * d.x3 - c.x3 * d.x2;
    let t24 = c.x2 * d.x4 - c.x4 * d.x2;
    let t34 = c.x3 * d.x4 - c.x4 * d.x3;

    s12 * t34 - s13 * t24 + s14 * t23 + s23 * t14 - s24 * t13 + s34 * t12
}

/// Triple wedge product: the unique vector `w` with
/// `w.dot(x) == det4(x, a, b, c)` for every `x`.
///
/// `w` is orthogonal to `a`, `b` and `c` and alternating in its arguments.
/// The probe slot comes first in the defining determinant; this is the
/// orientation under which the wedge of the Clifford tangent frame equals
/// the conventional outward co-frame vector (see `surface::clifford_normal`).
///
/// Computed by cofactor expansion: four 3x3 minors with alternating signs.
pub fn wedge3(a: Vec4, b: Vec4, c: Vec4) -> Vec4 {
    // 3x3 determinant of the rows (p, q, r) of the column matrix [a b c].
    let minor = |p: &[f64; 4], q: &[f64; 4], r: &[f64; 4], i: usize, j: usize, k: usize| {
        p[i] * (q[j] * r[k] - q[k] * r[j]) - q[i] * (p[j] * r[k] - p[k] * r[j])
            + r[i] * (p[j] * q[k] - p[k] * q[j])
    };
    let (a, b, c) = (a.to_array(), b.to_array(), c.to_array());
    Vec4::new(
        minor(&a, &b, &c, 1, 2, 3),
        -minor(&a, &b, &c, 0, 2, 3),
        minor(&a, &b, &c, 0, 1, 3),
        -minor(&a, &b, &c, 0, 1, 2),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const E1: Vec4 = Vec4::new(1.0, 0.0, 0.0, 0.0);
    const E2: Vec4 = Vec4::new(0.0, 1.0, 0.0, 0.0);
    const E3: Vec4 = Vec4::new(0.0, 0.0, 1.0, 0.0);
    const E4: Vec4 = Vec4::new(0.0, 0.0, 0.0, 1.0);

    #[test]
    fn dot_basis() {
        assert_eq!(E1.dot(E1), 1.0);
        assert_eq!(E1.dot(E2), 0.0);
    }

    #[test]
    fn det_identity_and_alternation() {
        assert_eq!(det4(E1, E2, E3, E4), 1.0);
        assert_eq!(det4(E1, E1, E3, E4), 0.0);
        assert_eq!(det4(E2, E1, E3, E4), -1.0);
    }

    #[test]
    fn wedge_defining_identity_on_basis() {
        // dot(w, x) = det4(x, a, b, c): completing (e2, e3, e4) gives e1,
        // completing (e1, e2, e3) gives -e4 (three column transpositions).
        assert_eq!(wedge3(E2, E3, E4), E1);
        assert_eq!(wedge3(E1, E2, E3), -E4);
        assert_eq!(wedge3(E1, E2, E2), Vec4::ZERO);
    }

    #[test]
    fn wedge_matches_probe_determinant() {
        let a = Vec4::new(0.3, -1.2, 0.7, 2.2);
        let b = Vec4::new(1.9, 0.4, -0.6, 0.1);
        let c = Vec4::new(-0.8, 0.9, 1.4, -1.1);
        let w = wedge3(a, b, c);
        for x in [E1, E2, E3, E4, a + b * 0.5, Vec4::new(0.2, 0.4, -1.0, 3.0)] {
            assert_abs_diff_eq!(w.dot(x), det4(x, a, b, c), epsilon = 1e-12);
        }
        // orthogonality to the arguments
        assert_abs_diff_eq!(w.dot(a), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.dot(b), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.dot(c), 0.0, epsilon = 1e-12);
    }
}
