//! Fixed-size 2D vectors and 2×2 matrices with the closed-form kernels
//! (polar factor, singular values, distance to SO(2)) the rest of the
//! crate is built on.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Vec2<T> {
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    /// Counter-clockwise quarter turn `(x, y) ↦ (−y, x)`.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Outer product `self ⊗ other`.
    pub fn outer(self, other: Self) -> Mat2<T> {
        Mat2::new(
            self.x * other.x,
            self.x * other.y,
            self.y * other.x,
            self.y * other.y,
        )
    }

    pub fn to_array(self) -> [T; 2] {
        [self.x, self.y]
    }
}

impl<T: Scalar> From<[T; 2]> for Vec2<T> {
    fn from(a: [T; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> AddAssign for Vec2<T> {
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<T: Scalar + Serialize> Serialize for Vec2<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(s)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for Vec2<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y] = <[T; 2]>::deserialize(d)?;
        Ok(Self::new(x, y))
    }
}

/// Row-major 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Scalar> Mat2<T> {
    pub const fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { a, b, c, d }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn diag(p: T, q: T) -> Self {
        Self::new(p, T::zero(), T::zero(), q)
    }

    /// Counter-clockwise rotation by `theta`.
    pub fn rotation(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, -s, s, c)
    }

    /// Skew matrix `[[0, −a], [a, 0]]`, i.e. the generator of
    /// counter-clockwise rotations scaled by `a`.
    pub fn skew(a: T) -> Self {
        Self::new(T::zero(), -a, a, T::zero())
    }

    /// Columns given as vectors.
    pub fn from_cols(c0: Vec2<T>, c1: Vec2<T>) -> Self {
        Self::new(c0.x, c1.x, c0.y, c1.y)
    }

    pub fn col(&self, j: usize) -> Vec2<T> {
        match j {
            0 => Vec2::new(self.a, self.c),
            _ => Vec2::new(self.b, self.d),
        }
    }

    pub fn transpose(self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    pub fn det(self) -> T {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(self) -> T {
        self.a + self.d
    }

    pub fn norm_sq(self) -> T {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn apply(self, v: Vec2<T>) -> Vec2<T> {
        Vec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    /// Cofactor matrix `det(M)·M⁻ᵀ`, defined for singular `M` as well.
    pub fn cofactor(self) -> Self {
        Self::new(self.d, -self.c, -self.b, self.a)
    }

    /// Symmetric part `(M + Mᵀ)/2`.
    pub fn sym(self) -> Self {
        let off = (self.b + self.c) * T::half();
        Self::new(self.a, off, off, self.d)
    }

    /// Skew coefficient `a` with `(M − Mᵀ)/2 = skew(a)`.
    pub fn skew_part(self) -> T {
        (self.c - self.b) * T::half()
    }

    pub fn is_finite(self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Angle of `self` when it is a rotation.
    pub fn rotation_angle(self) -> T {
        self.c.atan2(self.a)
    }

    /// Whether `MᵀM = Id` and `det M = 1` within `tol`.
    pub fn is_rotation(self, tol: T) -> bool {
        let g = self.transpose() * self;
        (g - Self::identity()).norm() <= tol && (self.det() - T::one()).abs() <= tol
    }

    /// Angle of the rotation nearest to `self` in the Frobenius norm.
    ///
    /// For a 2×2 matrix `M + cof(M)` is a non-negative multiple of that
    /// rotation; when it vanishes every rotation is equally close and the
    /// angle 0 is returned.
    pub fn nearest_rotation_angle(self) -> T {
        let p = self.a + self.d;
        let q = self.c - self.b;
        if p == T::zero() && q == T::zero() {
            T::zero()
        } else {
            q.atan2(p)
        }
    }

    /// Rotation factor of the polar decomposition restricted to SO(2).
    pub fn nearest_rotation(self) -> Self {
        let p = self.a + self.d;
        let q = self.c - self.b;
        let n = (p * p + q * q).sqrt();
        if n == T::zero() {
            Self::identity()
        } else {
            Self::new(p / n, -q / n, q / n, p / n)
        }
    }

    /// Singular values `σ₁ ≥ σ₂ ≥ 0`.
    pub fn singular_values(self) -> (T, T) {
        let p = (self.a + self.d).hypot(self.c - self.b);
        let q = (self.a - self.d).hypot(self.b + self.c);
        let s1 = (p + q) * T::half();
        let s2 = ((p - q) * T::half()).abs();
        (s1, s2)
    }

    /// The symmetric factor `√(MᵀM)`.
    pub fn stretch(self) -> Self {
        let r = self.nearest_rotation();
        r.transpose() * self
    }
}

impl<T: Scalar> Add for Mat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl<T: Scalar> AddAssign for Mat2<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl<T: Scalar> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl<T: Scalar> Mul<Vec2<T>> for Mat2<T> {
    type Output = Vec2<T>;
    fn mul(self, v: Vec2<T>) -> Vec2<T> {
        self.apply(v)
    }
}

impl<T: Scalar + Serialize> Serialize for Mat2<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [[self.a, self.b], [self.c, self.d]].serialize(s)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for Mat2<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [[a, b], [c, e]] = <[[T; 2]; 2]>::deserialize(d)?;
        Ok(Self::new(a, b, c, e))
    }
}

/// Distance from `f` to SO(2) in the Frobenius norm.
///
/// With singular values `σ₁ ≥ σ₂`, this is `√((σ₁−1)² + (σ₂−1)²)` for
/// `det F ≥ 0` and `√((σ₁−1)² + (σ₂+1)²)` otherwise. Returns `None` on
/// non-finite input.
pub fn dist_to_so2<T: Scalar>(f: Mat2<T>) -> Option<T> {
    dist_sq_to_so2(f).map(|d| d.sqrt())
}

/// Squared distance to SO(2); see [`dist_to_so2`].
pub fn dist_sq_to_so2<T: Scalar>(f: Mat2<T>) -> Option<T> {
    if !f.is_finite() {
        return None;
    }
    let (s1, s2) = f.singular_values();
    let s2 = if f.det() >= T::zero() { s2 } else { -s2 };
    let one = T::one();
    Some((s1 - one) * (s1 - one) + (s2 - one) * (s2 - one))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn brute_force_dist(f: Mat2<f64>) -> f64 {
        (0..200_000)
            .map(|i| {
                let phi = i as f64 / 200_000.0 * std::f64::consts::TAU;
                (f - Mat2::rotation(phi)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn rotations_have_zero_distance() {
        for k in 0..16 {
            let r = Mat2::rotation(0.4 * k as f64 - 3.0);
            assert!(dist_to_so2(r).unwrap() < 1e-14);
            assert!(r.is_rotation(1e-14));
        }
    }

    #[test]
    fn reflection_distance_is_two() {
        let f = Mat2::diag(1.0, -1.0);
        let closed = dist_to_so2(f).unwrap();
        assert_abs_diff_eq!(closed, 2.0f64.sqrt() * 2.0f64.sqrt(), epsilon = 1e-14);
        assert!((brute_force_dist(f) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let (s1, s2) = Mat2::diag(-3.0f64, 2.0).singular_values();
        assert_abs_diff_eq!(s1, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s2, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn non_finite_is_rejected() {
        assert!(dist_to_so2(Mat2::new(f64::NAN, 0.0, 0.0, 1.0)).is_none());
    }

    #[test]
    fn nearest_rotation_tie_break() {
        // M + cof(M) = 0 for a pure reflection-like matrix with p = q = 0.
        let m = Mat2::new(1.0f64, 0.0, 0.0, -1.0);
        assert_eq!(m.nearest_rotation_angle(), 0.0);
        assert_eq!(m.nearest_rotation(), Mat2::identity());
    }

    #[test]
    fn works_in_single_precision() {
        let r = Mat2::<f32>::rotation(0.7);
        assert!(dist_to_so2(r).unwrap() < 1e-6);
        let f = Mat2::<f32>::diag(1.5, 1.5);
        assert!((dist_to_so2(f).unwrap() - 0.5 * 2f32.sqrt()).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn distance_matches_angle_sweep(a in -2.0f64..2.0, b in -2.0f64..2.0,
                                        c in -2.0f64..2.0, d in -2.0f64..2.0) {
            let f = Mat2::new(a, b, c, d);
            let closed = dist_to_so2(f).unwrap();
            let sweep = brute_force_dist(f);
            prop_assert!(closed <= sweep + 1e-12);
            prop_assert!(sweep - closed < 1e-4);
        }

        #[test]
        fn distance_is_rotation_invariant(a in -2.0f64..2.0, b in -2.0f64..2.0,
                                          c in -2.0f64..2.0, d in -2.0f64..2.0,
                                          t1 in -3.2f64..3.2, t2 in -3.2f64..3.2) {
            let f = Mat2::new(a, b, c, d);
            let r1 = Mat2::rotation(t1);
            let r2 = Mat2::rotation(t2);
            let base = dist_to_so2(f).unwrap();
            prop_assert!((dist_to_so2(r1 * f).unwrap() - base).abs() < 1e-12);
            prop_assert!((dist_to_so2(f * r2).unwrap() - base).abs() < 1e-12);
        }

        #[test]
        fn nearest_rotation_is_a_projection(a in -2.0f64..2.0, b in -2.0f64..2.0,
                                            c in -2.0f64..2.0, d in -2.0f64..2.0,
                                            t in -3.2f64..3.2) {
            let f = Mat2::new(a, b, c, d);
            let r = f.nearest_rotation();
            prop_assert!(r.is_rotation(1e-12));
            prop_assert!((f - r).norm() <= (f - Mat2::rotation(t)).norm() + 1e-12);
            prop_assert!(((f - r).norm() - dist_to_so2(f).unwrap()).abs() < 1e-10);
        }
    }
}
