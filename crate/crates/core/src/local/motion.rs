use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{Mat2, Vec2};
use crate::scalar::Scalar;

/// `x ↦ R x + c` with `R ∈ SO(2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct RigidMotion<T> {
    pub r: Mat2<T>,
    pub c: Vec2<T>,
}

impl<T: Scalar> RigidMotion<T> {
    /// Checked constructor: `RᵀR = Id`, `det R = 1` within `1e-12` (scaled for `f32`).
    pub fn new(r: Mat2<T>, c: Vec2<T>) -> Result<Self> {
        let tol = T::lit(1e-12).max(T::lit(64.0) * T::eps());
        if !r.is_rotation(tol) || !c.is_finite() {
            return Err(invalid("rigid motion needs a rotation and a finite translation"));
        }
        Ok(Self { r, c })
    }

    pub fn identity() -> Self {
        Self { r: Mat2::identity(), c: Vec2::zero() }
    }

    pub fn from_angle(theta: T, c: Vec2<T>) -> Self {
        Self { r: Mat2::rotation(theta), c }
    }

    #[inline]
    pub fn apply(&self, x: Vec2<T>) -> Vec2<T> {
        self.r * x + self.c
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { r: self.r * other.r, c: self.r * other.c + self.c }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.r.transpose();
        Self { r: rt, c: -(rt * self.c) }
    }

    pub fn angle(&self) -> T {
        self.r.rotation_angle()
    }
}

/// `x ↦ A x + c` with `A = [[0, a], [−a, 0]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct InfinitesimalRigidMotion<T> {
    pub a: T,
    pub c: Vec2<T>,
}

impl<T: Scalar> InfinitesimalRigidMotion<T> {
    pub fn zero() -> Self {
        Self { a: T::zero(), c: Vec2::zero() }
    }

    /// The skew matrix; antisymmetric by construction.
    pub fn matrix(&self) -> Mat2<T> {
        Mat2::new(T::zero(), self.a, -self.a, T::zero())
    }

    #[inline]
    pub fn apply(&self, x: Vec2<T>) -> Vec2<T> {
        Vec2::new(self.a * x.y, -self.a * x.x) + self.c
    }

    pub fn scale(&self, s: T) -> Self {
        Self { a: self.a * s, c: self.c.scale(s) }
    }

    /// `R̂ · polar(Id + A)` with translation `R̂ c`: the nearest rigid motion
    /// to the linearization `R̂(Id + A)x + R̂c`.
    pub fn round_to_rigid(&self, base: Mat2<T>) -> RigidMotion<T> {
        let r = base * (Mat2::identity() + self.matrix()).nearest_rotation();
        RigidMotion { r, c: base * self.c }
    }
}

impl<T: Scalar> std::ops::Add for InfinitesimalRigidMotion<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { a: self.a + o.a, c: self.c + o.c }
    }
}
