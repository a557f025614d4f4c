//! Unit quaternions as the alternative attitude representation.
//!
//! Scalar-first convention `Q = [q0, q]` with the identity `[1, 0, 0, 0]`.
//! Products renormalize their result, so a stored quaternion never drifts
//! more than one multiplication away from the unit sphere.

use super::so3::{skew, Rotation};
use super::{LieError, Mat3, Vec3};
use crate::tolerances;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuat {
    q0: f64,
    q: Vec3,
}

impl UnitQuat {
    pub fn identity() -> Self {
        UnitQuat { q0: 1.0, q: Vec3::zeros() }
    }

    /// Builds from components, rejecting inputs whose norm deviates from 1 by
    /// more than [`tolerances::QUATERNION_UNIT_INPUT`], then renormalizing.
    pub fn new(q0: f64, q: Vec3) -> Result<Self, LieError> {
        let norm = (q0 * q0 + q.norm_squared()).sqrt();
        if (norm - 1.0).abs() >= tolerances::QUATERNION_UNIT_INPUT {
            return Err(LieError::NonUnitQuaternion { norm });
        }
        Ok(UnitQuat { q0: q0 / norm, q: q / norm })
    }

    /// Extracts the quaternion of a rotation matrix (Shepperd's method:
    /// pick the largest of the four squared components for stability).
    pub fn from_rotation(r: &Rotation) -> Self {
        let m = r.matrix();
        let trace = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
        let (q0, q) = if trace > 0.0 {
            let s = (trace + 1.0).sqrt() * 2.0;
            (
                0.25 * s,
                Vec3::new(
                    (m[(2, 1)] - m[(1, 2)]) / s,
                    (m[(0, 2)] - m[(2, 0)]) / s,
                    (m[(1, 0)] - m[(0, 1)]) / s,
                ),
            )
        } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
            let s = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
            (
                (m[(2, 1)] - m[(1, 2)]) / s,
                Vec3::new(
                    0.25 * s,
                    (m[(0, 1)] + m[(1, 0)]) / s,
                    (m[(0, 2)] + m[(2, 0)]) / s,
                ),
            )
        } else if m[(1, 1)] > m[(2, 2)] {
            let s = (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt() * 2.0;
            (
                (m[(0, 2)] - m[(2, 0)]) / s,
                Vec3::new(
                    (m[(0, 1)] + m[(1, 0)]) / s,
                    0.25 * s,
                    (m[(1, 2)] + m[(2, 1)]) / s,
                ),
            )
        } else {
            let s = (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt() * 2.0;
            (
                (m[(1, 0)] - m[(0, 1)]) / s,
                Vec3::new(
                    (m[(0, 2)] + m[(2, 0)]) / s,
                    (m[(1, 2)] + m[(2, 1)]) / s,
                    0.25 * s,
                ),
            )
        };
        UnitQuat { q0, q }.renormalized()
    }

    pub fn scalar(&self) -> f64 {
        self.q0
    }

    pub fn vector(&self) -> Vec3 {
        self.q
    }

    pub fn norm(&self) -> f64 {
        (self.q0 * self.q0 + self.q.norm_squared()).sqrt()
    }

    /// `Q⁻¹ = [q0, −q]`.
    pub fn inverse(&self) -> Self {
        UnitQuat { q0: self.q0, q: -self.q }
    }

    pub fn renormalized(&self) -> Self {
        let n = self.norm();
        UnitQuat { q0: self.q0 / n, q: self.q / n }
    }

    /// Quaternion product `self ⊙ rhs`, renormalized.
    pub fn multiply(&self, rhs: &UnitQuat) -> Self {
        let (s, v) = raw_product((self.q0, self.q), (rhs.q0, rhs.q));
        UnitQuat { q0: s, q: v }.renormalized()
    }

    /// Rotates `x` by the sandwich product `Q ⊙ [0; x] ⊙ Q⁻¹`.
    pub fn rotate(&self, x: Vec3) -> Vec3 {
        let qx = raw_product((self.q0, self.q), (0.0, x));
        let (_, out) = raw_product(qx, (self.q0, -self.q));
        out
    }

    /// The rotation matrix `(q0² − ‖q‖²)I + 2qqᵀ + 2q0[q]ₓ`.
    pub fn to_rotation(&self) -> Rotation {
        let q = self.q;
        let m = (self.q0 * self.q0 - q.norm_squared()) * Mat3::identity()
            + 2.0 * q * q.transpose()
            + 2.0 * self.q0 * skew(q);
        Rotation::from_matrix_unchecked(m)
    }
}

/// Hamilton product on raw scalar/vector pairs; no unit-norm assumption.
fn raw_product(a: (f64, Vec3), b: (f64, Vec3)) -> (f64, Vec3) {
    let (a0, av) = a;
    let (b0, bv) = b;
    (a0 * b0 - av.dot(&bv), a0 * bv + b0 * av + av.cross(&bv))
}

/// Quaternion exponential of a rotation vector: the unit quaternion rotating
/// by angle `‖omega_dt‖` about `omega_dt`. Matches [`super::so3_exp`] under
/// [`UnitQuat::to_rotation`].
pub fn quat_exp(omega_dt: Vec3) -> UnitQuat {
    let theta = omega_dt.norm();
    let half = 0.5 * theta;
    let k = if theta < tolerances::SMALL_ANGLE {
        // sin(θ/2)/θ to second order.
        0.5 - theta * theta / 48.0
    } else {
        half.sin() / theta
    };
    UnitQuat { q0: half.cos(), q: k * omega_dt }.renormalized()
}
