//! Rotation matrices and the maps in and out of their tangent space.

use super::{LieError, Mat3, Vec3};
use crate::tolerances;

/// Skew-symmetric matrix of `y`, so that `skew(y) * z == y.cross(z)`.
#[rustfmt::skip]
pub fn skew(y: Vec3) -> Mat3 {
    Mat3::new(
        0.0, -y.z,  y.y,
        y.z,  0.0, -y.x,
       -y.y,  y.x,  0.0,
    )
}

/// Inverse of [`skew`]. Fails if `m` is not antisymmetric within
/// [`tolerances::ANTISYMMETRY`].
pub fn vee(m: &Mat3) -> Result<Vec3, LieError> {
    let defect = (m + m.transpose()).abs().max();
    if defect >= tolerances::ANTISYMMETRY {
        return Err(LieError::NonAntisymmetric { defect });
    }
    Ok(Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))
}

/// A 3×3 orthonormal matrix with determinant +1.
///
/// The wrapped matrix is only reachable through constructors that either
/// validate the invariants ([`Rotation::from_matrix`]) or hold them by
/// construction ([`so3_exp`], [`project_to_rotation`], quaternion conversion).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    /// Wraps `m` after checking `m·mᵀ = I` and `det m = 1` within
    /// [`tolerances::ROTATION_ORTHONORMALITY`].
    pub fn from_matrix(m: Mat3) -> Result<Self, LieError> {
        let defect = orthonormality_defect(&m);
        if defect >= tolerances::ROTATION_ORTHONORMALITY {
            return Err(LieError::NotARotation { defect });
        }
        Ok(Rotation(m))
    }

    pub(crate) fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation(m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    /// `max(‖R·Rᵀ − I‖_max, |det R − 1|)` — zero for an exact rotation.
    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.0)
    }
}

fn orthonormality_defect(m: &Mat3) -> f64 {
    let gram = (m * m.transpose() - Mat3::identity()).abs().max();
    gram.max((m.determinant() - 1.0).abs())
}

impl std::ops::Mul<Rotation> for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl std::ops::Mul<Vec3> for Rotation {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

/// Exponential map of so(3): the rotation by angle `‖omega_dt‖` about the
/// axis `omega_dt`, in closed Rodrigues form.
///
/// Below [`tolerances::SMALL_ANGLE`] the trigonometric coefficients switch to
/// their second-order series.
pub fn so3_exp(omega_dt: Vec3) -> Rotation {
    let theta = omega_dt.norm();
    let k = skew(omega_dt);
    let k2 = k * k;
    let (a, b) = if theta < tolerances::SMALL_ANGLE {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    Rotation(Mat3::identity() + a * k + b * k2)
}

/// Nearest rotation to `m` in the Frobenius norm, via SVD polar projection.
/// Idempotent on valid rotations; fails when `det m ≤ 0`.
pub fn project_to_rotation(m: &Mat3) -> Result<Rotation, LieError> {
    let det = m.determinant();
    if det <= 0.0 {
        return Err(LieError::DegenerateMatrix { det });
    }
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    let mut r = u * v_t;
    // det(U·Vᵀ) = ±1; the negative branch cannot occur for det(m) > 0, but a
    // sign flip here would silently produce a reflection, so keep the guard.
    if r.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * v_t;
    }
    Ok(Rotation(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::FRAC_PI_2;

    fn random_vec(rng: &mut StdRng, scale: f64) -> Vec3 {
        Vec3::new(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    }

    /// Truncated matrix power series of exp(skew(w)) — independent of the
    /// Rodrigues path under test.
    fn exp_series(w: Vec3, terms: usize) -> Mat3 {
        let k = skew(w);
        let mut sum = Mat3::identity();
        let mut power = Mat3::identity();
        let mut factorial = 1.0;
        for n in 1..terms {
            power *= k;
            factorial *= n as f64;
            sum += power / factorial;
        }
        sum
    }

    #[test]
    fn skew_zero_is_zero() {
        assert_eq!(skew(Vec3::zeros()), Mat3::zeros());
    }

    #[test]
    fn skew_explicit_matrix() {
        let m = skew(Vec3::new(1.0, 2.0, 3.0));
        #[rustfmt::skip]
        let expected = Mat3::new(
            0.0, -3.0,  2.0,
            3.0,  0.0, -1.0,
           -2.0,  1.0,  0.0,
        );
        assert_eq!(m, expected);
    }

    #[test]
    fn skew_matches_cross_product_and_antisymmetry() {
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..100 {
            let a = random_vec(&mut rng, 5.0);
            let b = random_vec(&mut rng, 5.0);
            assert_abs_diff_eq!(skew(a) * b, a.cross(&b), epsilon = 1e-14);
            assert_abs_diff_eq!(skew(a) * b, -(skew(b) * a), epsilon = 1e-14);
        }
    }

    #[test]
    fn vee_zero_and_round_trip() {
        assert_eq!(vee(&Mat3::zeros()).unwrap(), Vec3::zeros());
        let y = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(vee(&skew(y)).unwrap(), y);
    }

    #[test]
    fn vee_random_antisymmetric_round_trip() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..200 {
            let m = skew(random_vec(&mut rng, 10.0));
            let v = vee(&m).unwrap();
            assert_abs_diff_eq!(skew(v), m, epsilon = 0.0);
        }
    }

    #[test]
    fn vee_rejects_non_antisymmetric() {
        let mut m = skew(Vec3::new(1.0, 2.0, 3.0));
        m[(0, 0)] = 1e-6;
        assert!(matches!(vee(&m), Err(LieError::NonAntisymmetric { .. })));
    }

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(so3_exp(Vec3::zeros()).matrix(), &Mat3::identity());
    }

    #[test]
    fn exp_quarter_turn_about_z() {
        let r = so3_exp(Vec3::new(0.0, 0.0, FRAC_PI_2));
        #[rustfmt::skip]
        let expected = Mat3::new(
            0.0, -1.0, 0.0,
            1.0,  0.0, 0.0,
            0.0,  0.0, 1.0,
        );
        assert_abs_diff_eq!(*r.matrix(), expected, epsilon = 1e-15);
    }

    #[test]
    fn exp_matches_power_series() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..200 {
            // Angles up to 2 rad keep the 20-term truncation under 1e-12,
            // well inside the 1e-10 comparison.
            let w = random_vec(&mut rng, 2.0 / 3f64.sqrt());
            let r = so3_exp(w);
            assert_abs_diff_eq!(*r.matrix(), exp_series(w, 20), epsilon = 1e-10);
            assert!(r.orthonormality_defect() < 1e-13);
        }
    }

    #[test]
    fn exp_small_angle_branch_is_accurate() {
        for &scale in &[1e-12, 1e-9, 5e-9] {
            let w = Vec3::new(scale, -scale, 0.5 * scale);
            let r = so3_exp(w);
            assert_abs_diff_eq!(*r.matrix(), exp_series(w, 5), epsilon = 1e-15);
        }
    }

    #[test]
    fn projection_identity_and_scale() {
        let r = project_to_rotation(&Mat3::identity()).unwrap();
        assert_abs_diff_eq!(*r.matrix(), Mat3::identity(), epsilon = 1e-14);
        let r = project_to_rotation(&(1.001 * Mat3::identity())).unwrap();
        assert_abs_diff_eq!(*r.matrix(), Mat3::identity(), epsilon = 1e-14);
    }

    #[test]
    fn projection_recovers_perturbed_rotation() {
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..100 {
            let r = so3_exp(random_vec(&mut rng, 3.0));
            let mut noisy = *r.matrix();
            for e in noisy.iter_mut() {
                *e += rng.random_range(-1e-6..1e-6);
            }
            let recovered = project_to_rotation(&noisy).unwrap();
            assert!((recovered.matrix() - r.matrix()).abs().max() < 1e-5);
            assert!(recovered.orthonormality_defect() < 1e-14);
        }
    }

    #[test]
    fn projection_rejects_degenerate() {
        let m = Mat3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(
            project_to_rotation(&m),
            Err(LieError::DegenerateMatrix { .. })
        ));
    }

    #[test]
    fn from_matrix_validates() {
        assert!(Rotation::from_matrix(Mat3::identity()).is_ok());
        assert!(matches!(
            Rotation::from_matrix(2.0 * Mat3::identity()),
            Err(LieError::NotARotation { .. })
        ));
    }
}
