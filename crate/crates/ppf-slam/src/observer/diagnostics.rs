//! Truth-aware diagnostics: pose error, bias error, and the Lyapunov value
//! the convergence argument monitors.
//!
//! The observer itself never sees the ground truth; the harness combines a
//! [`StepErrors`] with the true state to build an [`ErrorDiagnostics`].

use super::{ObserverGains, StepErrors};
use crate::lie::{Pose, Rotation, Twist, Vec3};

/// `L = Σᵢ ‖Eᵢ‖²/(2αᵢ) + ½·b̃ᵀΓ⁻¹b̃` — non-negative, zero only when every
/// transformed error and the bias error vanish.
pub fn lyapunov_value(transformed: &[Vec3], b_tilde: &Twist, gains: &ObserverGains) -> f64 {
    let mut l = 0.0;
    for (big_e, alpha) in transformed.iter().zip(gains.alpha()) {
        l += big_e.norm_squared() / (2.0 * alpha);
    }
    let b = b_tilde.as_vector();
    l + 0.5 * b.dot(&(gains.gamma_inv() * b))
}

/// The pose error `T̃ = T̂·T⁻¹`, returned as `(R̃, P̃) = (R̂Rᵀ, P̂ − R̃P)`.
///
/// With all landmark errors at zero this tends to a constant transform, not
/// to the identity: the global frame is unobservable from body-frame
/// measurements alone.
pub fn pose_error(truth: &Pose, est: &Pose) -> (Rotation, Vec3) {
    let t_tilde = *est * truth.inverse();
    (t_tilde.rotation, t_tilde.position)
}

/// Everything worth logging about one time slice, truth included.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDiagnostics {
    /// Landmark errors `eᵢ`, one row per landmark.
    pub e: Vec<Vec3>,
    /// Transformed errors `Eᵢ`.
    pub transformed: Vec<Vec3>,
    pub lyapunov: f64,
    pub r_tilde: Rotation,
    pub p_tilde: Vec3,
    /// Bias error `b̃ = b_U − b̂_U`.
    pub b_tilde: Twist,
}

pub fn diagnose(
    errors: &StepErrors,
    est_pose: &Pose,
    est_bias: &Twist,
    truth_pose: &Pose,
    true_bias: &Twist,
    gains: &ObserverGains,
) -> ErrorDiagnostics {
    let b_tilde = *true_bias - *est_bias;
    let (r_tilde, p_tilde) = pose_error(truth_pose, est_pose);
    ErrorDiagnostics {
        e: errors.e.clone(),
        transformed: errors.transformed.clone(),
        lyapunov: lyapunov_value(&errors.transformed, &b_tilde, gains),
        r_tilde,
        p_tilde,
        b_tilde,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{so3_exp, Mat4};
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_vec(rng: &mut StdRng, scale: f64) -> Vec3 {
        Vec3::new(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    }

    #[test]
    fn lyapunov_zero_and_frozen_values() {
        let g1 = ObserverGains::uniform(3.0, 3.0, 10.0, 0.05, 1).unwrap();
        assert_eq!(lyapunov_value(&[Vec3::zeros()], &Twist::zero(), &g1), 0.0);
        // ‖E‖² = 1 with α = 0.05 → 1/(2·0.05) = 10.
        let l = lyapunov_value(&[Vec3::new(1.0, 0.0, 0.0)], &Twist::zero(), &g1);
        assert_abs_diff_eq!(l, 10.0, epsilon = 1e-12);
        // ‖b̃‖² = 1 with Γ = 10·I → ½·(1/10) = 0.05.
        let b = Twist::new(Vec3::new(1.0, 0.0, 0.0), Vec3::zeros());
        let l = lyapunov_value(&[Vec3::zeros()], &b, &g1);
        assert_abs_diff_eq!(l, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn pose_error_trivial_cases() {
        let mut rng = StdRng::seed_from_u64(40);
        let pose = Pose::new(so3_exp(random_vec(&mut rng, 2.0)), random_vec(&mut rng, 5.0));
        let (r, p) = pose_error(&pose, &pose);
        assert_abs_diff_eq!(*r.matrix(), *Rotation::identity().matrix(), epsilon = 1e-14);
        assert_abs_diff_eq!(p, Vec3::zeros(), epsilon = 1e-14);

        let (r, p) = pose_error(&Pose::identity(), &pose);
        assert_eq!(r, pose.rotation);
        assert_eq!(p, pose.position);
    }

    /// Reassembling (R̃, P̃) gives exactly the 4×4 product T̂·T⁻¹.
    #[test]
    fn pose_error_matches_matrix_product() {
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..100 {
            let truth = Pose::new(so3_exp(random_vec(&mut rng, 3.0)), random_vec(&mut rng, 8.0));
            let est = Pose::new(so3_exp(random_vec(&mut rng, 3.0)), random_vec(&mut rng, 8.0));
            let (r, p) = pose_error(&truth, &est);
            let reassembled = Pose::new(r, p).homogeneous();
            let product = est.homogeneous() * truth.inverse().homogeneous();
            assert_abs_diff_eq!(reassembled, product, epsilon = 1e-12);
            assert_abs_diff_eq!(
                (reassembled.try_inverse().unwrap() * product - Mat4::identity()).abs().max(),
                0.0,
                epsilon = 1e-11
            );
        }
    }
}
