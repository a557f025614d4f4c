//! Unit-quaternion form of the observer.
//!
//! Same correction structure as the matrix backend, with the attitude stored
//! as a quaternion `Q̂` evolving by `Q̂̇ = ½·[[0, −χᵀ], [χ, −[χ]ₓ]]·Q̂`,
//! `χ = Ω_m − b̂_Ω − W_Ω`. One step advances the quaternion by the exact
//! exponential of `χ·dt` (the closed-form flow of that kinematics for a
//! rate held constant over the step) and renormalizes. Vectors rotate
//! through the sandwich product `Y(Q̂, x)`, and the two adjoint blocks are
//! assembled from `R_Q̂` directly, keeping the arithmetic route independent
//! of the matrix backend.

use super::{landmark_rate, ObserverError, ObserverGains, StepErrors};
use crate::lie::{quat_exp, skew, LieError, Mat3, Mat6, Pose, Twist, UnitQuat, Vec3, Vec6};
use crate::ppf::{self, EnvelopeSet};

/// Observer state with a quaternion attitude.
#[derive(Debug, Clone, PartialEq)]
pub struct QuatObserverState {
    attitude: UnitQuat,
    position: Vec3,
    landmarks: Vec<Vec3>,
    bias: Twist,
}

impl QuatObserverState {
    pub fn new(
        attitude: UnitQuat,
        position: Vec3,
        landmarks: Vec<Vec3>,
        bias: Twist,
    ) -> Result<Self, LieError> {
        if landmarks.len() < 3 {
            return Err(LieError::InsufficientLandmarks { n: landmarks.len() });
        }
        Ok(QuatObserverState { attitude, position, landmarks, bias })
    }

    /// Same estimate as a matrix-backend state.
    pub fn from_matrix_state(state: &super::ObserverState) -> Self {
        QuatObserverState {
            attitude: UnitQuat::from_rotation(&state.pose().rotation),
            position: state.pose().position,
            landmarks: state.landmarks().to_vec(),
            bias: *state.bias(),
        }
    }

    pub fn attitude(&self) -> &UnitQuat {
        &self.attitude
    }

    pub fn position(&self) -> Vec3 {
        self.position
    }

    pub fn landmarks(&self) -> &[Vec3] {
        &self.landmarks
    }

    pub fn bias(&self) -> &Twist {
        &self.bias
    }

    /// The pose this state encodes, for logging and comparison.
    pub fn pose(&self) -> Pose {
        Pose::new(self.attitude.to_rotation(), self.position)
    }
}

/// `Ād_T̂ᵀ = [[Rᵀ, −Rᵀ[P]ₓ], [0, Rᵀ]]` assembled from the quaternion's
/// rotation matrix.
fn adjoint_transpose(r: &Mat3, p: &Vec3) -> Mat6 {
    let rt = r.transpose();
    let mut m = Mat6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&rt);
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-rt * skew(*p)));
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&rt);
    m
}

/// `Ād_{T̂⁻¹} = [[Rᵀ, 0], [−Rᵀ[P]ₓ, Rᵀ]]`.
fn adjoint_of_inverse(r: &Mat3, p: &Vec3) -> Mat6 {
    let rt = r.transpose();
    let mut m = Mat6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&rt);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-rt * skew(*p)));
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&rt);
    m
}

fn stacked_apply(q: &Vec3, w: &Vec3) -> Vec6 {
    let top = q.cross(w);
    Vec6::new(top.x, top.y, top.z, w.x, w.y, w.z)
}

/// One observer step in quaternion form; the counterpart of [`super::step`],
/// sharing its stiffness caveat on the usable `dt`.
pub fn quaternion_step(
    state: &QuatObserverState,
    frame: &super::MeasurementFrame,
    envelopes: &EnvelopeSet,
    gains: &ObserverGains,
    dt: f64,
) -> Result<(QuatObserverState, StepErrors), ObserverError> {
    let n = state.landmarks.len();
    super::check_dims("measurement frame", n, frame.y.len())?;
    super::check_dims("envelope set", n, envelopes.landmark_count())?;
    super::check_dims("gains alpha", n, gains.alpha().len())?;

    let r_q = state.attitude.to_rotation();
    let r = r_q.matrix();

    let mut e = Vec::with_capacity(n);
    let mut transformed = Vec::with_capacity(n);
    let mut lambdas = Vec::with_capacity(n);
    for i in 0..n {
        let e_i = state.landmarks[i] - (r * frame.y[i] + state.position);
        let envs = envelopes.landmark(i);
        let wrap = |source| ObserverError::Envelope { landmark: i, t: t_sub, source };
        let (lambda_i, _mu_i) = ppf::lambda_mu(envs, &e_i, t_sub).map_err(wrap)?;
        let big_e_i = ppf::transformed_error(envs, &e_i, t_sub).map_err(wrap)?;
        e.push(e_i);
        transformed.push(big_e_i);
        lambdas.push(lambda_i);
    }

    let ad_inv = adjoint_of_inverse(r, &state.position);
    let ad_t = adjoint_transpose(r, &state.position);
    let mut w_sum = Vec6::zeros();
    let mut b_sum = Vec6::zeros();
    for i in 0..n {
        // Y(Q̂, yᵢ) + P̂ inside the skew factor.
        let q = state.attitude.rotate(frame.y[i]) + state.position;
        let weighted = stacked_apply(&q, &(lambdas[i] * transformed[i]));
        w_sum += ad_inv * weighted;
        b_sum += (ad_t * weighted) / gains.alpha()[i];
    }
    let w = Twist::from_vector(-gains.k_w() * w_sum);
    let b_rate = Twist::from_vector(-(gains.gamma() * b_sum));

    let chi = frame.u_m - state.bias - w;
    let attitude = state.attitude.multiply(&quat_exp(chi.omega * h));
    let position = state.position + h * state.attitude.rotate(chi.v);
    let mut landmarks = Vec::with_capacity(n);
    for i in 0..n {
        let rate = landmark_rate(&lambdas[i], &transformed[i], gains)?;
        landmarks.push(state.landmarks[i] + h * rate);
    }
    let bias = state.bias + h * b_rate;

    let next = QuatObserverState { attitude, position, landmarks, bias };
    Ok((next, StepErrors { e, transformed }))
}

#[cfg(test)]
mod tests {
    use super::super::{MeasurementFrame, ObserverGains};
    use super::*;
    use crate::ppf::PerformanceEnvelope;
    use crate::tolerances;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn envelopes(n: usize) -> EnvelopeSet {
        let env = PerformanceEnvelope::symmetric(1.8, 0.1, 1.0, 1.8).unwrap();
        EnvelopeSet::new(vec![[env, env, env]; n])
    }

    fn gains(n: usize) -> ObserverGains {
        ObserverGains::uniform(3.0, 3.0, 10.0, 0.05, n).unwrap()
    }

    /// χ = 0 leaves the attitude untouched.
    #[test]
    fn zero_rate_fixes_attitude() {
        let landmarks = vec![Vec3::x(), Vec3::y(), Vec3::z()];
        let state = QuatObserverState::new(
            UnitQuat::identity(),
            Vec3::zeros(),
            landmarks.clone(),
            Twist::zero(),
        )
        .unwrap();
        let frame = MeasurementFrame { u_m: Twist::zero(), y: landmarks, t: 0.0 };
        let (next, _) = quaternion_step(&state, &frame, &envelopes(3), &gains(3), 1e-3).unwrap();
        assert_abs_diff_eq!(next.attitude().scalar(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(next.attitude().vector(), Vec3::zeros(), epsilon = 1e-15);
        assert_abs_diff_eq!(next.position(), Vec3::zeros(), epsilon = 1e-15);
    }

    /// The stored quaternion stays unit over many steps.
    #[test]
    fn norm_stays_unit_over_many_steps() {
        let mut rng = StdRng::seed_from_u64(50);
        let mut q = UnitQuat::identity();
        for _ in 0..100_000 {
            let chi = Vec3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            q = q.multiply(&quat_exp(chi * 1e-3));
            debug_assert!((q.norm() - 1.0).abs() < tolerances::QUATERNION_UNIT_NORM);
        }
        assert!((q.norm() - 1.0).abs() < tolerances::QUATERNION_UNIT_NORM);
    }

    /// Both adjoint block assemblies agree with the Pose-based route.
    #[test]
    fn adjoint_blocks_match_pose_route() {
        let mut rng = StdRng::seed_from_u64(51);
        for _ in 0..100 {
            let w = Vec3::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            );
            let p = Vec3::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            );
            let rot = crate::lie::so3_exp(w);
            let pose = Pose::new(rot, p);
            assert_abs_diff_eq!(
                adjoint_transpose(rot.matrix(), &p),
                pose.aug_adjoint().transpose(),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                adjoint_of_inverse(rot.matrix(), &p),
                pose.inverse().aug_adjoint(),
                epsilon = 1e-12
            );
        }
    }
}
