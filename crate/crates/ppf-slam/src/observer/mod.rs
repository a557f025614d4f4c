//! The nonlinear SLAM observer with prescribed-performance correction terms.
//!
//! The observer carries a pose estimate, one position estimate per landmark,
//! and an adaptive estimate of the constant velocity-measurement bias. Each
//! landmark error is pushed through its envelope transform; the transformed
//! errors drive a correction twist injected into the pose kinematics, the
//! bias adaptation, and the landmark updates:
//!
//! ```text
//! Ṫ̂  = T̂·[U_m − b̂_U − W_U]∧
//! ṗ̂ᵢ = −k_p·(Λᵢ + Λᵢ⁻¹)·Eᵢ
//! ḃ̂_U = −Σᵢ (Γ/αᵢ)·Ād_T̂ᵀ·[[R̂yᵢ+P̂]ₓ; I₃]·Λᵢ·Eᵢ
//! W_U = −Σᵢ k_w·Ād_{T̂⁻¹}·[[R̂yᵢ+P̂]ₓ; I₃]·Λᵢ·Eᵢ
//! ```
//!
//! [`step`] discretizes these with an exact attitude exponential and Euler
//! updates elsewhere; [`quaternion_step`](quaternion::quaternion_step) is the
//! equivalent unit-quaternion form.

mod diagnostics;
mod quaternion;

pub use diagnostics::{diagnose, lyapunov_value, pose_error, ErrorDiagnostics};
pub use quaternion::{quaternion_step, QuatObserverState};

use crate::lie::{
    project_to_rotation, so3_exp, LieError, Mat3, Mat4, Mat6, Pose, SlamState, Twist, Vec3, Vec6,
    wedge,
};
use crate::ppf::{self, EnvelopeSet, PpfError};
use crate::tolerances;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObserverError {
    #[error("invalid gains: {0}")]
    InvalidGains(String),
    #[error("landmark {landmark} left its envelope at t = {t} s: {source}")]
    Envelope {
        landmark: usize,
        t: f64,
        #[source]
        source: PpfError,
    },
    #[error("Λ diagonal entry {value:e} is under the invertibility floor")]
    SingularLambda { value: f64 },
    #[error("{context}: expected {expected} landmarks, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    State(#[from] LieError),
}

/// Observer gains: all strictly positive, `Γ` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverGains {
    k_p: f64,
    k_w: f64,
    gamma: Mat6,
    gamma_inv: Mat6,
    alpha: Vec<f64>,
}

impl ObserverGains {
    pub fn new(k_p: f64, k_w: f64, gamma: Mat6, alpha: Vec<f64>) -> Result<Self, ObserverError> {
        if !(k_p > 0.0) || !(k_w > 0.0) {
            return Err(ObserverError::InvalidGains(format!(
                "k_p and k_w must be > 0, got k_p = {k_p}, k_w = {k_w}"
            )));
        }
        if alpha.is_empty() || !alpha.iter().all(|a| *a > 0.0 && a.is_finite()) {
            return Err(ObserverError::InvalidGains(
                "alpha must be non-empty with strictly positive entries".into(),
            ));
        }
        let asym = (gamma - gamma.transpose()).abs().max();
        if asym > 1e-9 * gamma.abs().max().max(1.0) {
            return Err(ObserverError::InvalidGains(format!(
                "Gamma must be symmetric (defect {asym:e})"
            )));
        }
        let chol = nalgebra::Cholesky::new(gamma)
            .ok_or_else(|| ObserverError::InvalidGains("Gamma must be positive definite".into()))?;
        Ok(ObserverGains { k_p, k_w, gamma, gamma_inv: chol.inverse(), alpha })
    }

    /// Scalar `Γ = γ·I₆` and identical `αᵢ` for `n` landmarks.
    pub fn uniform(k_p: f64, k_w: f64, gamma: f64, alpha: f64, n: usize) -> Result<Self, ObserverError> {
        Self::new(k_p, k_w, gamma * Mat6::identity(), vec![alpha; n])
    }

    pub fn k_p(&self) -> f64 {
        self.k_p
    }

    pub fn k_w(&self) -> f64 {
        self.k_w
    }

    pub fn gamma(&self) -> &Mat6 {
        &self.gamma
    }

    pub fn gamma_inv(&self) -> &Mat6 {
        &self.gamma_inv
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
}

/// Estimated pose, landmark positions, and measurement bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    slam: SlamState,
    bias: Twist,
}

impl ObserverState {
    pub fn new(pose: Pose, landmarks: Vec<Vec3>, bias: Twist) -> Result<Self, LieError> {
        Ok(ObserverState { slam: SlamState::new(pose, landmarks)?, bias })
    }

    pub fn pose(&self) -> &Pose {
        self.slam.pose()
    }

    pub fn landmarks(&self) -> &[Vec3] {
        self.slam.landmarks()
    }

    pub fn bias(&self) -> &Twist {
        &self.bias
    }

    pub fn landmark_count(&self) -> usize {
        self.slam.landmark_count()
    }
}

/// One time slice of measurements: biased/noisy twist and body-frame
/// landmark positions at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFrame {
    pub u_m: Twist,
    pub y: Vec<Vec3>,
    pub t: f64,
}

/// The per-step error data an observer can compute without the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct StepErrors {
    /// Landmark errors `eᵢ` at the step's start time.
    pub e: Vec<Vec3>,
    /// Transformed errors `Eᵢ`.
    pub transformed: Vec<Vec3>,
}

/// `eᵢ = p̂ᵢ − (R̂·yᵢ + P̂)`: the estimated landmark minus where the estimated
/// pose says the measurement sits.
pub fn landmark_error(pose_est: &Pose, p_hat_i: &Vec3, y_i: &Vec3) -> Vec3 {
    p_hat_i - pose_est.transform_point(y_i)
}

/// `[q×w; w]` — the stacked factor `[[q]ₓ; I₃]` applied to `w`.
fn stacked_apply(q: &Vec3, w: &Vec3) -> Vec6 {
    let top = q.cross(w);
    Vec6::new(top.x, top.y, top.z, w.x, w.y, w.z)
}

/// The correction twist `W_U = −Σᵢ k_w·Ād_{T̂⁻¹}·[[R̂yᵢ+P̂]ₓ; I₃]·Λᵢ·Eᵢ`.
pub fn correction_twist(
    pose_est: &Pose,
    lambdas: &[Mat3],
    transformed: &[Vec3],
    y: &[Vec3],
    gains: &ObserverGains,
) -> Twist {
    let ad_inv = pose_est.inverse().aug_adjoint();
    let mut sum = Vec6::zeros();
    for i in 0..y.len() {
        let q = pose_est.transform_point(&y[i]);
        sum += ad_inv * stacked_apply(&q, &(lambdas[i] * transformed[i]));
    }
    Twist::from_vector(-gains.k_w() * sum)
}

/// The bias adaptation rate `−Σᵢ (Γ/αᵢ)·Ād_T̂ᵀ·[[R̂yᵢ+P̂]ₓ; I₃]·Λᵢ·Eᵢ`.
pub fn bias_rate(
    pose_est: &Pose,
    lambdas: &[Mat3],
    transformed: &[Vec3],
    y: &[Vec3],
    gains: &ObserverGains,
) -> Twist {
    let ad_t = pose_est.aug_adjoint().transpose();
    let mut sum = Vec6::zeros();
    for i in 0..y.len() {
        let q = pose_est.transform_point(&y[i]);
        sum += (ad_t * stacked_apply(&q, &(lambdas[i] * transformed[i]))) / gains.alpha()[i];
    }
    Twist::from_vector(-(gains.gamma() * sum))
}

/// The landmark update rate `−k_p·(Λᵢ + Λᵢ⁻¹)·Eᵢ` with `Λᵢ⁻¹` the diagonal
/// reciprocal. The floor guard is unreachable on the valid envelope domain.
pub fn landmark_rate(
    lambda_i: &Mat3,
    transformed_i: &Vec3,
    gains: &ObserverGains,
) -> Result<Vec3, ObserverError> {
    let mut rate = Vec3::zeros();
    for k in 0..3 {
        let l = lambda_i[(k, k)];
        if l.abs() < tolerances::LAMBDA_FLOOR {
            return Err(ObserverError::SingularLambda { value: l });
        }
        rate[k] = -gains.k_p() * (l + 1.0 / l) * transformed_i[k];
    }
    Ok(rate)
}

/// The continuous pose kinematics `Ṫ̂ = T̂·[U_m − b̂_U − W_U]∧` as a 4×4
/// matrix rate.
pub fn pose_rate(pose_est: &Pose, u_m: &Twist, bias_est: &Twist, w: &Twist) -> Mat4 {
    pose_est.homogeneous() * wedge(&(*u_m - *bias_est - *w))
}

/// Advances the observer one explicit step of length `dt` from the
/// measurements at time `frame.t`.
///
/// The attitude moves by the exact exponential of the corrected angular rate
/// and is re-projected onto the rotation group; position, landmarks, and
/// bias take Euler updates. Returns the advanced state together with the
/// errors evaluated at `frame.t`.
///
/// The closed loop turns stiff once the envelopes approach their steady
/// width (the published gain set puts the fastest eigenvalue near 10⁴/s), so
/// `dt` must stay around 1e-4 s or below for a stable long run; the harness
/// takes care of that by integrating on a grid finer than its measurement
/// step.
///
/// An [`ObserverError::Envelope`] means some error component reached its
/// prescribed bound — the caller still owns the pre-step state for
/// post-mortem.
pub fn step(
    state: &ObserverState,
    frame: &MeasurementFrame,
    envelopes: &EnvelopeSet,
    gains: &ObserverGains,
    dt: f64,
) -> Result<(ObserverState, StepErrors), ObserverError> {
    let n = state.landmark_count();
    check_dims("measurement frame", n, frame.y.len())?;
    check_dims("envelope set", n, envelopes.landmark_count())?;
    check_dims("gains alpha", n, gains.alpha().len())?;

    let pose = state.pose();
    let mut e = Vec::with_capacity(n);
    let mut transformed = Vec::with_capacity(n);
    let mut lambdas = Vec::with_capacity(n);
    for i in 0..n {
        let e_i = landmark_error(pose, &state.landmarks()[i], &frame.y[i]);
        let envs = envelopes.landmark(i);
        let wrap = |source| ObserverError::Envelope { landmark: i, t: frame.t, source };
        let (lambda_i, _mu_i) = ppf::lambda_mu(envs, &e_i, frame.t).map_err(wrap)?;
        let big_e_i = ppf::transformed_error(envs, &e_i, frame.t).map_err(wrap)?;
        e.push(e_i);
        transformed.push(big_e_i);
        lambdas.push(lambda_i);
    }

    let w = correction_twist(pose, &lambdas, &transformed, &frame.y, gains);
    let b_rate = bias_rate(pose, &lambdas, &transformed, &frame.y, gains);
    let chi = frame.u_m - *state.bias() - w;

    let rotation = project_to_rotation((pose.rotation * so3_exp(chi.omega * dt)).matrix())
        .expect("product of rotations has positive determinant");
    let position = pose.position + dt * (pose.rotation * chi.v);
    let mut landmarks = Vec::with_capacity(n);
    for i in 0..n {
        let rate = landmark_rate(&lambdas[i], &transformed[i], gains)?;
        landmarks.push(state.landmarks()[i] + dt * rate);
    }
    let bias = *state.bias() + dt * b_rate;

    let next = ObserverState::new(Pose::new(rotation, position), landmarks, bias)?;
    Ok((next, StepErrors { e, transformed }))
}

fn check_dims(context: &'static str, expected: usize, got: usize) -> Result<(), ObserverError> {
    if expected != got {
        return Err(ObserverError::DimensionMismatch { context, expected, got });
    }
    Ok(())
}

/// The margin `c_p = k_p − k̄_δ·k̄_ξ·|μ̄|` of the sufficient gain condition.
/// Negative margin does not preclude convergence (the bound is conservative)
/// but is worth a warning at configuration time.
pub fn performance_margin(gains: &ObserverGains, envelopes: &EnvelopeSet) -> f64 {
    let mut k_delta: f64 = 0.0;
    let mut k_xi: f64 = 0.0;
    let mut mu_bar: f64 = 0.0;
    for envs in envelopes.iter() {
        for env in envs {
            k_delta = k_delta.max(env.delta_bar());
            k_xi = k_xi.max(env.xi0());
            // μ(t) = ξ̇/ξ is most negative at t = 0.
            mu_bar = mu_bar.min(env.rate_at(0.0) / env.value_at(0.0));
        }
    }
    gains.k_p() - k_delta * k_xi * mu_bar.abs()
}
