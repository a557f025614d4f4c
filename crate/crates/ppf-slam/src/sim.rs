//! Ground-truth vehicle and landmark dynamics plus measurement synthesis.
//!
//! The vehicle follows constant-twist rigid-body kinematics; landmarks are
//! fixed in the inertial frame. Measurements are the body-frame twist
//! corrupted by a constant bias and optional zero-mean Gaussian noise, and
//! the body-frame landmark positions.

use crate::lie::{so3_exp, LieError, Pose, Rotation, SlamState, Twist, Vec3};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("scenario needs at least 3 landmarks, got {n}")]
    TooFewLandmarks { n: usize },
    #[error("landmarks are collinear; at least three must define a plane")]
    CollinearLandmarks,
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// Everything that defines one ground-truth world: constant twist, initial
/// pose, fixed landmarks, measurement bias/noise, and the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// True angular velocity, rad/s (constant).
    pub omega_true: Vec3,
    /// True translational velocity, m/s (constant, body frame).
    pub v_true: Vec3,
    pub r0: Rotation,
    pub p0: Vec3,
    pub landmarks_true: Vec<Vec3>,
    /// Constant bias added to every velocity measurement.
    pub bias_true: Twist,
    /// Per-axis standard deviation of the velocity measurement noise.
    pub noise_std: f64,
    /// Per-axis standard deviation of optional feature measurement noise.
    /// Zero (the default) matches the analysis setting.
    pub feature_noise_std: f64,
    /// Simulated time span, s.
    pub duration: f64,
    /// Integration step, s.
    pub dt: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let n = self.landmarks_true.len();
        if n < 3 {
            return Err(ScenarioError::TooFewLandmarks { n });
        }
        if !landmarks_span_a_plane(&self.landmarks_true) {
            return Err(ScenarioError::CollinearLandmarks);
        }
        if !(self.dt > 0.0) {
            return Err(ScenarioError::Invalid(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.duration >= 0.0) {
            return Err(ScenarioError::Invalid(format!(
                "duration must be >= 0, got {}",
                self.duration
            )));
        }
        if !(self.noise_std >= 0.0) || !(self.feature_noise_std >= 0.0) {
            return Err(ScenarioError::Invalid("noise std must be >= 0".into()));
        }
        Ok(())
    }

    pub fn twist_true(&self) -> Twist {
        Twist::new(self.omega_true, self.v_true)
    }

    pub fn initial_truth(&self) -> Result<TruthState, LieError> {
        TruthState::new(Pose::new(self.r0, self.p0), self.landmarks_true.clone(), 0.0)
    }
}

fn landmarks_span_a_plane(landmarks: &[Vec3]) -> bool {
    let origin = landmarks[0];
    for i in 1..landmarks.len() {
        for j in (i + 1)..landmarks.len() {
            let a = landmarks[i] - origin;
            let b = landmarks[j] - origin;
            let scale = a.norm() * b.norm();
            if scale > 0.0 && a.cross(&b).norm() > 1e-9 * scale.max(1.0) {
                return true;
            }
        }
    }
    false
}

/// The true world at time `t`: vehicle pose plus the (static) landmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthState {
    slam: SlamState,
    pub t: f64,
}

impl TruthState {
    pub fn new(pose: Pose, landmarks: Vec<Vec3>, t: f64) -> Result<Self, LieError> {
        Ok(TruthState { slam: SlamState::new(pose, landmarks)?, t })
    }

    pub fn pose(&self) -> &Pose {
        self.slam.pose()
    }

    pub fn landmarks(&self) -> &[Vec3] {
        self.slam.landmarks()
    }
}

/// Advances the truth one step: exact attitude exponential, Euler position
/// update, landmarks untouched.
pub fn truth_step(s: &TruthState, cfg: &ScenarioConfig, dt: f64) -> TruthState {
    let pose = s.pose();
    let rotation = pose.rotation * so3_exp(cfg.omega_true * dt);
    let position = pose.position + dt * (pose.rotation * cfg.v_true);
    TruthState {
        slam: SlamState::new(Pose::new(rotation, position), s.landmarks().to_vec())
            .expect("landmark count unchanged"),
        t: s.t + dt,
    }
}

/// The measured twist `U_m = U + b_U + n_U`. With `noise_std = 0` the
/// passthrough is exact.
pub fn measure_velocity(u_true: &Twist, cfg: &ScenarioConfig, rng: &mut impl Rng) -> Twist {
    let mut m = *u_true + cfg.bias_true;
    if cfg.noise_std > 0.0 {
        m.omega += cfg.noise_std * standard_normal_vec(rng);
        m.v += cfg.noise_std * standard_normal_vec(rng);
    }
    m
}

/// Body-frame landmark measurements `yᵢ = Rᵀ(pᵢ − P)`, noise-free unless the
/// scenario enables feature noise.
pub fn measure_landmarks(truth: &TruthState, cfg: &ScenarioConfig, rng: &mut impl Rng) -> Vec<Vec3> {
    let inv = truth.pose().inverse();
    truth
        .landmarks()
        .iter()
        .map(|p| {
            let mut y = inv.transform_point(p);
            if cfg.feature_noise_std > 0.0 {
                y += cfg.feature_noise_std * standard_normal_vec(rng);
            }
            y
        })
        .collect()
}

fn standard_normal_vec(rng: &mut impl Rng) -> Vec3 {
    Vec3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

/// The published simulation scenario: a circular trajectory above four
/// coplanar features, biased and noisy velocity measurements.
pub fn paper_scenario() -> ScenarioConfig {
    ScenarioConfig {
        omega_true: Vec3::new(0.0, 0.0, 0.2),
        v_true: Vec3::new(1.8, 0.0, 0.0),
        r0: Rotation::identity(),
        p0: Vec3::new(0.0, 0.0, 3.0),
        landmarks_true: vec![
            Vec3::new(8.0, 8.0, 0.0),
            Vec3::new(-8.0, 8.0, 0.0),
            Vec3::new(8.0, -8.0, 0.0),
            Vec3::new(-8.0, -8.0, 0.0),
        ],
        bias_true: Twist::new(Vec3::new(0.09, 0.1, -0.1), Vec3::new(0.2, 0.2, -0.2)),
        noise_std: 0.2,
        feature_noise_std: 0.0,
        duration: 40.0,
        dt: 1e-3,
        seed: 42,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::PI;

    #[test]
    fn zero_twist_leaves_state_unchanged() {
        let mut cfg = paper_scenario();
        cfg.omega_true = Vec3::zeros();
        cfg.v_true = Vec3::zeros();
        let s0 = cfg.initial_truth().unwrap();
        let s1 = truth_step(&s0, &cfg, 1e-3);
        assert_abs_diff_eq!(*s1.pose().rotation.matrix(), *s0.pose().rotation.matrix(), epsilon = 0.0);
        assert_eq!(s1.pose().position, s0.pose().position);
        assert_eq!(s1.landmarks(), s0.landmarks());
    }

    #[test]
    fn landmarks_are_static() {
        let cfg = paper_scenario();
        let mut s = cfg.initial_truth().unwrap();
        for _ in 0..100 {
            s = truth_step(&s, &cfg, cfg.dt);
        }
        assert_eq!(s.landmarks(), cfg.landmarks_true.as_slice());
    }

    /// Closed form for the constant-twist motion: `R(t) = exp(t[Ω]ₓ)` and a
    /// circle of radius ‖V‖/‖Ω‖ = 9 m about [0, 9, 3].
    #[test]
    fn truth_follows_closed_form_circle() {
        let cfg = paper_scenario();
        let dt = cfg.dt;
        let mut s = cfg.initial_truth().unwrap();
        let half_period = 5.0 * PI; // heading flips by π at Ω_z = 0.2
        let steps = (half_period / dt).round() as usize;
        let mut max_circle_dev: f64 = 0.0;
        for _ in 0..steps {
            s = truth_step(&s, &cfg, dt);
            let p = s.pose().position;
            let radial = (p.x * p.x + (p.y - 9.0) * (p.y - 9.0)).sqrt();
            let dev = ((radial - 9.0).powi(2) + (p.z - 3.0).powi(2)).sqrt();
            max_circle_dev = max_circle_dev.max(dev);
        }
        assert!(max_circle_dev < 1e-3, "circle deviation {max_circle_dev}");
        let expected_heading = so3_exp(Vec3::new(0.0, 0.0, 0.2) * s.t);
        assert_abs_diff_eq!(
            *s.pose().rotation.matrix(),
            *expected_heading.matrix(),
            epsilon = 1e-9
        );
        // Rotated by π about z relative to the start.
        assert_abs_diff_eq!(s.pose().rotation.matrix()[(0, 0)], -1.0, epsilon = 1e-3);
    }

    #[test]
    fn velocity_measurement_is_exact_without_noise() {
        let mut cfg = paper_scenario();
        cfg.noise_std = 0.0;
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        let m = measure_velocity(&cfg.twist_true(), &cfg, &mut rng);
        assert_eq!(m.omega, Vec3::new(0.09, 0.1, 0.1));
        assert_eq!(m.v, Vec3::new(2.0, 0.2, -0.2));

        let mut plain = cfg.clone();
        plain.bias_true = Twist::zero();
        let m = measure_velocity(&plain.twist_true(), &plain, &mut rng);
        assert_eq!(m, plain.twist_true());
    }

    #[test]
    fn noise_stream_is_reproducible() {
        let cfg = paper_scenario();
        let run = |seed: u64| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            (0..100)
                .map(|_| measure_velocity(&cfg.twist_true(), &cfg, &mut rng).as_vector())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(cfg.seed), run(cfg.seed));
        assert_ne!(run(cfg.seed), run(cfg.seed + 1));
    }

    #[test]
    fn landmark_measurements_match_direct_subtraction() {
        let cfg = paper_scenario();
        let mut rng = ChaCha12Rng::seed_from_u64(0);

        let identity = TruthState::new(Pose::identity(), cfg.landmarks_true.clone(), 0.0).unwrap();
        let y = measure_landmarks(&identity, &cfg, &mut rng);
        assert_eq!(y, cfg.landmarks_true);

        let hovering = cfg.initial_truth().unwrap();
        let y = measure_landmarks(&hovering, &cfg, &mut rng);
        assert_eq!(y[0], Vec3::new(8.0, 8.0, -3.0));
    }

    /// `T·ȳᵢ` reconstructs `p̄ᵢ` along the whole trajectory.
    #[test]
    fn measurement_pose_round_trip() {
        let cfg = paper_scenario();
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        let mut s = cfg.initial_truth().unwrap();
        for _ in 0..500 {
            s = truth_step(&s, &cfg, 0.01);
        }
        let y = measure_landmarks(&s, &cfg, &mut rng);
        for (yi, pi) in y.iter().zip(s.landmarks()) {
            assert_abs_diff_eq!(s.pose().transform_point(yi), *pi, epsilon = 1e-12);
        }
    }

    #[test]
    fn validation_rejects_degenerate_scenarios() {
        let mut cfg = paper_scenario();
        assert!(cfg.validate().is_ok());

        cfg.landmarks_true.truncate(2);
        assert!(matches!(cfg.validate(), Err(ScenarioError::TooFewLandmarks { n: 2 })));

        cfg.landmarks_true = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(2.0, 2.0, 2.0),
        ];
        assert!(matches!(cfg.validate(), Err(ScenarioError::CollinearLandmarks)));

        let mut cfg = paper_scenario();
        cfg.dt = 0.0;
        assert!(matches!(cfg.validate(), Err(ScenarioError::Invalid(_))));
        let mut cfg = paper_scenario();
        cfg.duration = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn paper_scenario_values() {
        let cfg = paper_scenario();
        assert_eq!(cfg.omega_true, Vec3::new(0.0, 0.0, 0.2));
        assert_eq!(cfg.noise_std, 0.2);
        assert_eq!(cfg.landmarks_true.len(), 4);
        assert_eq!(cfg.bias_true.as_vector().as_slice(), [0.09, 0.1, -0.1, 0.2, 0.2, -0.2]);
        cfg.validate().unwrap();
    }
}
