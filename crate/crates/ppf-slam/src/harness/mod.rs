//! Co-simulation harness: drives the truth world and the observer on one
//! time grid, logs plot-ready time series, and summarizes metrics.
//!
//! Determinism contract: a configuration (including its seed) fully
//! determines every emitted byte on a given platform. The noise generator is
//! pinned to ChaCha12 seeded with the scenario seed.

pub mod config;
pub mod log;
pub mod metrics;

pub use config::{Backend, EnvelopeSpec, ExperimentConfig, GammaSpec, LoggingSpec, ObserverSpec,
    ScenarioSpec};
pub use log::{emit_csv, read_csv, LogRow, RunLog};
pub use metrics::RunMetrics;

use crate::lie::{Pose, Twist, Vec3};
use crate::observer::{
    self, diagnose, performance_margin, MeasurementFrame, ObserverError, ObserverGains,
    ObserverState, QuatObserverState, StepErrors,
};
use crate::ppf::EnvelopeSet;
use crate::sim::{self, ScenarioConfig};
use crate::tolerances;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("log format: {0}")]
    LogFormat(String),
    #[error("run failed at t = {t} s: {message}")]
    EnvelopeFailure { t: f64, message: String },
}

/// Why a run stopped early.
#[derive(Debug)]
pub struct RunFailure {
    pub t: f64,
    pub error: ObserverError,
}

/// Everything a run produces: the full log, its metrics, any warnings worth
/// surfacing, and the failure that aborted it, if one did.
#[derive(Debug)]
pub struct RunOutcome {
    pub log: RunLog,
    pub metrics: RunMetrics,
    pub warnings: Vec<String>,
    pub failure: Option<RunFailure>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.metrics.envelope_violation_count == 0
    }
}

/// Either backend's state behind one stepping interface.
enum BackendState {
    Matrix(ObserverState),
    Quaternion(QuatObserverState),
}

impl BackendState {
    fn initial(spec: &ObserverSpec, n: usize) -> Result<Self, HarnessError> {
        Ok(match spec.backend {
            Backend::Matrix => BackendState::Matrix(spec.initial_state(n)?),
            Backend::Quaternion => BackendState::Quaternion(spec.initial_quat_state(n)?),
        })
    }

    fn pose(&self) -> Pose {
        match self {
            BackendState::Matrix(s) => *s.pose(),
            BackendState::Quaternion(s) => s.pose(),
        }
    }

    fn landmarks(&self) -> &[Vec3] {
        match self {
            BackendState::Matrix(s) => s.landmarks(),
            BackendState::Quaternion(s) => s.landmarks(),
        }
    }

    fn bias(&self) -> Twist {
        match self {
            BackendState::Matrix(s) => *s.bias(),
            BackendState::Quaternion(s) => *s.bias(),
        }
    }

    fn step(
        &self,
        frame: &MeasurementFrame,
        envelopes: &EnvelopeSet,
        gains: &ObserverGains,
        dt: f64,
    ) -> Result<(Self, StepErrors), ObserverError> {
        Ok(match self {
            BackendState::Matrix(s) => {
                let (next, errors) = observer::step(s, frame, envelopes, gains, dt)?;
                (BackendState::Matrix(next), errors)
            }
            BackendState::Quaternion(s) => {
                let (next, errors) = observer::quaternion_step(s, frame, envelopes, gains, dt)?;
                (BackendState::Quaternion(next), errors)
            }
        })
    }
}

struct TimeGrid {
    dt: f64,
    n_steps: u64,
    steps_per_log: u64,
}

fn time_grid(scenario: &ScenarioConfig, logging: &LoggingSpec) -> Result<TimeGrid, HarnessError> {
    let ratio = logging.interval / scenario.dt;
    let steps_per_log = ratio.round();
    if steps_per_log < 1.0 || (ratio - steps_per_log).abs() > tolerances::LOG_INTERVAL_DIVISIBILITY
    {
        return Err(HarnessError::Config(format!(
            "logging interval {} is not an integer multiple of dt {}",
            logging.interval, scenario.dt
        )));
    }
    Ok(TimeGrid {
        dt: scenario.dt,
        n_steps: (scenario.duration / scenario.dt + 1e-9).floor() as u64,
        steps_per_log: steps_per_log as u64,
    })
}

/// Co-simulates truth and observer over the configured grid.
///
/// An envelope violation stops the run and is reported in the outcome (with
/// the log up to the preceding row intact for post-mortem); it is not a
/// `HarnessError`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome, HarnessError> {
    let started = Instant::now();
    let scenario = cfg.scenario.to_domain()?;
    let n = scenario.landmarks_true.len();
    let gains = cfg.observer.gains(n)?;
    let grid = time_grid(&scenario, &cfg.logging)?;

    let mut truth = scenario
        .initial_truth()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut state = BackendState::initial(&cfg.observer, n)?;
    let mut rng = ChaCha12Rng::seed_from_u64(scenario.seed);

    let mut outcome = RunOutcome {
        log: RunLog::new(cfg.observer.backend, n),
        metrics: RunMetrics::from_log(&RunLog::new(cfg.observer.backend, n)),
        warnings: Vec::new(),
        failure: None,
    };

    let mut envelopes: Option<EnvelopeSet> = None;
    let mut prev_lyapunov: Option<f64> = None;
    let mut max_lyapunov_increase = 0.0f64;

    for k in 0..=grid.n_steps {
        let t = k as f64 * grid.dt;
        let u_m = sim::measure_velocity(&scenario.twist_true(), &scenario, &mut rng);
        let y = sim::measure_landmarks(&truth, &scenario, &mut rng);
        let frame = MeasurementFrame { u_m, y, t };

        if envelopes.is_none() {
            let set = build_envelopes(cfg, &state, &frame)?;
            let margin = performance_margin(&gains, &set);
            if margin <= 0.0 {
                outcome.warnings.push(format!(
                    "gain condition k_p > k̄_δ·k̄_ξ·|μ̄| not met (margin {margin:.3}); \
                     the sufficient bound is conservative, continuing"
                ));
            }
            envelopes = Some(set);
        }
        let envelopes = envelopes.as_ref().expect("built on first iteration");

        // One step computes the errors at t; the final iteration only wants
        // those errors and discards the advanced state.
        let (next, errors) = match state.step(&frame, envelopes, &gains, grid.dt) {
            Ok(pair) => pair,
            Err(error) => {
                outcome.failure = Some(RunFailure { t, error });
                break;
            }
        };

        let est_pose = state.pose();
        let est_bias = state.bias();
        let diag = diagnose(
            &errors,
            &est_pose,
            &est_bias,
            truth.pose(),
            &scenario.bias_true,
            &gains,
        );
        if let Some(prev) = prev_lyapunov {
            max_lyapunov_increase = max_lyapunov_increase.max(diag.lyapunov - prev);
        }
        prev_lyapunov = Some(diag.lyapunov);

        if k % grid.steps_per_log == 0 {
            outcome.log.rows.push(LogRow {
                t,
                truth_pose: *truth.pose(),
                est_pose,
                truth_landmarks: truth.landmarks().to_vec(),
                est_landmarks: state.landmarks().to_vec(),
                bound: bounds_at(envelopes, t),
                e: diag.e,
                transformed: diag.transformed,
                bias_est: est_bias,
                bias_err: diag.b_tilde,
                lyapunov: diag.lyapunov,
            });
        }

        if k < grid.n_steps {
            state = next;
            truth = sim::truth_step(&truth, &scenario, grid.dt);
        }
    }

    outcome.metrics = RunMetrics::from_log(&outcome.log);
    outcome.metrics.wall_clock_seconds = Some(started.elapsed().as_secs_f64());
    outcome.metrics.max_lyapunov_step_increase = Some(max_lyapunov_increase);
    Ok(outcome)
}

fn build_envelopes(
    cfg: &ExperimentConfig,
    state: &BackendState,
    frame: &MeasurementFrame,
) -> Result<EnvelopeSet, HarnessError> {
    let pose = state.pose();
    let e0: Vec<Vec3> = state
        .landmarks()
        .iter()
        .zip(&frame.y)
        .map(|(p_hat, y)| observer::landmark_error(&pose, p_hat, y))
        .collect();
    cfg.envelope.build(&e0)
}

fn bounds_at(envelopes: &EnvelopeSet, t: f64) -> Vec<Vec3> {
    envelopes
        .iter()
        .map(|envs| Vec3::new(envs[0].bound_at(t), envs[1].bound_at(t), envs[2].bound_at(t)))
        .collect()
}

/// Sup-norm difference of one logged quantity between the two backends, and
/// when it peaked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantityDiff {
    pub max: f64,
    pub at_t: f64,
}

impl QuantityDiff {
    fn zero() -> Self {
        QuantityDiff { max: 0.0, at_t: 0.0 }
    }

    fn update(&mut self, value: f64, t: f64) {
        if value > self.max {
            self.max = value;
            self.at_t = t;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendComparison {
    pub rows_compared: usize,
    pub pose_rotation: QuantityDiff,
    pub pose_position: QuantityDiff,
    pub landmarks: QuantityDiff,
    pub bias: QuantityDiff,
}

/// Runs both backends on the same configuration (hence identical measurement
/// streams — the seed pins the noise) and reports trajectory differences.
pub fn compare_backends(cfg: &ExperimentConfig) -> Result<BackendComparison, HarnessError> {
    let mut matrix_cfg = cfg.clone();
    matrix_cfg.observer.backend = Backend::Matrix;
    let mut quat_cfg = cfg.clone();
    quat_cfg.observer.backend = Backend::Quaternion;

    let a = expect_pass(run(&matrix_cfg)?)?;
    let b = expect_pass(run(&quat_cfg)?)?;

    let mut cmp = BackendComparison {
        rows_compared: a.rows.len().min(b.rows.len()),
        pose_rotation: QuantityDiff::zero(),
        pose_position: QuantityDiff::zero(),
        landmarks: QuantityDiff::zero(),
        bias: QuantityDiff::zero(),
    };
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        let t = ra.t;
        cmp.pose_rotation.update(
            (ra.est_pose.rotation.matrix() - rb.est_pose.rotation.matrix()).norm(),
            t,
        );
        cmp.pose_position.update((ra.est_pose.position - rb.est_pose.position).norm(), t);
        for (la, lb) in ra.est_landmarks.iter().zip(&rb.est_landmarks) {
            cmp.landmarks.update((la - lb).norm(), t);
        }
        cmp.bias.update((ra.bias_est - rb.bias_est).norm(), t);
    }
    Ok(cmp)
}

fn expect_pass(outcome: RunOutcome) -> Result<RunLog, HarnessError> {
    if let Some(failure) = outcome.failure {
        return Err(HarnessError::EnvelopeFailure {
            t: failure.t,
            message: failure.error.to_string(),
        });
    }
    Ok(outcome.log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config(duration: f64, noise: bool) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::paper_scenario();
        cfg.scenario.duration = duration;
        if !noise {
            cfg.scenario.noise_std = 0.0;
        }
        cfg
    }

    #[test]
    fn zero_duration_logs_only_the_initial_row() {
        let outcome = run(&quick_config(0.0, false)).unwrap();
        assert_eq!(outcome.log.rows.len(), 1);
        assert_eq!(outcome.log.rows[0].t, 0.0);
        assert!(outcome.failure.is_none());
        assert_eq!(outcome.metrics.rows, 1);
        assert_eq!(outcome.metrics.envelope_violation_count, 0);
    }

    #[test]
    fn row_count_matches_duration_over_interval() {
        let mut cfg = quick_config(0.5, false);
        cfg.logging.interval = 0.01;
        let outcome = run(&cfg).unwrap();
        assert_eq!(outcome.log.rows.len(), 51);
        let last = outcome.log.rows.last().unwrap();
        assert!((last.t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn initial_errors_sit_inside_their_envelopes() {
        let outcome = run(&quick_config(0.1, false)).unwrap();
        let first = &outcome.log.rows[0];
        // e(0) = −y(0) with all estimates at zero: p₁ relative to P(0).
        assert_eq!(first.e[0], Vec3::new(-8.0, -8.0, 3.0));
        for (e, b) in first.e.iter().zip(&first.bound) {
            for k in 0..3 {
                assert!(e[k].abs() < b[k]);
            }
        }
        assert!(outcome.warnings.iter().any(|w| w.contains("gain condition")));
    }

    #[test]
    fn misaligned_log_interval_is_rejected() {
        let mut cfg = quick_config(0.1, false);
        cfg.logging.interval = 0.0015;
        assert!(matches!(run(&cfg), Err(HarnessError::Config(_))));
    }

    #[test]
    fn bad_initial_envelope_fails_at_t_zero() {
        let mut cfg = quick_config(0.1, false);
        // Explicit envelopes far too tight for the 8 m initial errors.
        let params = crate::ppf::EnvelopeParams {
            xi0: 1.0,
            xi_inf: 0.1,
            ell: 1.0,
            delta_bar: 1.0,
            delta_under: 1.0,
        };
        cfg.envelope = EnvelopeSpec::Explicit { per_component: vec![[params; 3]; 4] };
        let outcome = run(&cfg).unwrap();
        let failure = outcome.failure.as_ref().expect("tight envelopes must fail");
        assert_eq!(failure.t, 0.0);
        assert!(outcome.log.rows.is_empty());
        assert!(!outcome.passed());
    }

    #[test]
    fn identical_configs_reproduce_identical_logs() {
        let mut cfg = quick_config(0.2, true);
        cfg.logging.interval = 0.01;
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.log.rows, b.log.rows);
        let mut other_seed = cfg.clone();
        other_seed.scenario.seed += 1;
        let c = run(&other_seed).unwrap();
        assert_ne!(a.log.rows, c.log.rows);
    }

    #[test]
    fn compare_backends_zero_duration_is_exact() {
        let cmp = compare_backends(&quick_config(0.0, false)).unwrap();
        assert_eq!(cmp.rows_compared, 1);
        assert_eq!(cmp.pose_rotation.max, 0.0);
        assert_eq!(cmp.pose_position.max, 0.0);
        assert_eq!(cmp.landmarks.max, 0.0);
        assert_eq!(cmp.bias.max, 0.0);
    }
}
