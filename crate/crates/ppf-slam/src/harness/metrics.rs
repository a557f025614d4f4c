//! Scalar summary of a run, computable from a live run or an existing log.

use super::log::RunLog;
use crate::observer::pose_error;
use serde::{Deserialize, Serialize};

/// How many trailing seconds the steady-state error window covers.
const TAIL_WINDOW: f64 = 10.0;
/// How many trailing seconds the pose-settling window covers.
const DRIFT_WINDOW: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Log rows where any `|eᵢₖ|` reached its envelope bound.
    pub envelope_violation_count: u64,
    /// `max |eᵢₖ(t)|` over the last [`TAIL_WINDOW`] seconds of the log.
    pub max_error_tail: f64,
    /// `‖b̃_U‖` at the final row.
    pub bias_error_final: f64,
    /// `max ‖R̃(t) − R̃(t_end)‖_F` over the last [`DRIFT_WINDOW`] seconds.
    pub pose_drift_rotation: f64,
    /// `max ‖P̃(t) − P̃(t_end)‖` over the same window.
    pub pose_drift_position: f64,
    /// Wall-clock runtime of the simulation loop; absent when metrics are
    /// recomputed from a stored log.
    pub wall_clock_seconds: Option<f64>,
    /// Largest per-step increase of the Lyapunov value, tracked at full step
    /// resolution during a live run; absent on recompute (logs are
    /// decimated).
    pub max_lyapunov_step_increase: Option<f64>,
    pub rows: usize,
}

impl RunMetrics {
    /// Everything derivable from the log alone.
    pub fn from_log(log: &RunLog) -> Self {
        let rows = &log.rows;
        let mut violations = 0u64;
        for row in rows {
            let breached = row
                .e
                .iter()
                .zip(&row.bound)
                .any(|(e, b)| (0..3).any(|k| e[k].abs() >= b[k]));
            if breached {
                violations += 1;
            }
        }

        let t_end = rows.last().map(|r| r.t).unwrap_or(0.0);
        let mut max_error_tail = 0.0f64;
        for row in rows.iter().filter(|r| r.t >= t_end - TAIL_WINDOW) {
            for e in &row.e {
                max_error_tail = max_error_tail.max(e.abs().max());
            }
        }

        let bias_error_final = rows.last().map(|r| r.bias_err.norm()).unwrap_or(0.0);

        let mut pose_drift_rotation = 0.0f64;
        let mut pose_drift_position = 0.0f64;
        if let Some(last) = rows.last() {
            let (r_end, p_end) = pose_error(&last.truth_pose, &last.est_pose);
            for row in rows.iter().filter(|r| r.t >= t_end - DRIFT_WINDOW) {
                let (r_t, p_t) = pose_error(&row.truth_pose, &row.est_pose);
                pose_drift_rotation =
                    pose_drift_rotation.max((r_t.matrix() - r_end.matrix()).norm());
                pose_drift_position = pose_drift_position.max((p_t - p_end).norm());
            }
        }

        RunMetrics {
            envelope_violation_count: violations,
            max_error_tail,
            bias_error_final,
            pose_drift_rotation,
            pose_drift_position,
            wall_clock_seconds: None,
            max_lyapunov_step_increase: None,
            rows: rows.len(),
        }
    }
}
