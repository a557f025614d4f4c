//! JSON experiment configuration: one self-describing document per run.

use crate::lie::{Mat3, Mat6, Pose, Rotation, Twist, Vec3};
use crate::observer::{ObserverGains, ObserverState, QuatObserverState};
use crate::ppf::{EnvelopeParams, EnvelopeRule, EnvelopeSet, PerformanceEnvelope};
use crate::sim::{self, ScenarioConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use super::HarnessError;

/// Which attitude representation the observer integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Matrix,
    Quaternion,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Matrix => write!(f, "matrix"),
            Backend::Quaternion => write!(f, "quaternion"),
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "matrix" => Ok(Backend::Matrix),
            "quaternion" => Ok(Backend::Quaternion),
            other => Err(format!("unknown backend '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSpec,
    pub observer: ObserverSpec,
    pub envelope: EnvelopeSpec,
    #[serde(default)]
    pub logging: LoggingSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub omega_true: [f64; 3],
    pub v_true: [f64; 3],
    pub r0: [[f64; 3]; 3],
    pub p0: [f64; 3],
    pub landmarks_true: Vec<[f64; 3]>,
    pub bias_omega: [f64; 3],
    pub bias_v: [f64; 3],
    pub noise_std: f64,
    #[serde(default)]
    pub feature_noise_std: f64,
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSpec {
    pub backend: Backend,
    pub k_p: f64,
    pub k_w: f64,
    pub gamma: GammaSpec,
    /// One weight per landmark.
    pub alpha: Vec<f64>,
    pub r0_est: [[f64; 3]; 3],
    pub p0_est: [f64; 3],
    pub landmarks_est: Vec<[f64; 3]>,
    /// `[b̂_Ω; b̂_V]`.
    pub bias_est: [f64; 6],
}

/// `Γ` as either a scalar multiple of `I₆` or a full 6×6 matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Scalar(f64),
    Full([[f64; 6]; 6]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvelopeSpec {
    /// `ξ⁰ = δ̄ = δ̲ = slope·|e(0)| + offset` per component.
    FromInitialError {
        #[serde(default = "default_slope")]
        slope: f64,
        #[serde(default = "default_offset")]
        offset: f64,
        #[serde(default = "default_xi_inf")]
        xi_inf: f64,
        #[serde(default = "default_ell")]
        ell: f64,
    },
    /// Full per-landmark, per-component table.
    Explicit { per_component: Vec<[EnvelopeParams; 3]> },
}

fn default_slope() -> f64 {
    1.2
}
fn default_offset() -> f64 {
    1.8
}
fn default_xi_inf() -> f64 {
    0.1
}
fn default_ell() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoggingSpec {
    /// Seconds between log rows; must be an integer multiple of `dt`.
    pub interval: f64,
    pub out_dir: PathBuf,
}

impl Default for LoggingSpec {
    fn default() -> Self {
        LoggingSpec { interval: 0.01, out_dir: PathBuf::from("out") }
    }
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn vec3_arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn mat3(rows: &[[f64; 3]; 3]) -> Mat3 {
    Mat3::from_fn(|r, c| rows[r][c])
}

fn mat3_arr(m: &Mat3) -> [[f64; 3]; 3] {
    std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
}

impl ScenarioSpec {
    pub fn to_domain(&self) -> Result<ScenarioConfig, HarnessError> {
        let r0 = Rotation::from_matrix(mat3(&self.r0))
            .map_err(|e| HarnessError::Config(format!("scenario.r0: {e}")))?;
        let cfg = ScenarioConfig {
            omega_true: vec3(self.omega_true),
            v_true: vec3(self.v_true),
            r0,
            p0: vec3(self.p0),
            landmarks_true: self.landmarks_true.iter().map(|a| vec3(*a)).collect(),
            bias_true: Twist::new(vec3(self.bias_omega), vec3(self.bias_v)),
            noise_std: self.noise_std,
            feature_noise_std: self.feature_noise_std,
            duration: self.duration,
            dt: self.dt,
            seed: self.seed,
        };
        cfg.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_domain(cfg: &ScenarioConfig) -> Self {
        ScenarioSpec {
            omega_true: vec3_arr(&cfg.omega_true),
            v_true: vec3_arr(&cfg.v_true),
            r0: mat3_arr(cfg.r0.matrix()),
            p0: vec3_arr(&cfg.p0),
            landmarks_true: cfg.landmarks_true.iter().map(vec3_arr).collect(),
            bias_omega: vec3_arr(&cfg.bias_true.omega),
            bias_v: vec3_arr(&cfg.bias_true.v),
            noise_std: cfg.noise_std,
            feature_noise_std: cfg.feature_noise_std,
            duration: cfg.duration,
            dt: cfg.dt,
            seed: cfg.seed,
        }
    }
}

impl ObserverSpec {
    pub fn gains(&self, n_landmarks: usize) -> Result<ObserverGains, HarnessError> {
        if self.alpha.len() != n_landmarks {
            return Err(HarnessError::Config(format!(
                "observer.alpha has {} entries for {} landmarks",
                self.alpha.len(),
                n_landmarks
            )));
        }
        let gamma = match &self.gamma {
            GammaSpec::Scalar(g) => *g * Mat6::identity(),
            GammaSpec::Full(rows) => Mat6::from_fn(|r, c| rows[r][c]),
        };
        ObserverGains::new(self.k_p, self.k_w, gamma, self.alpha.clone())
            .map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn initial_state(&self, n_landmarks: usize) -> Result<ObserverState, HarnessError> {
        if self.landmarks_est.len() != n_landmarks {
            return Err(HarnessError::Config(format!(
                "observer.landmarks_est has {} entries for {} landmarks",
                self.landmarks_est.len(),
                n_landmarks
            )));
        }
        let r0 = Rotation::from_matrix(mat3(&self.r0_est))
            .map_err(|e| HarnessError::Config(format!("observer.r0_est: {e}")))?;
        let bias = Twist::new(
            Vec3::new(self.bias_est[0], self.bias_est[1], self.bias_est[2]),
            Vec3::new(self.bias_est[3], self.bias_est[4], self.bias_est[5]),
        );
        ObserverState::new(
            Pose::new(r0, vec3(self.p0_est)),
            self.landmarks_est.iter().map(|a| vec3(*a)).collect(),
            bias,
        )
        .map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn initial_quat_state(&self, n: usize) -> Result<QuatObserverState, HarnessError> {
        Ok(QuatObserverState::from_matrix_state(&self.initial_state(n)?))
    }
}

impl EnvelopeSpec {
    /// Builds the envelope table, deriving it from the initial errors when
    /// the rule asks for that.
    pub fn build(&self, e0: &[Vec3]) -> Result<EnvelopeSet, HarnessError> {
        match self {
            EnvelopeSpec::FromInitialError { slope, offset, xi_inf, ell } => {
                let rule = EnvelopeRule {
                    slope: *slope,
                    offset: *offset,
                    xi_inf: *xi_inf,
                    ell: *ell,
                };
                EnvelopeSet::from_initial_errors(e0, &rule)
                    .map_err(|e| HarnessError::Config(e.to_string()))
            }
            EnvelopeSpec::Explicit { per_component } => {
                if per_component.len() != e0.len() {
                    return Err(HarnessError::Config(format!(
                        "envelope table has {} landmarks, scenario has {}",
                        per_component.len(),
                        e0.len()
                    )));
                }
                let table = per_component
                    .iter()
                    .map(|row| {
                        Ok([
                            PerformanceEnvelope::try_from(row[0])?,
                            PerformanceEnvelope::try_from(row[1])?,
                            PerformanceEnvelope::try_from(row[2])?,
                        ])
                    })
                    .collect::<Result<Vec<_>, crate::ppf::PpfError>>()
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
                Ok(EnvelopeSet::new(table))
            }
        }
    }
}

impl ExperimentConfig {
    /// The published study configuration: circular trajectory over four
    /// coplanar landmarks, all estimates started at the origin, envelopes
    /// derived from the initial errors.
    pub fn paper_scenario() -> Self {
        let scenario = sim::paper_scenario();
        let n = scenario.landmarks_true.len();
        ExperimentConfig {
            scenario: ScenarioSpec::from_domain(&scenario),
            observer: ObserverSpec {
                backend: Backend::Matrix,
                k_p: 3.0,
                k_w: 3.0,
                gamma: GammaSpec::Scalar(10.0),
                alpha: vec![0.05; n],
                r0_est: mat3_arr(Rotation::identity().matrix()),
                p0_est: [0.0; 3],
                landmarks_est: vec![[0.0; 3]; n],
                bias_est: [0.0; 6],
            },
            envelope: EnvelopeSpec::FromInitialError {
                slope: 1.2,
                offset: 1.8,
                xi_inf: 0.1,
                ell: 1.0,
            },
            logging: LoggingSpec::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_config_round_trips_through_json() {
        let cfg = ExperimentConfig::paper_scenario();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
        // Scenario survives the domain conversion both ways.
        let domain = cfg.scenario.to_domain().unwrap();
        assert_eq!(ScenarioSpec::from_domain(&domain), cfg.scenario);
    }

    #[test]
    fn gamma_accepts_scalar_and_full_matrix() {
        let scalar: GammaSpec = serde_json::from_str("10.0").unwrap();
        assert_eq!(scalar, GammaSpec::Scalar(10.0));
        let full: GammaSpec = serde_json::from_str(
            "[[1,0,0,0,0,0],[0,1,0,0,0,0],[0,0,1,0,0,0],[0,0,0,1,0,0],[0,0,0,0,1,0],[0,0,0,0,0,1]]",
        )
        .unwrap();
        assert!(matches!(full, GammaSpec::Full(_)));
    }

    #[test]
    fn envelope_rule_defaults_apply() {
        let spec: EnvelopeSpec = serde_json::from_str(r#"{"rule":"from_initial_error"}"#).unwrap();
        match spec {
            EnvelopeSpec::FromInitialError { slope, offset, xi_inf, ell } => {
                assert_eq!((slope, offset, xi_inf, ell), (1.2, 1.8, 0.1, 1.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_rotation_is_a_config_error() {
        let mut cfg = ExperimentConfig::paper_scenario();
        cfg.scenario.r0[0][0] = 2.0;
        assert!(matches!(cfg.scenario.to_domain(), Err(HarnessError::Config(_))));
    }

    #[test]
    fn alpha_length_must_match() {
        let cfg = ExperimentConfig::paper_scenario();
        assert!(cfg.observer.gains(5).is_err());
        assert!(cfg.observer.gains(4).is_ok());
    }
}
