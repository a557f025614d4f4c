//! Prescribed performance envelopes and the constrained ↔ unconstrained
//! error transformation.
//!
//! An envelope is a decaying bound `ξ(t) = (ξ⁰ − ξ^∞)·exp(−ℓt) + ξ^∞`
//! assigned to one scalar error component. While the component stays inside
//! `(−δ̲·ξ, δ̄·ξ)` it maps through a smooth invertible transform to an
//! unconstrained variable `E`; the transform's logarithm blows up at the
//! boundary, so `E` staying bounded is equivalent to the error respecting
//! the envelope.

use crate::lie::{Mat3, Vec3};
use crate::tolerances;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PpfError {
    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),
    #[error("normalized error {ratio} outside the open interval ({lower}, {upper})")]
    EnvelopeViolation { ratio: f64, lower: f64, upper: f64 },
}

/// Raw envelope parameters as they appear in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub xi0: f64,
    pub xi_inf: f64,
    pub ell: f64,
    pub delta_bar: f64,
    pub delta_under: f64,
}

/// A validated performance envelope for one error component.
///
/// Invariants: `ξ⁰ > ξ^∞ > 0`, `ℓ > 0`, `δ̄, δ̲ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnvelopeParams", into = "EnvelopeParams")]
pub struct PerformanceEnvelope {
    xi0: f64,
    xi_inf: f64,
    ell: f64,
    delta_bar: f64,
    delta_under: f64,
}

impl TryFrom<EnvelopeParams> for PerformanceEnvelope {
    type Error = PpfError;
    fn try_from(p: EnvelopeParams) -> Result<Self, PpfError> {
        PerformanceEnvelope::asymmetric(p.xi0, p.xi_inf, p.ell, p.delta_bar, p.delta_under)
    }
}

impl From<PerformanceEnvelope> for EnvelopeParams {
    fn from(e: PerformanceEnvelope) -> EnvelopeParams {
        EnvelopeParams {
            xi0: e.xi0,
            xi_inf: e.xi_inf,
            ell: e.ell,
            delta_bar: e.delta_bar,
            delta_under: e.delta_under,
        }
    }
}

impl PerformanceEnvelope {
    /// The configuration the convergence theorem covers: `δ̄ = δ̲`.
    pub fn symmetric(xi0: f64, xi_inf: f64, ell: f64, delta: f64) -> Result<Self, PpfError> {
        Self::asymmetric(xi0, xi_inf, ell, delta, delta)
    }

    /// Distinct bounds `δ̄ ≠ δ̲`. Experimental: the roles of the two deltas
    /// swap with the sign of the initial error and nothing here automates
    /// that, so prefer [`PerformanceEnvelope::symmetric`].
    pub fn asymmetric(
        xi0: f64,
        xi_inf: f64,
        ell: f64,
        delta_bar: f64,
        delta_under: f64,
    ) -> Result<Self, PpfError> {
        if !(xi0.is_finite() && xi_inf.is_finite() && ell.is_finite()) {
            return Err(PpfError::InvalidEnvelope("non-finite parameter".into()));
        }
        if xi_inf <= 0.0 || xi0 <= xi_inf {
            return Err(PpfError::InvalidEnvelope(format!(
                "need xi0 > xi_inf > 0, got xi0 = {xi0}, xi_inf = {xi_inf}"
            )));
        }
        if ell <= 0.0 {
            return Err(PpfError::InvalidEnvelope(format!("need ell > 0, got {ell}")));
        }
        if delta_bar <= 0.0 || delta_under <= 0.0 {
            return Err(PpfError::InvalidEnvelope(format!(
                "need positive deltas, got delta_bar = {delta_bar}, delta_under = {delta_under}"
            )));
        }
        Ok(PerformanceEnvelope { xi0, xi_inf, ell, delta_bar, delta_under })
    }

    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    pub fn xi_inf(&self) -> f64 {
        self.xi_inf
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn delta_bar(&self) -> f64 {
        self.delta_bar
    }

    pub fn delta_under(&self) -> f64 {
        self.delta_under
    }

    /// `ξ(t)`: strictly decreasing from `ξ⁰` to `ξ^∞`.
    pub fn value_at(&self, t: f64) -> f64 {
        (self.xi0 - self.xi_inf) * (-self.ell * t).exp() + self.xi_inf
    }

    /// `ξ̇(t) = −ℓ·(ξ⁰ − ξ^∞)·exp(−ℓt)`.
    pub fn rate_at(&self, t: f64) -> f64 {
        -self.ell * (self.xi0 - self.xi_inf) * (-self.ell * t).exp()
    }

    /// The absolute error bound `δ̄·ξ(t)` (upper side).
    pub fn bound_at(&self, t: f64) -> f64 {
        self.delta_bar * self.value_at(t)
    }

    /// The smooth map `F(E) = (δ̄·eᴱ − δ̲·e⁻ᴱ)/(eᴱ + e⁻ᴱ)`: strictly
    /// increasing, bounded in `(−δ̲, δ̄)`, equal to `δ·tanh(E)` when
    /// `δ̄ = δ̲ = δ`.
    pub fn smooth_transform(&self, big_e: f64) -> f64 {
        // Evaluated through exp(−2|E|) so large |E| saturates instead of
        // overflowing.
        if big_e >= 0.0 {
            let w = (-2.0 * big_e).exp();
            (self.delta_bar - self.delta_under * w) / (1.0 + w)
        } else {
            let w = (2.0 * big_e).exp();
            (self.delta_bar * w - self.delta_under) / (w + 1.0)
        }
    }

    /// Inverse transform `E = ½·ln((δ̲ + e/ξ)/(δ̄ − e/ξ))`.
    ///
    /// Fails with [`PpfError::EnvelopeViolation`] when `e/ξ` falls outside
    /// the guarded open interval — the error has left (or started outside)
    /// its envelope.
    pub fn inverse_transform(&self, e: f64, xi: f64) -> Result<f64, PpfError> {
        let ratio = self.checked_ratio(e, xi)?;
        Ok(0.5 * ((self.delta_under + ratio) / (self.delta_bar - ratio)).ln())
    }

    /// `η = (1/2ξ)·(1/(δ̲ + e/ξ) + 1/(δ̄ − e/ξ))`, the positive weight the
    /// transformed-error dynamics pick up from the chain rule. Equals the
    /// derivative of [`Self::inverse_transform`] with respect to `e`.
    pub fn eta(&self, e: f64, xi: f64) -> Result<f64, PpfError> {
        let ratio = self.checked_ratio(e, xi)?;
        Ok((1.0 / (self.delta_under + ratio) + 1.0 / (self.delta_bar - ratio)) / (2.0 * xi))
    }

    fn checked_ratio(&self, e: f64, xi: f64) -> Result<f64, PpfError> {
        let guard = 1.0 - tolerances::ENVELOPE_GUARD_REL;
        let upper = self.delta_bar * guard;
        let lower = -self.delta_under * guard;
        let ratio = e / xi;
        // Inverted comparison also traps NaN.
        if !(ratio > lower && ratio < upper) {
            return Err(PpfError::EnvelopeViolation {
                ratio,
                lower: -self.delta_under,
                upper: self.delta_bar,
            });
        }
        Ok(ratio)
    }
}

/// How envelopes are derived from the initial error of each component:
/// `ξ⁰ = δ̄ = δ̲ = slope·|e(0)| + offset`, with shared `ξ^∞` and `ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRule {
    pub slope: f64,
    pub offset: f64,
    pub xi_inf: f64,
    pub ell: f64,
}

impl Default for EnvelopeRule {
    fn default() -> Self {
        EnvelopeRule { slope: 1.2, offset: 1.8, xi_inf: 0.1, ell: 1.0 }
    }
}

impl EnvelopeRule {
    pub fn envelope_for(&self, e0: f64) -> Result<PerformanceEnvelope, PpfError> {
        let xi0 = self.slope * e0.abs() + self.offset;
        PerformanceEnvelope::symmetric(xi0, self.xi_inf, self.ell, xi0)
    }
}

/// Envelope from one component's initial error under the default rule
/// (`1.2·|e(0)| + 1.8`, `ξ^∞ = 0.1`, `ℓ = 1`).
pub fn envelope_from_initial_error(e0: f64) -> Result<PerformanceEnvelope, PpfError> {
    EnvelopeRule::default().envelope_for(e0)
}

/// The diagonal pair `(Λ, μ)` for one landmark's three components at time
/// `t`: `Λ = diag(η₁, η₂, η₃)` and `μ = diag(ξ̇₁/ξ₁, ξ̇₂/ξ₂, ξ̇₃/ξ₃)`.
pub fn lambda_mu(
    envs: &[PerformanceEnvelope; 3],
    e: &Vec3,
    t: f64,
) -> Result<(Mat3, Mat3), PpfError> {
    let mut lambda = Mat3::zeros();
    let mut mu = Mat3::zeros();
    for k in 0..3 {
        let xi = envs[k].value_at(t);
        lambda[(k, k)] = envs[k].eta(e[k], xi)?;
        mu[(k, k)] = envs[k].rate_at(t) / xi;
    }
    Ok((lambda, mu))
}

/// The transformed error vector `Eᵢ` for one landmark at time `t`.
pub fn transformed_error(
    envs: &[PerformanceEnvelope; 3],
    e: &Vec3,
    t: f64,
) -> Result<Vec3, PpfError> {
    let mut big_e = Vec3::zeros();
    for k in 0..3 {
        let xi = envs[k].value_at(t);
        big_e[k] = envs[k].inverse_transform(e[k], xi)?;
    }
    Ok(big_e)
}

/// Per-landmark, per-component envelope table for a scenario with `n`
/// landmarks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSet {
    per_landmark: Vec<[PerformanceEnvelope; 3]>,
}

impl EnvelopeSet {
    pub fn new(per_landmark: Vec<[PerformanceEnvelope; 3]>) -> Self {
        EnvelopeSet { per_landmark }
    }

    /// Builds the table from the initial error of every component.
    pub fn from_initial_errors(e0: &[Vec3], rule: &EnvelopeRule) -> Result<Self, PpfError> {
        let per_landmark = e0
            .iter()
            .map(|e| {
                Ok([
                    rule.envelope_for(e.x)?,
                    rule.envelope_for(e.y)?,
                    rule.envelope_for(e.z)?,
                ])
            })
            .collect::<Result<Vec<_>, PpfError>>()?;
        Ok(EnvelopeSet { per_landmark })
    }

    pub fn landmark(&self, i: usize) -> &[PerformanceEnvelope; 3] {
        &self.per_landmark[i]
    }

    pub fn landmark_count(&self) -> usize {
        self.per_landmark.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[PerformanceEnvelope; 3]> {
        self.per_landmark.iter()
    }
}
