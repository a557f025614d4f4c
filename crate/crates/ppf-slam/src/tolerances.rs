//! Central tolerance table.
//!
//! Every tolerance the library enforces at runtime lives here, so the test
//! suite and the library agree bit-for-bit on what passes. Tests import these
//! constants instead of redeclaring them.

/// Orthonormality defect allowed on a rotation matrix: `‖R·Rᵀ − I‖` and
/// `|det R − 1|` must both stay below this.
pub const ROTATION_ORTHONORMALITY: f64 = 1e-9;

/// Antisymmetry defect allowed on the input of [`crate::lie::vee`]:
/// `‖M + Mᵀ‖_max` must stay below this.
pub const ANTISYMMETRY: f64 = 1e-9;

/// Below this rotation-vector norm the exponential map switches to its
/// second-order series; avoids the 0/0 in `sin θ / θ`.
pub const SMALL_ANGLE: f64 = 1e-8;

/// A quaternion handed in from outside must have `|‖Q‖ − 1|` below this.
pub const QUATERNION_UNIT_INPUT: f64 = 1e-9;

/// Norm drift a stored quaternion may accumulate before renormalization is
/// considered broken (internal invariant, checked in tests).
pub const QUATERNION_UNIT_NORM: f64 = 1e-12;

/// Relative guard band on the open envelope interval `(−δ̲, δ̄)`. Normalized
/// errors within this relative distance of the boundary are treated as
/// violations instead of feeding the logarithm a near-singularity.
pub const ENVELOPE_GUARD_REL: f64 = 1e-12;

/// Diagonal floor below which a Λ matrix counts as singular. Unreachable on
/// the valid envelope domain; guards the reciprocal in the landmark update.
pub const LAMBDA_FLOOR: f64 = 1e-300;

/// How far from an exact integer `log_interval / dt` may fall and still count
/// as "dt divides the logging interval".
pub const LOG_INTERVAL_DIVISIBILITY: f64 = 1e-9;
