//! Rigid-body state spaces: SO(3), SE(3), unit quaternions, and the product
//! group pairing a pose with a set of landmark points.
//!
//! Everything here is an immutable value and every operation is a pure
//! function, so the types are freely shared across threads.

mod quat;
mod se3;
mod so3;

pub use quat::{quat_exp, UnitQuat};
pub use se3::{wedge, HomogeneousPoint, Pose, SlamState, Twist};
pub use so3::{project_to_rotation, skew, so3_exp, vee, Rotation};

use thiserror::Error;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Vec4 = nalgebra::Vector4<f64>;
pub type Vec6 = nalgebra::Vector6<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
pub type Mat4 = nalgebra::Matrix4<f64>;
pub type Mat6 = nalgebra::Matrix6<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("matrix is not antisymmetric: max |M + Mᵀ| = {defect:e}")]
    NonAntisymmetric { defect: f64 },
    #[error("quaternion norm {norm} is not 1 within tolerance")]
    NonUnitQuaternion { norm: f64 },
    #[error("determinant {det} is not positive; no nearby rotation exists")]
    DegenerateMatrix { det: f64 },
    #[error("matrix fails rotation invariants: orthonormality defect {defect:e}")]
    NotARotation { defect: f64 },
    #[error("a SLAM state needs at least 3 landmarks, got {n}")]
    InsufficientLandmarks { n: usize },
}
