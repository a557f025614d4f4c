//! Rigid-body poses, twists, the wedge map, and the pose–landmark product
//! state.

use super::so3::{skew, Rotation};
use super::{LieError, Mat4, Mat6, Vec3, Vec4, Vec6};

/// Stacked angular and translational velocity `[Ω; V]`, expressed in the
/// body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist {
    /// Angular velocity, rad/s.
    pub omega: Vec3,
    /// Translational velocity, m/s.
    pub v: Vec3,
}

impl Twist {
    pub fn new(omega: Vec3, v: Vec3) -> Self {
        Twist { omega, v }
    }

    pub fn zero() -> Self {
        Twist::default()
    }

    pub fn from_vector(u: Vec6) -> Self {
        Twist {
            omega: Vec3::new(u[0], u[1], u[2]),
            v: Vec3::new(u[3], u[4], u[5]),
        }
    }

    pub fn as_vector(&self) -> Vec6 {
        Vec6::new(
            self.omega.x, self.omega.y, self.omega.z, self.v.x, self.v.y, self.v.z,
        )
    }

    pub fn norm(&self) -> f64 {
        self.as_vector().norm()
    }
}

impl std::ops::Add for Twist {
    type Output = Twist;
    fn add(self, rhs: Twist) -> Twist {
        Twist::new(self.omega + rhs.omega, self.v + rhs.v)
    }
}

impl std::ops::Sub for Twist {
    type Output = Twist;
    fn sub(self, rhs: Twist) -> Twist {
        Twist::new(self.omega - rhs.omega, self.v - rhs.v)
    }
}

impl std::ops::Mul<Twist> for f64 {
    type Output = Twist;
    fn mul(self, rhs: Twist) -> Twist {
        Twist::new(self * rhs.omega, self * rhs.v)
    }
}

/// The 4×4 Lie-algebra form of a twist: `[[Ω]ₓ V; 0 0]`.
pub fn wedge(u: &Twist) -> Mat4 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew(u.omega));
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&u.v);
    m
}

/// A rigid-body pose: rotation plus position, the homogeneous 4×4 form of
/// which has last row `[0 0 0 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Rotation,
    pub position: Vec3,
}

impl Pose {
    pub fn new(rotation: Rotation, position: Vec3) -> Self {
        Pose { rotation, position }
    }

    pub fn identity() -> Self {
        Pose::new(Rotation::identity(), Vec3::zeros())
    }

    pub fn homogeneous(&self) -> Mat4 {
        let mut m = Mat4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.position);
        m
    }

    /// `T⁻¹ = [Rᵀ, −RᵀP; 0, 1]`.
    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose::new(rt, -(rt * self.position))
    }

    /// Applies the pose to a point: `R·p + P`.
    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * *p + self.position
    }

    /// The 6×6 augmented adjoint `[[R, 0], [[P]ₓR, R]]`, acting on twists so
    /// that `wedge(Ad·U) = T·wedge(U)·T⁻¹`.
    pub fn aug_adjoint(&self) -> Mat6 {
        let r = self.rotation.matrix();
        let mut ad = Mat6::zeros();
        ad.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
        ad.fixed_view_mut::<3, 3>(3, 0).copy_from(&(skew(self.position) * r));
        ad.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
        ad
    }
}

impl std::ops::Mul<Pose> for Pose {
    type Output = Pose;
    fn mul(self, rhs: Pose) -> Pose {
        Pose::new(
            self.rotation * rhs.rotation,
            self.rotation * rhs.position + self.position,
        )
    }
}

impl std::ops::Mul<HomogeneousPoint> for Pose {
    type Output = HomogeneousPoint;
    fn mul(self, rhs: HomogeneousPoint) -> HomogeneousPoint {
        HomogeneousPoint {
            p: self.rotation * rhs.p + rhs.w * self.position,
            w: rhs.w,
        }
    }
}

/// A 4-vector `[p; w]` with `w = 1` for points and `w = 0` for tangent
/// directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousPoint {
    pub p: Vec3,
    pub w: f64,
}

impl HomogeneousPoint {
    /// A point, `w = 1`.
    pub fn point(p: Vec3) -> Self {
        HomogeneousPoint { p, w: 1.0 }
    }

    /// A tangent direction, `w = 0`.
    pub fn tangent(p: Vec3) -> Self {
        HomogeneousPoint { p, w: 0.0 }
    }

    pub fn as_vector(&self) -> Vec4 {
        Vec4::new(self.p.x, self.p.y, self.p.z, self.w)
    }
}

/// A pose together with `n ≥ 3` landmark points — one element of the product
/// group the observer evolves on.
#[derive(Debug, Clone, PartialEq)]
pub struct SlamState {
    pose: Pose,
    landmarks: Vec<Vec3>,
}

impl SlamState {
    /// At least three landmarks are required (enough to define a plane).
    pub fn new(pose: Pose, landmarks: Vec<Vec3>) -> Result<Self, LieError> {
        if landmarks.len() < 3 {
            return Err(LieError::InsufficientLandmarks { n: landmarks.len() });
        }
        Ok(SlamState { pose, landmarks })
    }

    pub fn pose(&self) -> &Pose {
        &self.pose
    }

    pub fn landmarks(&self) -> &[Vec3] {
        &self.landmarks
    }

    pub fn landmark_points(&self) -> impl Iterator<Item = HomogeneousPoint> + '_ {
        self.landmarks.iter().map(|p| HomogeneousPoint::point(*p))
    }

    pub fn landmark_count(&self) -> usize {
        self.landmarks.len()
    }
}
