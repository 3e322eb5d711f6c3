use nalgebra::{Point3, Quaternion, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Rigid transform: unit-quaternion rotation followed by a translation in
/// meters. Used for object, grasp, camera and tool frames alike.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct Pose<T: Real = f64> {
    pub rotation: UnitQuaternion<T>,
    pub translation: Vector3<T>,
}

impl<T: Real> Pose<T> {
    pub fn identity() -> Self {
        Self {
            rotation: UnitQuaternion::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a pose, renormalizing the quaternion so the unit invariant
    /// holds even for hand-written or deserialized inputs.
    pub fn new(rotation: Quaternion<T>, translation: Vector3<T>) -> Self {
        Self {
            rotation: Unit::new_normalize(rotation),
            translation,
        }
    }

    pub fn from_rotation(rotation: UnitQuaternion<T>) -> Self {
        Self {
            rotation,
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(translation: Vector3<T>) -> Self {
        Self {
            rotation: UnitQuaternion::identity(),
            translation,
        }
    }

    /// Rotation about `axis` by `angle`, then translation.
    pub fn from_axis_angle(axis: Vector3<T>, angle: T, translation: Vector3<T>) -> Self {
        Self {
            rotation: UnitQuaternion::from_axis_angle(&Unit::new_normalize(axis), angle),
            translation,
        }
    }

    pub fn transform_point(&self, p: &Point3<T>) -> Point3<T> {
        self.rotation.transform_point(p) + self.translation
    }

    pub fn rotate_vector(&self, v: &Vector3<T>) -> Vector3<T> {
        self.rotation.transform_vector(v)
    }

    /// `self ∘ rhs`: apply `rhs` first, then `self`.
    pub fn compose(&self, rhs: &Pose<T>) -> Pose<T> {
        Pose {
            rotation: self.rotation * rhs.rotation,
            translation: self.rotation.transform_vector(&rhs.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose<T> {
        let inv_rot = self.rotation.inverse();
        Pose {
            rotation: inv_rot,
            translation: -(inv_rot.transform_vector(&self.translation)),
        }
    }

    pub fn inverse_transform_point(&self, p: &Point3<T>) -> Point3<T> {
        self.rotation
            .inverse_transform_point(&Point3::from(p.coords - self.translation))
    }

    pub fn translated(&self, offset: Vector3<T>) -> Pose<T> {
        Pose {
            rotation: self.rotation,
            translation: self.translation + offset,
        }
    }

    /// Angle of the relative rotation between two poses, in radians.
    pub fn rotation_angle_to(&self, other: &Pose<T>) -> T {
        self.rotation.angle_to(&other.rotation)
    }

    /// Euclidean distance between the two translations.
    pub fn translation_distance_to(&self, other: &Pose<T>) -> T {
        (self.translation - other.translation).norm()
    }
}

impl<T: Real> Default for Pose<T> {
    fn default() -> Self {
        Self::identity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pose_from(parts: [f64; 7]) -> Pose<f64> {
        Pose::new(
            Quaternion::new(parts[0], parts[1], parts[2], parts[3]),
            Vector3::new(parts[4], parts[5], parts[6]),
        )
    }

    #[test]
    fn inverse_composes_to_identity() {
        let p = Pose::from_axis_angle(
            Vector3::new(0.3, -1.0, 0.7),
            1.1,
            Vector3::new(0.2, -0.4, 0.9),
        );
        let id = p.compose(&p.inverse());
        assert_relative_eq!(id.rotation.angle(), 0.0, epsilon = 1e-9);
        assert_relative_eq!(id.translation.norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn quarter_turn_about_z() {
        let p = Pose::from_axis_angle(
            Vector3::z(),
            std::f64::consts::FRAC_PI_2,
            Vector3::zeros(),
        );
        let q = p.transform_point(&Point3::new(1.0, 0.0, 0.0));
        assert_relative_eq!(q, Point3::new(0.0, 1.0, 0.0), epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn composition_is_associative(
            a in proptest::array::uniform7(-1.0f64..1.0),
            b in proptest::array::uniform7(-1.0f64..1.0),
            c in proptest::array::uniform7(-1.0f64..1.0),
        ) {
            prop_assume!(a[..4].iter().map(|v| v * v).sum::<f64>() > 1e-3);
            prop_assume!(b[..4].iter().map(|v| v * v).sum::<f64>() > 1e-3);
            prop_assume!(c[..4].iter().map(|v| v * v).sum::<f64>() > 1e-3);
            let (a, b, c) = (pose_from(a), pose_from(b), pose_from(c));
            let lhs = a.compose(&b).compose(&c);
            let rhs = a.compose(&b.compose(&c));
            prop_assert!(lhs.rotation_angle_to(&rhs) < 1e-9);
            prop_assert!(lhs.translation_distance_to(&rhs) < 1e-9);
        }

        #[test]
        fn unit_quaternion_invariant(parts in proptest::array::uniform7(-1.0f64..1.0)) {
            prop_assume!(parts[..4].iter().map(|v| v * v).sum::<f64>() > 1e-3);
            let p = pose_from(parts);
            prop_assert!((p.rotation.norm() - 1.0).abs() < 1e-9);
        }
    }
}
