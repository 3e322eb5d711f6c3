//! Two-finger grasp candidates and the parallel gripper model.

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Pose};

/// Stability label of a grasp candidate.
///
/// A grasp is stable when both contact normals stay within the angle budget
/// of the closing axis, unstable when either exceeds it, and potential when
/// a contact lies in an unobserved part of the cloud so the angle cannot be
/// evaluated. Potential grasps are executed only when nothing stable exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    Potential,
}

/// One surface contact: point plus outward normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub point: Point3<f64>,
    pub normal: Vector3<f64>,
}

/// A parallel-jaw grasp candidate.
///
/// Gripper frame convention: the origin sits at the grasp center (midpoint
/// between the fingertip pads), +x is the closing axis, +z the approach
/// direction, +y completes the right-handed frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspCandidate {
    pub pose: Pose<f64>,
    /// Commanded jaw width in meters.
    pub width: f64,
    pub center: Point3<f64>,
    pub contacts: Option<(Contact, Contact)>,
    pub stability: Stability,
}

impl GraspCandidate {
    /// Closing axis in the world frame.
    pub fn closing_axis(&self) -> Vector3<f64> {
        self.pose.rotate_vector(&Vector3::x())
    }

    /// Approach direction in the world frame (gripper advances along it).
    pub fn approach(&self) -> Vector3<f64> {
        self.pose.rotate_vector(&Vector3::z())
    }

    /// Pose backed off along the negative approach direction.
    pub fn pregrasp_pose(&self, backoff: f64) -> Pose<f64> {
        self.pose.translated(-self.approach() * backoff)
    }

    /// Applies a rigid transform to pose, center and contacts; width is
    /// preserved.
    pub fn transformed(&self, t: &Pose<f64>) -> GraspCandidate {
        GraspCandidate {
            pose: t.compose(&self.pose),
            width: self.width,
            center: t.transform_point(&self.center),
            contacts: self.contacts.map(|(a, b)| {
                let map = |c: Contact| Contact {
                    point: t.transform_point(&c.point),
                    normal: t.rotate_vector(&c.normal),
                };
                (map(a), map(b))
            }),
            stability: self.stability,
        }
    }

    pub fn translated(&self, offset: Vector3<f64>) -> GraspCandidate {
        GraspCandidate {
            pose: self.pose.translated(offset),
            width: self.width,
            center: self.center + offset,
            contacts: self.contacts.map(|(a, b)| {
                let map = |c: Contact| Contact {
                    point: c.point + offset,
                    normal: c.normal,
                };
                (map(a), map(b))
            }),
            stability: self.stability,
        }
    }
}

/// Parallel gripper geometry, default values modeled on a 140 mm-stroke
/// adaptive two-finger gripper.
///
/// All boxes live in the gripper frame described on [`GraspCandidate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GripperSpec {
    /// Maximum jaw opening (m).
    pub max_opening: f64,
    /// One finger pad at maximum opening, on the +x side; the −x finger is
    /// its mirror image.
    pub finger_box: Aabb,
    /// Volume between the fingers that must contain part of the target.
    pub closure_box: Aabb,
    /// Whole gripper solid (palm, knuckles and fingers) used for swept-region
    /// checks at the pregrasp pose.
    pub body_box: Aabb,
    /// Retreat distance from grasp pose to pregrasp pose (m).
    pub backoff_distance: f64,
    /// Extra clearance kept between fingers and non-target objects along the
    /// motion axis, covering the final approach time.
    pub approach_clearance: f64,
    /// Margin added to the jaw width when checking the finger closing sweep
    /// against the target (m).
    pub sweep_margin: f64,
}

impl Default for GripperSpec {
    fn default() -> Self {
        Self {
            max_opening: 0.14,
            finger_box: Aabb::new(
                Point3::new(0.070, -0.016, -0.035),
                Point3::new(0.082, 0.016, 0.010),
            ),
            closure_box: Aabb::new(
                Point3::new(-0.070, -0.016, -0.035),
                Point3::new(0.070, 0.016, 0.010),
            ),
            body_box: Aabb::new(
                Point3::new(-0.10, -0.05, -0.16),
                Point3::new(0.10, 0.05, 0.010),
            ),
            backoff_distance: 0.10,
            approach_clearance: 0.06,
            sweep_margin: 0.005,
        }
    }
}

impl GripperSpec {
    /// Mirrored finger box on the −x side.
    pub fn opposite_finger_box(&self) -> Aabb {
        Aabb::new(
            Point3::new(
                -self.finger_box.max.x,
                self.finger_box.min.y,
                self.finger_box.min.z,
            ),
            Point3::new(
                -self.finger_box.min.x,
                self.finger_box.max.y,
                self.finger_box.max.z,
            ),
        )
    }

    /// World-frame AABB of the gripper body at `pose` (conservative: the
    /// bounding box of the rotated body box).
    pub fn body_world_aabb(&self, pose: &Pose<f64>) -> Aabb {
        Aabb::from_points(self.body_box.corners().iter().map(|c| pose.transform_point(c)))
            .expect("eight corners")
    }
}
