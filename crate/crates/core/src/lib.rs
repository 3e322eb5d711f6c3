//! Grasp planning for unknown objects moving in dense clutter on a conveyor belt.
//!
//! The crate simulates and plans the full pick pipeline at desk scale:
//!
//! 1. **Global detection** — a virtual depth camera renders the scene from a
//!    diagonal view, instances are segmented, filtered to the belt region and
//!    back-projected into per-object point clouds ([`perception`]).
//! 2. **Similarity matching** — object categories are screened against a
//!    reference-model catalog, then each candidate is registered onto the
//!    observed cloud with RANSAC + ICP ([`modeldb`], [`registration`]).
//! 3. **Static planning** — pre-planned antipodal grasps are transferred
//!    through the registration transform, filtered against swept collision
//!    regions and the gripper model, and sequenced by a multi-metric
//!    priority ([`static_planner`]).
//! 4. **Tracking** — an adaptive top-down observation pose is derived from
//!    the clutter, and frame differencing over the depth stream yields the
//!    belt speed and the instantaneous clutter position ([`tracker`]).
//! 5. **Dynamic planning** — a recurrent deadline loop translates the static
//!    grasps to predicted future positions and executes the first grasp that
//!    fits its time budget ([`dyn_planner`], [`sim`]).
//!
//! Core geometry and registration are generic over the scalar type (`f32` or
//! `f64`) through the [`scalar::Real`] trait; the pipeline layers use the
//! `f64` defaults exported at the crate root. Everything is deterministic
//! given explicit seeds, including a virtual-cost timing mode that replaces
//! wall-clock planning durations.

pub mod dyn_planner;
pub mod geometry;
pub mod grasp;
pub mod harness;
pub mod modeldb;
pub mod perception;
pub mod registration;
pub mod scalar;
pub mod shapes;
pub mod sim;
pub mod static_planner;
pub mod tracker;

pub use scalar::Real;

/// Scalar type used by the pipeline layers.
pub type Scalar = f64;
/// 3-component point at pipeline precision.
pub type Point3 = nalgebra::Point3<Scalar>;
/// 3-component vector at pipeline precision.
pub type Vector3 = nalgebra::Vector3<Scalar>;
/// Rigid transform at pipeline precision.
pub type Pose = geometry::Pose<Scalar>;
/// Axis-aligned box at pipeline precision.
pub type Aabb = geometry::Aabb<Scalar>;
/// Point cloud at pipeline precision.
pub type PointCloud = geometry::PointCloud<Scalar>;
/// Swept collision/overlap regions at pipeline precision.
pub type SweptRegions = geometry::SweptRegions<Scalar>;
