//! Rigid-body math, point clouds, axis-aligned boxes and swept regions.

mod aabb;
mod cloud;
mod pose;
mod swept;

pub use aabb::Aabb;
pub use cloud::PointCloud;
pub use pose::Pose;
pub use swept::{build_swept_regions, region_contains_box, RegionKind, SweptRegions};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("operation requires a non-empty point cloud")]
    EmptyCloud,
}
