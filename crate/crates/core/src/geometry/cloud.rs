use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::{Aabb, GeometryError, Pose};
use crate::scalar::Real;

/// Set of 3D points in meters, optionally with per-point unit normals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct PointCloud<T: Real = f64> {
    pub points: Vec<Point3<T>>,
    pub normals: Option<Vec<Vector3<T>>>,
}

impl<T: Real> PointCloud<T> {
    pub fn from_points(points: Vec<Point3<T>>) -> Self {
        Self {
            points,
            normals: None,
        }
    }

    /// Attaches normals; panics if the lengths differ. Normals are
    /// renormalized to keep the unit invariant.
    pub fn with_normals(points: Vec<Point3<T>>, normals: Vec<Vector3<T>>) -> Self {
        assert_eq!(points.len(), normals.len(), "one normal per point");
        let normals = normals.into_iter().map(|n| n.normalize()).collect();
        Self {
            points,
            normals: Some(normals),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Option<Point3<T>> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self
            .points
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + p.coords);
        Some(Point3::from(
            sum / T::from_usize(self.points.len()).unwrap(),
        ))
    }

    /// Keeps every `stride`-th point; used to bound registration cost.
    pub fn decimated(&self, stride: usize) -> PointCloud<T> {
        let stride = stride.max(1);
        PointCloud {
            points: self.points.iter().step_by(stride).copied().collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().step_by(stride).copied().collect()),
        }
    }

    pub fn translated(&self, offset: Vector3<T>) -> PointCloud<T> {
        PointCloud {
            points: self.points.iter().map(|p| p + offset).collect(),
            normals: self.normals.clone(),
        }
    }
}

/// Applies `pose` to every point; normals are rotated only.
pub fn transform_cloud<T: Real>(cloud: &PointCloud<T>, pose: &Pose<T>) -> PointCloud<T> {
    PointCloud {
        points: cloud
            .points
            .iter()
            .map(|p| pose.transform_point(p))
            .collect(),
        normals: cloud
            .normals
            .as_ref()
            .map(|ns| ns.iter().map(|n| pose.rotate_vector(n)).collect()),
    }
}

/// Tight axis-aligned bounding box of a non-empty cloud.
pub fn aabb_of<T: Real>(cloud: &PointCloud<T>) -> Result<Aabb<T>, GeometryError> {
    Aabb::from_points(cloud.points.iter().copied()).ok_or(GeometryError::EmptyCloud)
}

impl<T: Real> PointCloud<T> {
    pub fn aabb(&self) -> Result<Aabb<T>, GeometryError> {
        aabb_of(self)
    }

    pub fn transformed(&self, pose: &Pose<T>) -> PointCloud<T> {
        transform_cloud(self, pose)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_leaves_cloud_unchanged() {
        let cloud = PointCloud::from_points(vec![
            Point3::new(0.1, 0.2, 0.3),
            Point3::new(-1.0, 0.0, 2.0),
        ]);
        assert_eq!(transform_cloud(&cloud, &Pose::identity()), cloud);
    }

    #[test]
    fn pure_translation_moves_points() {
        let cloud = PointCloud::from_points(vec![Point3::origin()]);
        let pose = Pose::from_translation(Vector3::new(0.1, 0.0, 0.0));
        let out = transform_cloud(&cloud, &pose);
        assert_relative_eq!(out.points[0], Point3::new(0.1, 0.0, 0.0));
    }

    #[test]
    fn quarter_turn_rotates_points_and_normals() {
        let cloud = PointCloud::with_normals(
            vec![Point3::new(1.0, 0.0, 0.0)],
            vec![Vector3::new(1.0, 0.0, 0.0)],
        );
        let pose = Pose::from_axis_angle(
            Vector3::z(),
            std::f64::consts::FRAC_PI_2,
            Vector3::new(5.0, 0.0, 0.0),
        );
        let out = transform_cloud(&cloud, &pose);
        assert_relative_eq!(out.points[0], Point3::new(5.0, 1.0, 0.0), epsilon = 1e-9);
        // Normals ignore translation.
        assert_relative_eq!(out.normals.unwrap()[0], Vector3::new(0.0, 1.0, 0.0), epsilon = 1e-9);
    }

    #[test]
    fn aabb_matches_bruteforce_scan() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let points: Vec<Point3<f64>> = (0..100)
            .map(|_| Point3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let bb = aabb_of(&PointCloud::from_points(points.clone())).unwrap();
        for axis in 0..3 {
            let lo = points.iter().map(|p| p[axis]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[axis]).fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(bb.min[axis], lo);
            assert_eq!(bb.max[axis], hi);
        }
    }

    #[test]
    fn aabb_examples() {
        let bb = aabb_of(&PointCloud::from_points(vec![
            Point3::origin(),
            Point3::new(1.0, 2.0, 3.0),
        ]))
        .unwrap();
        assert_eq!(bb.min, Point3::origin());
        assert_eq!(bb.max, Point3::new(1.0, 2.0, 3.0));

        let single = aabb_of(&PointCloud::from_points(vec![Point3::new(0.5, 0.5, 0.5)])).unwrap();
        assert_eq!(single.min, single.max);

        assert_eq!(
            aabb_of(&PointCloud::<f64>::default()),
            Err(GeometryError::EmptyCloud)
        );
    }
}
