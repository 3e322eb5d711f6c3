//! Antipodal grasp pre-planning over a sampled model surface.

use nalgebra::{Matrix3, Point3, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ModelDbError;
use crate::geometry::{PointCloud, Pose};
use crate::grasp::{Contact, GraspCandidate, GripperSpec, Stability};

/// Maximum angle between a contact normal and the closing axis.
pub const OPPOSITION_TOLERANCE: f64 = 20.0 * std::f64::consts::PI / 180.0;

/// Radius of the search corridor around the inward ray (m).
const CORRIDOR_RADIUS: f64 = 0.004;
/// Minimum travel along the ray before a point counts as the far side (m).
const MIN_TRAVEL: f64 = 0.008;
/// Approach directions generated per contact pair.
const APPROACHES_PER_PAIR: usize = 8;

/// Samples antipodal contact pairs on a surface cloud and expands each pair
/// into a fan of approach directions.
///
/// A pair is found by casting an inward ray from a seed point along its
/// negated normal and taking the farthest cloud point inside a thin corridor
/// around that ray; the pair qualifies when the far normal opposes the seed
/// normal within [`OPPOSITION_TOLERANCE`] and the span fits the jaw opening.
/// Deterministic for a fixed seed.
pub fn preplan_grasps(
    surface: &PointCloud,
    gripper: &GripperSpec,
    target_count: usize,
    seed: u64,
) -> Result<Vec<GraspCandidate>, ModelDbError> {
    let normals = surface
        .normals
        .as_ref()
        .expect("model surface must carry normals");
    assert!(!surface.is_empty(), "model surface must not be empty");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grasps = Vec::with_capacity(target_count);
    let cos_tol = OPPOSITION_TOLERANCE.cos();
    let budget = target_count * 60;

    for _ in 0..budget {
        if grasps.len() >= target_count {
            break;
        }
        let i = rng.gen_range(0..surface.points.len());
        let p = surface.points[i];
        let n_p = normals[i];
        let dir = -n_p;

        // Farthest cloud point inside the corridor is the exit surface.
        let mut far: Option<(usize, f64)> = None;
        for (j, q) in surface.points.iter().enumerate() {
            let v = q - p;
            let t = v.dot(&dir);
            if t < MIN_TRAVEL || t > gripper.max_opening {
                continue;
            }
            if (v - dir * t).norm_squared() > CORRIDOR_RADIUS * CORRIDOR_RADIUS {
                continue;
            }
            if far.map_or(true, |(_, bt)| t > bt) {
                far = Some((j, t));
            }
        }
        let Some((j, _)) = far else { continue };
        let q = surface.points[j];
        let n_q = normals[j];
        // Opposition: the far normal must point along the inward ray.
        if n_q.dot(&dir) < cos_tol {
            continue;
        }
        let span = q - p;
        let width = span.norm();
        if width > gripper.max_opening {
            continue;
        }

        let closing = span / width;
        let (b1, b2) = orthonormal_basis(&closing);
        for k in 0..APPROACHES_PER_PAIR {
            if grasps.len() >= target_count {
                break;
            }
            let phi = std::f64::consts::TAU * (k as f64) / (APPROACHES_PER_PAIR as f64);
            let approach = b1 * phi.cos() + b2 * phi.sin();
            let center = nalgebra::center(&p, &q);
            grasps.push(GraspCandidate {
                pose: grasp_pose(&center, &closing, &approach),
                width,
                center,
                contacts: Some((
                    Contact { point: p, normal: n_p },
                    Contact { point: q, normal: n_q },
                )),
                stability: Stability::Stable,
            });
        }
    }

    if grasps.len() < target_count {
        return Err(ModelDbError::InsufficientGeometry);
    }
    Ok(grasps)
}

/// Gripper pose with +x along the closing axis and +z along the approach.
fn grasp_pose(center: &Point3<f64>, closing: &Vector3<f64>, approach: &Vector3<f64>) -> Pose<f64> {
    let y = approach.cross(closing);
    let rot = Matrix3::from_columns(&[*closing, y, *approach]);
    Pose {
        rotation: UnitQuaternion::from_rotation_matrix(&nalgebra::Rotation3::from_matrix_unchecked(
            rot,
        )),
        translation: center.coords,
    }
}

/// Deterministic pair of unit vectors orthogonal to `axis`.
fn orthonormal_basis(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let reference = if axis.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let b1 = (reference - axis * reference.dot(axis)).normalize();
    let b2 = axis.cross(&b1);
    (b1, b2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::Shape;
    use approx::assert_relative_eq;

    fn opposition_angle(g: &GraspCandidate) -> f64 {
        let (a, b) = g.contacts.unwrap();
        a.normal.angle(&-b.normal)
    }

    #[test]
    fn sphere_grasps_are_diametric() {
        let shape = Shape::sphere(0.05);
        let cloud = shape.sample_surface(2000, 3);
        let grasps = preplan_grasps(&cloud, &GripperSpec::default(), 120, 7).unwrap();
        assert!(grasps.len() >= 120);
        for g in &grasps {
            // Any antipodal pair on a sphere spans a diameter.
            assert_relative_eq!(g.width, 0.10, epsilon = 2e-3);
            assert!(opposition_angle(g) <= OPPOSITION_TOLERANCE + 1e-9);
        }
    }

    #[test]
    fn cube_grasps_cross_opposite_faces() {
        let shape = Shape::cuboid(0.06, 0.06, 0.06);
        let cloud = shape.sample_surface(2000, 3);
        let grasps = preplan_grasps(&cloud, &GripperSpec::default(), 120, 11).unwrap();
        for g in &grasps {
            assert_relative_eq!(g.width, 0.06, epsilon = 2e-3);
            // Closing axis aligned with a face normal, up to the corridor
            // radius (4 mm over a 60 mm span ≈ 3.8°).
            let a = g.closing_axis();
            let aligned = (0..3).any(|i| a[i].abs() > 0.995);
            assert!(aligned, "closing axis {a} not across opposite faces");
        }
    }

    #[test]
    fn narrow_jaw_on_wide_cube_fails() {
        let shape = Shape::cuboid(0.06, 0.06, 0.06);
        let cloud = shape.sample_surface(1500, 3);
        let gripper = GripperSpec {
            max_opening: 0.04,
            ..GripperSpec::default()
        };
        let err = preplan_grasps(&cloud, &gripper, 100, 5).unwrap_err();
        assert!(matches!(err, ModelDbError::InsufficientGeometry));
    }

    #[test]
    fn deterministic_per_seed() {
        let cloud = Shape::cylinder(0.03, 0.09).sample_surface(2000, 2);
        let gripper = GripperSpec::default();
        let a = preplan_grasps(&cloud, &gripper, 110, 42).unwrap();
        let b = preplan_grasps(&cloud, &gripper, 110, 42).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn opposition_invariant_across_shapes() {
        for (shape, seed) in [
            (Shape::cuboid(0.1, 0.05, 0.05), 1u64),
            (Shape::cylinder(0.04, 0.06), 2),
            (Shape::sphere(0.035), 3),
        ] {
            let cloud = shape.sample_surface(2000, seed);
            let grasps = preplan_grasps(&cloud, &GripperSpec::default(), 100, seed).unwrap();
            for g in &grasps {
                assert!(opposition_angle(g) <= OPPOSITION_TOLERANCE + 1e-9);
            }
        }
    }
}
