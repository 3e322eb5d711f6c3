use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::Aabb;
use crate::scalar::Real;

/// Which swept region a query is tested against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Collision,
    Overlap,
}

/// Swept regions around one target object in moving clutter.
///
/// The target box is extruded opposite the motion direction (the robot holds
/// its pose in the world while the clutter slides forward, so relative to the
/// clutter a waiting gripper sweeps backward through the scene). Surrounding
/// boxes are extruded both ways, covering the hover before the grasp and the
/// retreat after it. The collision region is the union of all extrusions; the
/// overlap region is the intersection of the target extrusion with each
/// surrounding extrusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct SweptRegions<T: Real = f64> {
    pub collision: Vec<Aabb<T>>,
    pub overlap: Vec<Aabb<T>>,
    pub belt_axis: Vector3<T>,
    /// Extrusion length used to build the regions.
    pub extent: T,
}

impl<T: Real> SweptRegions<T> {
    /// True iff `query` intersects any box of the selected region.
    pub fn contains_box(&self, query: &Aabb<T>, kind: RegionKind) -> bool {
        let boxes = match kind {
            RegionKind::Collision => &self.collision,
            RegionKind::Overlap => &self.overlap,
        };
        boxes.iter().any(|b| b.intersects(query))
    }

    pub fn contains_point(&self, p: &nalgebra::Point3<T>, kind: RegionKind) -> bool {
        let boxes = match kind {
            RegionKind::Collision => &self.collision,
            RegionKind::Overlap => &self.overlap,
        };
        boxes.iter().any(|b| b.contains_point(p))
    }
}

/// Builds the collision and overlap regions for one target among its
/// surrounding objects.
///
/// `belt_axis` must be the world +x axis (scenes are expressed in a
/// belt-aligned frame so every extrusion stays axis-aligned); `extent` is the
/// extrusion length, typically the remaining belt ahead of the target.
pub fn build_swept_regions<T: Real>(
    target: &Aabb<T>,
    surrounding: &[Aabb<T>],
    belt_axis: Vector3<T>,
    extent: T,
) -> SweptRegions<T> {
    assert!(extent > T::zero(), "extrusion extent must be positive");
    let unit = belt_axis.normalize();
    let along_x = num_traits::Float::abs(unit.x - T::one()) < T::from_f64_lossy(1e-9)
        && num_traits::Float::abs(unit.y) < T::from_f64_lossy(1e-9)
        && num_traits::Float::abs(unit.z) < T::from_f64_lossy(1e-9);
    assert!(along_x, "belt axis must be aligned with world +x");

    let blue = target.extruded(0, extent, true);
    let mut collision = vec![blue];
    let mut overlap = Vec::new();
    for s in surrounding {
        let red = s.extruded(0, extent, true).extruded(0, extent, false);
        if let Some(cut) = blue.intersection(&red) {
            overlap.push(cut);
        }
        collision.push(red);
    }
    SweptRegions {
        collision,
        overlap,
        belt_axis: unit,
        extent,
    }
}

/// True iff `query` intersects any box of the selected region.
pub fn region_contains_box<T: Real>(
    regions: &SweptRegions<T>,
    query: &Aabb<T>,
    kind: RegionKind,
) -> bool {
    regions.contains_box(query, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_box(min: [f64; 3], max: [f64; 3]) -> Aabb {
        Aabb::new(Point3::from(min), Point3::from(max))
    }

    fn belt_x() -> Vector3<f64> {
        Vector3::x()
    }

    #[test]
    fn no_surrounding_means_no_overlap() {
        let target = unit_box([0.0; 3], [0.1; 3]);
        let r = build_swept_regions(&target, &[], belt_x(), 0.5);
        assert!(r.overlap.is_empty());
        assert_eq!(r.collision.len(), 1);
        assert_eq!(r.collision[0].min.x, -0.5);
        assert_eq!(r.collision[0].max.x, 0.1);
    }

    #[test]
    fn laterally_disjoint_surrounding_has_empty_overlap() {
        // Interval oracle: y-intervals [0,0.1] and [0.2,0.3] do not meet,
        // so no x-extrusion can create an intersection.
        let target = unit_box([0.0, 0.0, 0.0], [0.1, 0.1, 0.1]);
        let other = unit_box([0.0, 0.2, 0.0], [0.1, 0.3, 0.1]);
        let r = build_swept_regions(&target, &[other], belt_x(), 0.5);
        assert!(r.overlap.is_empty());
        assert_eq!(r.collision.len(), 2);
    }

    #[test]
    fn trailing_surrounding_overlaps_on_shared_cross_section() {
        let target = unit_box([0.0, 0.0, 0.0], [0.1, 0.1, 0.1]);
        let trailing = unit_box([-0.3, 0.0, 0.0], [-0.2, 0.1, 0.1]);
        let extent = 0.5;
        let r = build_swept_regions(&target, &[trailing], belt_x(), extent);
        assert_eq!(r.overlap.len(), 1);
        // Interval oracle: blue x-strip is [-0.5, 0.1], red is [-0.8, 0.3];
        // their intersection over the shared y/z cross-section is the blue strip.
        let cut = r.overlap[0];
        assert_eq!(cut.min, Point3::new(-0.5, 0.0, 0.0));
        assert_eq!(cut.max, Point3::new(0.1, 0.1, 0.1));
    }

    #[test]
    fn region_membership_examples() {
        let target = unit_box([0.0; 3], [0.1; 3]);
        let r = build_swept_regions(&target, &[], belt_x(), 0.5);
        let far = unit_box([5.0, 5.0, 5.0], [5.1, 5.1, 5.1]);
        assert!(!region_contains_box(&r, &far, RegionKind::Collision));
        assert!(region_contains_box(&r, &r.collision[0].clone(), RegionKind::Collision));
    }

    fn random_box(rng: &mut ChaCha8Rng, span: f64) -> Aabb {
        let c = Point3::new(
            rng.gen_range(-span..span),
            rng.gen_range(-span..span),
            rng.gen_range(0.0..span),
        );
        let h = Vector3::new(
            rng.gen_range(0.01..0.2),
            rng.gen_range(0.01..0.2),
            rng.gen_range(0.01..0.2),
        );
        Aabb::from_center_half_extents(c, h)
    }

    #[test]
    fn overlap_points_are_collision_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let target = random_box(&mut rng, 0.5);
            let surrounding: Vec<_> = (0..4).map(|_| random_box(&mut rng, 0.5)).collect();
            let r = build_swept_regions(&target, &surrounding, belt_x(), rng.gen_range(0.1..1.0));
            for _ in 0..200 {
                let p = Point3::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-0.5..1.0),
                );
                if r.contains_point(&p, RegionKind::Overlap) {
                    assert!(r.contains_point(&p, RegionKind::Collision));
                }
            }
        }
    }

    #[test]
    fn translation_equivariant_orthogonal_to_belt() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let target = random_box(&mut rng, 0.4);
            let surrounding: Vec<_> = (0..3).map(|_| random_box(&mut rng, 0.4)).collect();
            let v = Vector3::new(0.0, rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let extent = rng.gen_range(0.1..0.8);
            let base = build_swept_regions(&target, &surrounding, belt_x(), extent);
            let moved_surrounding: Vec<_> = surrounding.iter().map(|b| b.translated(v)).collect();
            let moved =
                build_swept_regions(&target.translated(v), &moved_surrounding, belt_x(), extent);
            for (a, b) in base.collision.iter().zip(&moved.collision) {
                assert_eq!(a.translated(v), *b);
            }
            for (a, b) in base.overlap.iter().zip(&moved.overlap) {
                assert_eq!(a.translated(v), *b);
            }
        }
    }

    #[test]
    fn membership_matches_grid_sampling_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let target = random_box(&mut rng, 0.4);
            let surrounding: Vec<_> = (0..3).map(|_| random_box(&mut rng, 0.4)).collect();
            let r = build_swept_regions(&target, &surrounding, belt_x(), rng.gen_range(0.2..0.6));
            let query = random_box(&mut rng, 0.6);
            for kind in [RegionKind::Collision, RegionKind::Overlap] {
                let fast = region_contains_box(&r, &query, kind);
                // Dense grid over the query box, including its faces. Spacing
                // stays below the smallest region-box extent (2 cm), so every
                // true intersection contains at least one sample.
                let steps = |lo: f64, hi: f64| ((hi - lo) / 0.015).ceil().max(1.0) as usize;
                let (nx, ny, nz) = (
                    steps(query.min.x, query.max.x),
                    steps(query.min.y, query.max.y),
                    steps(query.min.z, query.max.z),
                );
                let mut oracle = false;
                'grid: for i in 0..=nx {
                    for j in 0..=ny {
                        for k in 0..=nz {
                            let f = |lo: f64, hi: f64, t: usize, n: usize| {
                                lo + (hi - lo) * (t as f64) / (n as f64)
                            };
                            let p = Point3::new(
                                f(query.min.x, query.max.x, i, nx),
                                f(query.min.y, query.max.y, j, ny),
                                f(query.min.z, query.max.z, k, nz),
                            );
                            if r.contains_point(&p, kind) {
                                oracle = true;
                                break 'grid;
                            }
                        }
                    }
                }
                assert_eq!(fast, oracle);
            }
        }
    }
}
