//! Procedural solid primitives: sampling, ray casting and containment.
//!
//! A shape is a union of basic parts expressed in its own frame, with the
//! footprint centered on the origin and the base resting on z = 0 so that a
//! yaw rotation plus a translation places it on the belt.

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, PointCloud, Pose};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BasicShape {
    /// Full extents; spans `[-x/2, x/2] × [-y/2, y/2] × [0, z]`.
    Box { size: Vector3<f64> },
    /// Axis along +z, base disk at z = 0.
    Cylinder { radius: f64, height: f64 },
    /// Resting on z = 0, center at `(0, 0, radius)`.
    Sphere { radius: f64 },
}

impl BasicShape {
    fn aabb(&self) -> Aabb {
        match *self {
            BasicShape::Box { size } => Aabb::new(
                Point3::new(-size.x / 2.0, -size.y / 2.0, 0.0),
                Point3::new(size.x / 2.0, size.y / 2.0, size.z),
            ),
            BasicShape::Cylinder { radius, height } => Aabb::new(
                Point3::new(-radius, -radius, 0.0),
                Point3::new(radius, radius, height),
            ),
            BasicShape::Sphere { radius } => Aabb::new(
                Point3::new(-radius, -radius, 0.0),
                Point3::new(radius, radius, 2.0 * radius),
            ),
        }
    }

    fn area(&self) -> f64 {
        match *self {
            BasicShape::Box { size } => {
                2.0 * (size.x * size.y + size.y * size.z + size.x * size.z)
            }
            BasicShape::Cylinder { radius, height } => {
                2.0 * std::f64::consts::PI * radius * (height + radius)
            }
            BasicShape::Sphere { radius } => 4.0 * std::f64::consts::PI * radius * radius,
        }
    }

    fn contains(&self, p: &Point3<f64>, margin: f64) -> bool {
        match *self {
            BasicShape::Box { size } => {
                p.x.abs() <= size.x / 2.0 - margin
                    && p.y.abs() <= size.y / 2.0 - margin
                    && p.z >= margin
                    && p.z <= size.z - margin
            }
            BasicShape::Cylinder { radius, height } => {
                p.z >= margin
                    && p.z <= height - margin
                    && (p.x * p.x + p.y * p.y) <= (radius - margin) * (radius - margin)
            }
            BasicShape::Sphere { radius } => {
                let d = p - Point3::new(0.0, 0.0, radius);
                d.norm_squared() <= (radius - margin) * (radius - margin)
            }
        }
    }

    /// Surface point and outward normal for a uniform sample.
    fn sample(&self, rng: &mut ChaCha8Rng) -> (Point3<f64>, Vector3<f64>) {
        match *self {
            BasicShape::Box { size } => {
                let (hx, hy) = (size.x / 2.0, size.y / 2.0);
                let areas = [
                    size.y * size.z, // ±x faces
                    size.y * size.z,
                    size.x * size.z, // ±y faces
                    size.x * size.z,
                    size.x * size.y, // bottom/top
                    size.x * size.y,
                ];
                let total: f64 = areas.iter().sum();
                let mut pick = rng.gen_range(0.0..total);
                let mut face = 0;
                for (i, a) in areas.iter().enumerate() {
                    if pick < *a {
                        face = i;
                        break;
                    }
                    pick -= a;
                }
                let u = rng.gen_range(-1.0..1.0);
                let v = rng.gen_range(0.0..1.0);
                match face {
                    0 => (
                        Point3::new(hx, u * hy, v * size.z),
                        Vector3::new(1.0, 0.0, 0.0),
                    ),
                    1 => (
                        Point3::new(-hx, u * hy, v * size.z),
                        Vector3::new(-1.0, 0.0, 0.0),
                    ),
                    2 => (
                        Point3::new(u * hx, hy, v * size.z),
                        Vector3::new(0.0, 1.0, 0.0),
                    ),
                    3 => (
                        Point3::new(u * hx, -hy, v * size.z),
                        Vector3::new(0.0, -1.0, 0.0),
                    ),
                    4 => (
                        Point3::new(u * hx, rng.gen_range(-1.0..1.0) * hy, 0.0),
                        Vector3::new(0.0, 0.0, -1.0),
                    ),
                    _ => (
                        Point3::new(u * hx, rng.gen_range(-1.0..1.0) * hy, size.z),
                        Vector3::new(0.0, 0.0, 1.0),
                    ),
                }
            }
            BasicShape::Cylinder { radius, height } => {
                let side = 2.0 * std::f64::consts::PI * radius * height;
                let cap = std::f64::consts::PI * radius * radius;
                let pick = rng.gen_range(0.0..side + 2.0 * cap);
                let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                if pick < side {
                    let z = rng.gen_range(0.0..height);
                    (
                        Point3::new(radius * phi.cos(), radius * phi.sin(), z),
                        Vector3::new(phi.cos(), phi.sin(), 0.0),
                    )
                } else {
                    let r = radius * rng.gen_range(0.0f64..1.0).sqrt();
                    let (z, n) = if pick < side + cap {
                        (0.0, Vector3::new(0.0, 0.0, -1.0))
                    } else {
                        (height, Vector3::new(0.0, 0.0, 1.0))
                    };
                    (Point3::new(r * phi.cos(), r * phi.sin(), z), n)
                }
            }
            BasicShape::Sphere { radius } => {
                // Marsaglia rejection-free: normalize a gaussian triple.
                let mut v;
                loop {
                    v = Vector3::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    );
                    let n = v.norm_squared();
                    if n > 1e-6 && n <= 1.0 {
                        break;
                    }
                }
                let n = v.normalize();
                (Point3::new(0.0, 0.0, radius) + n * radius, n)
            }
        }
    }

    /// Nearest intersection `t > EPS` of `origin + t·dir` with the surface,
    /// plus the outward normal at the hit. `dir` need not be unit length;
    /// `t` is in units of `dir`.
    fn ray_cast(&self, origin: &Point3<f64>, dir: &Vector3<f64>) -> Option<(f64, Vector3<f64>)> {
        match *self {
            BasicShape::Box { size } => {
                let lo = Vector3::new(-size.x / 2.0, -size.y / 2.0, 0.0);
                let hi = Vector3::new(size.x / 2.0, size.y / 2.0, size.z);
                let mut t_near = f64::NEG_INFINITY;
                let mut t_far = f64::INFINITY;
                let mut near_axis = 0usize;
                let mut near_sign = -1.0;
                for a in 0..3 {
                    if dir[a].abs() < EPS {
                        if origin[a] < lo[a] || origin[a] > hi[a] {
                            return None;
                        }
                        continue;
                    }
                    let mut t0 = (lo[a] - origin[a]) / dir[a];
                    let mut t1 = (hi[a] - origin[a]) / dir[a];
                    let mut sign = -1.0;
                    if t0 > t1 {
                        std::mem::swap(&mut t0, &mut t1);
                        sign = 1.0;
                    }
                    if t0 > t_near {
                        t_near = t0;
                        near_axis = a;
                        near_sign = sign;
                    }
                    t_far = t_far.min(t1);
                    if t_near > t_far {
                        return None;
                    }
                }
                if t_near <= EPS {
                    return None;
                }
                let mut n = Vector3::zeros();
                n[near_axis] = near_sign;
                Some((t_near, n))
            }
            BasicShape::Cylinder { radius, height } => {
                let mut best: Option<(f64, Vector3<f64>)> = None;
                // Lateral surface.
                let a = dir.x * dir.x + dir.y * dir.y;
                if a > EPS * EPS {
                    let b = 2.0 * (origin.x * dir.x + origin.y * dir.y);
                    let c = origin.x * origin.x + origin.y * origin.y - radius * radius;
                    let disc = b * b - 4.0 * a * c;
                    if disc >= 0.0 {
                        let s = disc.sqrt();
                        for t in [(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)] {
                            if t > EPS {
                                let z = origin.z + t * dir.z;
                                if (0.0..=height).contains(&z)
                                    && best.map_or(true, |(bt, _)| t < bt)
                                {
                                    let hit = origin + dir * t;
                                    best =
                                        Some((t, Vector3::new(hit.x, hit.y, 0.0) / radius));
                                }
                            }
                        }
                    }
                }
                // Caps.
                if dir.z.abs() > EPS {
                    for (zc, n) in [
                        (0.0, Vector3::new(0.0, 0.0, -1.0)),
                        (height, Vector3::new(0.0, 0.0, 1.0)),
                    ] {
                        let t = (zc - origin.z) / dir.z;
                        if t > EPS && best.map_or(true, |(bt, _)| t < bt) {
                            let hit = origin + dir * t;
                            if hit.x * hit.x + hit.y * hit.y <= radius * radius {
                                best = Some((t, n));
                            }
                        }
                    }
                }
                best
            }
            BasicShape::Sphere { radius } => {
                let oc = origin - Point3::new(0.0, 0.0, radius);
                let a = dir.norm_squared();
                let b = 2.0 * oc.dot(dir);
                let c = oc.norm_squared() - radius * radius;
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 {
                    return None;
                }
                let s = disc.sqrt();
                let t = (-b - s) / (2.0 * a);
                let t = if t > EPS { t } else { (-b + s) / (2.0 * a) };
                if t <= EPS {
                    return None;
                }
                let hit = origin + dir * t;
                Some((t, (hit - Point3::new(0.0, 0.0, radius)) / radius))
            }
        }
    }
}

/// One positioned part of a shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapePart {
    pub offset: Vector3<f64>,
    pub shape: BasicShape,
}

/// Union of basic parts. A single-part shape is the common case; composites
/// stack parts, e.g. a bottle body plus its neck.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub parts: Vec<ShapePart>,
}

impl Shape {
    pub fn cuboid(x: f64, y: f64, z: f64) -> Self {
        Self {
            parts: vec![ShapePart {
                offset: Vector3::zeros(),
                shape: BasicShape::Box {
                    size: Vector3::new(x, y, z),
                },
            }],
        }
    }

    pub fn cylinder(radius: f64, height: f64) -> Self {
        Self {
            parts: vec![ShapePart {
                offset: Vector3::zeros(),
                shape: BasicShape::Cylinder { radius, height },
            }],
        }
    }

    pub fn sphere(radius: f64) -> Self {
        Self {
            parts: vec![ShapePart {
                offset: Vector3::zeros(),
                shape: BasicShape::Sphere { radius },
            }],
        }
    }

    /// Stacks `top` on this shape, centered, raised by this shape's height.
    pub fn stacked(mut self, top: BasicShape) -> Self {
        let z = self.aabb().max.z;
        self.parts.push(ShapePart {
            offset: Vector3::new(0.0, 0.0, z),
            shape: top,
        });
        self
    }

    /// Bounding box in the shape frame.
    pub fn aabb(&self) -> Aabb {
        let mut it = self.parts.iter();
        let first = it.next().expect("shape has at least one part");
        let mut bb = first.shape.aabb().translated(first.offset);
        for p in it {
            let pb = p.shape.aabb().translated(p.offset);
            bb.expand(&pb.min);
            bb.expand(&pb.max);
        }
        bb
    }

    /// Conservative world-frame bounding box under `pose`.
    pub fn world_aabb(&self, pose: &Pose<f64>) -> Aabb {
        Aabb::from_points(self.aabb().corners().iter().map(|c| pose.transform_point(c)))
            .expect("eight corners")
    }

    pub fn height(&self) -> f64 {
        self.aabb().max.z
    }

    pub fn contains(&self, p: &Point3<f64>, margin: f64) -> bool {
        self.parts
            .iter()
            .any(|part| part.shape.contains(&Point3::from(p - part.offset), margin))
    }

    /// Deterministic area-weighted surface sampling with outward normals.
    /// Points landing strictly inside another part (internal faces of a
    /// composite) are culled and resampled.
    pub fn sample_surface(&self, n: usize, seed: u64) -> PointCloud<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let areas: Vec<f64> = self.parts.iter().map(|p| p.shape.area()).collect();
        let total: f64 = areas.iter().sum();
        let mut points = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        let mut attempts = 0usize;
        while points.len() < n && attempts < n * 20 {
            attempts += 1;
            let mut pick = rng.gen_range(0.0..total);
            let mut idx = 0;
            for (i, a) in areas.iter().enumerate() {
                if pick < *a {
                    idx = i;
                    break;
                }
                pick -= a;
            }
            let part = &self.parts[idx];
            let (local, normal) = part.shape.sample(&mut rng);
            let p = Point3::from(local.coords + part.offset);
            let interior = self.parts.iter().enumerate().any(|(j, other)| {
                j != idx && other.shape.contains(&Point3::from(p - other.offset), 1e-6)
            });
            if interior {
                continue;
            }
            points.push(p);
            normals.push(normal);
        }
        PointCloud::with_normals(points, normals)
    }

    /// Nearest surface hit of a ray given in the shape frame.
    pub fn ray_cast(&self, origin: &Point3<f64>, dir: &Vector3<f64>) -> Option<(f64, Vector3<f64>)> {
        let mut best: Option<(f64, Vector3<f64>)> = None;
        for part in &self.parts {
            let o = Point3::from(origin - part.offset);
            if let Some((t, n)) = part.shape.ray_cast(&o, dir) {
                // A hit on an internal face (inside another part) is not a
                // real surface; step past it.
                let hit = origin + dir * t;
                if self
                    .parts
                    .iter()
                    .any(|other| other.shape.contains(&Point3::from(hit - other.offset), 1e-7))
                {
                    continue;
                }
                if best.map_or(true, |(bt, _)| t < bt) {
                    best = Some((t, n));
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sampled_points_lie_on_surface() {
        let shapes = [
            Shape::cuboid(0.06, 0.04, 0.08),
            Shape::cylinder(0.033, 0.1),
            Shape::sphere(0.035),
        ];
        for shape in &shapes {
            let cloud = shape.sample_surface(500, 9);
            assert_eq!(cloud.len(), 500);
            let bb = shape.aabb();
            for p in &cloud.points {
                assert!(bb.inflated(1e-9).contains_point(p));
                assert!(!shape.contains(p, 1e-6));
            }
            for n in cloud.normals.as_ref().unwrap() {
                assert_relative_eq!(n.norm(), 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let shape = Shape::cylinder(0.03, 0.09).stacked(BasicShape::Cylinder {
            radius: 0.015,
            height: 0.04,
        });
        let a = shape.sample_surface(300, 4);
        let b = shape.sample_surface(300, 4);
        assert_eq!(a, b);
    }

    #[test]
    fn composite_culls_internal_faces() {
        let shape = Shape::cylinder(0.03, 0.08).stacked(BasicShape::Cylinder {
            radius: 0.015,
            height: 0.04,
        });
        let cloud = shape.sample_surface(800, 5);
        for p in &cloud.points {
            assert!(!shape.contains(p, 1e-6), "sample {p} inside the union");
        }
    }

    #[test]
    fn ray_hits_box_face() {
        let shape = Shape::cuboid(0.1, 0.1, 0.1);
        let (t, n) = shape
            .ray_cast(&Point3::new(0.0, 0.0, 1.0), &Vector3::new(0.0, 0.0, -1.0))
            .unwrap();
        assert_relative_eq!(t, 0.9, epsilon = 1e-12);
        assert_relative_eq!(n, Vector3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn ray_hits_sphere_from_above() {
        let shape = Shape::sphere(0.05);
        let (t, n) = shape
            .ray_cast(&Point3::new(0.0, 0.0, 0.5), &Vector3::new(0.0, 0.0, -1.0))
            .unwrap();
        assert_relative_eq!(t, 0.4, epsilon = 1e-12);
        assert_relative_eq!(n, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-12);
    }

    #[test]
    fn ray_misses_offset_cylinder() {
        let shape = Shape::cylinder(0.02, 0.1);
        assert!(shape
            .ray_cast(&Point3::new(0.5, 0.0, 0.05), &Vector3::new(0.0, 1.0, 0.0))
            .is_none());
    }
}
