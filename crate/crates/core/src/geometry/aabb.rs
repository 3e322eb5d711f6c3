use nalgebra::{Point3, Vector3};
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Axis-aligned box given by its min/max corners (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct Aabb<T: Real = f64> {
    pub min: Point3<T>,
    pub max: Point3<T>,
}

impl<T: Real> Aabb<T> {
    /// Builds a box from two opposite corners, swapping components as needed
    /// so `min ≤ max` holds.
    pub fn new(a: Point3<T>, b: Point3<T>) -> Self {
        Self {
            min: Point3::new(
                Float::min(a.x, b.x),
                Float::min(a.y, b.y),
                Float::min(a.z, b.z),
            ),
            max: Point3::new(
                Float::max(a.x, b.x),
                Float::max(a.y, b.y),
                Float::max(a.z, b.z),
            ),
        }
    }

    pub fn from_center_half_extents(center: Point3<T>, half: Vector3<T>) -> Self {
        Self {
            min: center - half,
            max: center + half,
        }
    }

    /// Tight box over a non-empty point iterator; `None` when empty.
    pub fn from_points<I: IntoIterator<Item = Point3<T>>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut bb = Aabb {
            min: first,
            max: first,
        };
        for p in it {
            bb.expand(&p);
        }
        Some(bb)
    }

    pub fn expand(&mut self, p: &Point3<T>) {
        self.min = Point3::new(
            Float::min(self.min.x, p.x),
            Float::min(self.min.y, p.y),
            Float::min(self.min.z, p.z),
        );
        self.max = Point3::new(
            Float::max(self.max.x, p.x),
            Float::max(self.max.y, p.y),
            Float::max(self.max.z, p.z),
        );
    }

    pub fn center(&self) -> Point3<T> {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn extents(&self) -> Vector3<T> {
        self.max - self.min
    }

    pub fn contains_point(&self, p: &Point3<T>) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn intersects(&self, other: &Aabb<T>) -> bool {
        (0..3).all(|i| self.min[i] <= other.max[i] && self.max[i] >= other.min[i])
    }

    /// Intersection box, or `None` when disjoint.
    pub fn intersection(&self, other: &Aabb<T>) -> Option<Aabb<T>> {
        if !self.intersects(other) {
            return None;
        }
        Some(Aabb {
            min: Point3::new(
                Float::max(self.min.x, other.min.x),
                Float::max(self.min.y, other.min.y),
                Float::max(self.min.z, other.min.z),
            ),
            max: Point3::new(
                Float::min(self.max.x, other.max.x),
                Float::min(self.max.y, other.max.y),
                Float::min(self.max.z, other.max.z),
            ),
        })
    }

    pub fn translated(&self, offset: Vector3<T>) -> Aabb<T> {
        Aabb {
            min: self.min + offset,
            max: self.max + offset,
        }
    }

    /// Grows the box by `margin` on every side.
    pub fn inflated(&self, margin: T) -> Aabb<T> {
        let m = Vector3::new(margin, margin, margin);
        Aabb {
            min: self.min - m,
            max: self.max + m,
        }
    }

    /// Extends the box along `axis` (0..3): by `amount` in the negative
    /// direction when `negative`, positive otherwise.
    pub fn extruded(&self, axis: usize, amount: T, negative: bool) -> Aabb<T> {
        let mut out = *self;
        if negative {
            out.min[axis] -= amount;
        } else {
            out.max[axis] += amount;
        }
        out
    }

    pub fn corners(&self) -> [Point3<T>; 8] {
        let (lo, hi) = (self.min, self.max);
        [
            Point3::new(lo.x, lo.y, lo.z),
            Point3::new(hi.x, lo.y, lo.z),
            Point3::new(lo.x, hi.y, lo.z),
            Point3::new(hi.x, hi.y, lo.z),
            Point3::new(lo.x, lo.y, hi.z),
            Point3::new(hi.x, lo.y, hi.z),
            Point3::new(lo.x, hi.y, hi.z),
            Point3::new(hi.x, hi.y, hi.z),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_swaps_corners() {
        let bb = Aabb::new(Point3::new(1.0, -2.0, 3.0), Point3::new(0.0, 0.0, 0.0));
        assert_eq!(bb.min, Point3::new(0.0, -2.0, 0.0));
        assert_eq!(bb.max, Point3::new(1.0, 0.0, 3.0));
    }

    #[test]
    fn intersection_of_disjoint_is_none() {
        let a = Aabb::new(Point3::origin(), Point3::new(1.0, 1.0, 1.0));
        let b = a.translated(Vector3::new(2.0, 0.0, 0.0));
        assert!(a.intersection(&b).is_none());
        assert!(!a.intersects(&b));
    }

    #[test]
    fn extrusion_directions() {
        let a: Aabb = Aabb::new(Point3::origin(), Point3::new(1.0, 1.0, 1.0));
        assert_eq!(a.extruded(0, 2.0, true).min.x, -2.0);
        assert_eq!(a.extruded(0, 2.0, false).max.x, 3.0);
    }
}
