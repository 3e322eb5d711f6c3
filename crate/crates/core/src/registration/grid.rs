//! Uniform spatial hash grid for nearest-neighbor queries.

use std::collections::HashMap;

use nalgebra::Point3;
use num_traits::Float;

use crate::scalar::Real;

/// Hash grid over a fixed point set with cubic cells.
pub struct SpatialGrid<'a, T: Real> {
    points: &'a [Point3<T>],
    cells: HashMap<(i64, i64, i64), Vec<u32>>,
    cell: T,
}

impl<'a, T: Real> SpatialGrid<'a, T> {
    pub fn build(points: &'a [Point3<T>], cell: T) -> Self {
        assert!(cell > T::zero());
        let mut cells: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(p, cell)).or_default().push(i as u32);
        }
        Self {
            points,
            cells,
            cell,
        }
    }

    fn key(p: &Point3<T>, cell: T) -> (i64, i64, i64) {
        let f = |v: T| (v / cell).to_f64_lossy().floor() as i64;
        (f(p.x), f(p.y), f(p.z))
    }

    /// True iff some point lies within `radius` of `p`. Exact: scans every
    /// cell overlapping the query ball.
    pub fn has_within(&self, p: &Point3<T>, radius: T) -> bool {
        self.nearest_within(p, radius).is_some()
    }

    /// Index and distance of the nearest point within `radius`, if any.
    /// Expanding-shell search; deterministic because the minimum distance is
    /// unique up to exact ties, which are broken by the lowest index.
    pub fn nearest_within(&self, p: &Point3<T>, radius: T) -> Option<(usize, T)> {
        let center = Self::key(p, self.cell);
        let max_ring = (radius / self.cell).to_f64_lossy().ceil() as i64 + 1;
        let mut best: Option<(usize, T)> = None;
        for ring in 0..=max_ring {
            // Points in ring r are at least (r-1)·cell away; once the best
            // found distance is below that bound no further ring can win.
            if let Some((_, d)) = best {
                let bound = self.cell * T::from_i64(ring - 1).unwrap();
                if ring >= 1 && d <= bound {
                    break;
                }
            }
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    for dz in -ring..=ring {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != ring {
                            continue;
                        }
                        let key = (center.0 + dx, center.1 + dy, center.2 + dz);
                        if let Some(indices) = self.cells.get(&key) {
                            for &i in indices {
                                let d = (self.points[i as usize] - p).norm();
                                if d <= radius {
                                    let better = match best {
                                        None => true,
                                        Some((bi, bd)) => {
                                            d < bd || (d == bd && (i as usize) < bi)
                                        }
                                    };
                                    if better {
                                        best = Some((i as usize, d));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nearest_matches_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let points: Vec<Point3<f64>> = (0..400)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-0.2..0.2),
                    rng.gen_range(-0.2..0.2),
                    rng.gen_range(-0.2..0.2),
                )
            })
            .collect();
        let grid = SpatialGrid::build(&points, 0.005);
        for _ in 0..200 {
            let q = Point3::new(
                rng.gen_range(-0.25..0.25),
                rng.gen_range(-0.25..0.25),
                rng.gen_range(-0.25..0.25),
            );
            let radius = rng.gen_range(0.001..0.1);
            let brute = points
                .iter()
                .enumerate()
                .map(|(i, p)| (i, (p - q).norm()))
                .filter(|(_, d)| *d <= radius)
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let fast = grid.nearest_within(&q, radius);
            match (brute, fast) {
                (None, None) => {}
                (Some((_, bd)), Some((_, fd))) => assert!((bd - fd).abs() < 1e-12),
                other => panic!("mismatch {other:?}"),
            }
        }
    }
}
