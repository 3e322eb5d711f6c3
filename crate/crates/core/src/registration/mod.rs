//! Coarse-to-fine rigid point-cloud registration: distance-consistency
//! RANSAC for the initial alignment, then trimmed point-to-point ICP.

mod grid;

pub use grid::SpatialGrid;

use nalgebra::{Matrix3, Point3, UnitQuaternion, Vector3};
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{PointCloud, Pose};
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistrationError {
    #[error("operation requires a non-empty point cloud")]
    EmptyCloud,
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
}

/// Registration tuning knobs. Defaults: 4096 RANSAC iterations, 5 mm inlier
/// threshold, 60 ICP iterations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>", default)]
pub struct RegParams<T: Real = f64> {
    pub ransac_iterations: usize,
    pub inlier_threshold: T,
    pub icp_max_iterations: usize,
    /// ICP stops when the mean correspondence error changes less than this.
    pub icp_convergence: T,
    /// Correspondences farther than this are trimmed from ICP updates.
    pub max_correspondence: T,
    /// Hypothesis search runs on clouds decimated to at most this many points.
    pub decimate_to: usize,
    /// Candidate scene pairs examined per RANSAC iteration.
    pub pairs_per_iteration: usize,
    /// Stop the search early once this fitness is reached.
    pub early_stop_fitness: f64,
    pub seed: u64,
}

impl<T: Real> Default for RegParams<T> {
    fn default() -> Self {
        Self {
            ransac_iterations: 4096,
            inlier_threshold: T::from_f64_lossy(0.005),
            icp_max_iterations: 60,
            icp_convergence: T::from_f64_lossy(1e-6),
            max_correspondence: T::from_f64_lossy(0.02),
            decimate_to: 256,
            pairs_per_iteration: 64,
            early_stop_fitness: 0.95,
            seed: 0,
        }
    }
}

/// Result of registering a model cloud onto a scene cloud.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct RegistrationResult<T: Real = f64> {
    /// Model-to-scene transform.
    pub transform: Pose<T>,
    /// Fraction of model points with a scene neighbor within the inlier
    /// threshold, in `[0, 1]`.
    pub fitness: f64,
    pub inlier_rmse: T,
    /// ICP iterations performed.
    pub iterations: usize,
    /// Mean correspondence error after each ICP iteration.
    pub icp_error_history: Vec<f64>,
    /// False when no alignment hypothesis was found or ICP hit its iteration
    /// cap; the result is still the best effort found.
    pub converged: bool,
}

/// Fraction of model points whose transformed position has a scene neighbor
/// within `threshold`.
pub fn fitness_of<T: Real>(
    model: &PointCloud<T>,
    scene: &PointCloud<T>,
    transform: &Pose<T>,
    threshold: T,
) -> Result<f64, RegistrationError> {
    assert!(threshold > T::zero(), "threshold must be positive");
    if model.is_empty() || scene.is_empty() {
        return Err(RegistrationError::EmptyCloud);
    }
    let grid = SpatialGrid::build(&scene.points, threshold);
    let inliers = model
        .points
        .iter()
        .filter(|p| grid.has_within(&transform.transform_point(p), threshold))
        .count();
    Ok(inliers as f64 / model.len() as f64)
}

/// Registers `model` onto `scene`.
///
/// RANSAC stage: samples well-spread model triples, finds scene triples with
/// consistent pairwise distances through a sorted pair-distance index,
/// solves the three-point rigid fit and keeps the hypothesis with the most
/// inliers. ICP stage: trimmed point-to-point refinement until the mean
/// correspondence error stabilizes.
pub fn register<T: Real>(
    model: &PointCloud<T>,
    scene: &PointCloud<T>,
    params: &RegParams<T>,
) -> Result<RegistrationResult<T>, RegistrationError> {
    if model.len() < 50 || scene.len() < 50 {
        return Err(RegistrationError::DegenerateInput("fewer than 50 points"));
    }
    check_rank(model)?;
    check_rank(scene)?;

    let model_dec = decimate_to(model, params.decimate_to);
    let scene_dec = decimate_to(scene, params.decimate_to);
    let score_grid = SpatialGrid::build(&scene_dec.points, params.inlier_threshold);

    let hypothesis = ransac(&model_dec, &scene_dec, &score_grid, params);
    let initial = hypothesis.clone().unwrap_or_else(Pose::identity);

    let scene_grid = SpatialGrid::build(&scene.points, params.inlier_threshold);
    let (refined, history) = icp(&model_dec, &scene.points, &scene_grid, initial, params);

    let fitness = fitness_of(model, scene, &refined, params.inlier_threshold)?;
    let inlier_rmse = inlier_rmse(model, &scene_grid, &refined, params.inlier_threshold);
    let icp_converged = history.len() < params.icp_max_iterations;
    Ok(RegistrationResult {
        transform: refined,
        fitness,
        inlier_rmse,
        iterations: history.len(),
        icp_error_history: history,
        converged: hypothesis.is_some() && icp_converged,
    })
}

fn decimate_to<T: Real>(cloud: &PointCloud<T>, cap: usize) -> PointCloud<T> {
    if cloud.len() <= cap {
        cloud.clone()
    } else {
        cloud.decimated(cloud.len().div_ceil(cap))
    }
}

/// Rejects clouds whose covariance has rank below 2 (a line or a single
/// repeated point gives rigid fits no unique solution).
fn check_rank<T: Real>(cloud: &PointCloud<T>) -> Result<(), RegistrationError> {
    let c = cloud.centroid().ok_or(RegistrationError::EmptyCloud)?;
    let mut cov = Matrix3::<T>::zeros();
    for p in &cloud.points {
        let d = p - c;
        cov += d * d.transpose();
    }
    cov /= T::from_usize(cloud.len()).unwrap();
    let eigen = cov.symmetric_eigenvalues();
    let mut vals: Vec<T> = eigen.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let tiny = T::from_f64_lossy(1e-12);
    if vals[0] < tiny {
        return Err(RegistrationError::DegenerateInput("near-duplicate points"));
    }
    if vals[1] < vals[0] * T::from_f64_lossy(1e-6) + tiny {
        return Err(RegistrationError::DegenerateInput("collinear points"));
    }
    Ok(())
}

/// Sorted pair-distance index over the decimated scene.
struct PairIndex<T: Real> {
    /// (distance, i, j) sorted by distance.
    pairs: Vec<(T, u32, u32)>,
}

impl<T: Real> PairIndex<T> {
    fn build(points: &[Point3<T>]) -> Self {
        let mut pairs = Vec::with_capacity(points.len() * (points.len() - 1) / 2);
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                pairs.push(((points[i] - points[j]).norm(), i as u32, j as u32));
            }
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Self { pairs }
    }

    /// Index range of pairs whose distance lies within `tol` of `d`.
    fn window(&self, d: T, tol: T) -> std::ops::Range<usize> {
        let lo = self.pairs.partition_point(|p| p.0 < d - tol);
        let hi = self.pairs.partition_point(|p| p.0 <= d + tol);
        lo..hi
    }
}

fn ransac<T: Real>(
    model: &PointCloud<T>,
    scene: &PointCloud<T>,
    score_grid: &SpatialGrid<'_, T>,
    params: &RegParams<T>,
) -> Option<Pose<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let index = PairIndex::build(&scene.points);
    let tol = params.inlier_threshold;
    let m = &model.points;
    let s = &scene.points;

    let diameter = cloud_diameter_estimate(m);
    let min_spread = diameter * T::from_f64_lossy(0.4);

    let mut best: Option<(usize, T, Pose<T>)> = None;
    let quick_n = 16.min(m.len());
    let target = ((params.early_stop_fitness * m.len() as f64).ceil() as usize).max(1);

    // Partner lists rebuilt per iteration: partners_*[p] holds scene points at
    // the right distance from p for the second and third triangle edges.
    let mut partners_ac: Vec<Vec<u32>> = vec![Vec::new(); s.len()];
    let mut partners_bc: Vec<Vec<u32>> = vec![Vec::new(); s.len()];
    const WINDOW_CAP: usize = 4096;

    'outer: for _ in 0..params.ransac_iterations {
        // Well-spread model triple: long baselines land in sparse regions of
        // the pair-distance index, keeping candidate windows pure.
        let (a, b, c) = match sample_triple(&mut rng, m, min_spread) {
            Some(t) => t,
            None => continue,
        };
        let dab = (m[a] - m[b]).norm();
        let dac = (m[a] - m[c]).norm();
        let dbc = (m[b] - m[c]).norm();

        let wab = index.window(dab, tol);
        if wab.is_empty() {
            continue;
        }
        for list in partners_ac.iter_mut() {
            list.clear();
        }
        for list in partners_bc.iter_mut() {
            list.clear();
        }
        for (_, i, j) in index.pairs[index.window(dac, tol)].iter().take(WINDOW_CAP) {
            partners_ac[*i as usize].push(*j);
            partners_ac[*j as usize].push(*i);
        }
        for (_, i, j) in index.pairs[index.window(dbc, tol)].iter().take(WINDOW_CAP) {
            partners_bc[*i as usize].push(*j);
            partners_bc[*j as usize].push(*i);
        }

        let len = wab.len();
        let samples = params.pairs_per_iteration.min(len);
        for n in 0..samples {
            let pick = if len <= params.pairs_per_iteration {
                wab.start + n
            } else {
                wab.start + rng.gen_range(0..len)
            };
            let (_, i, j) = index.pairs[pick];
            for (pi, pj) in [(i as usize, j as usize), (j as usize, i as usize)] {
                // Third point must close the triangle on both anchors.
                for &k in &partners_ac[pi] {
                    if k as usize == pj || !partners_bc[pj].contains(&k) {
                        continue;
                    }
                    let q = s[k as usize];
                    let Some(pose) =
                        rigid_from_correspondences(&[m[a], m[b], m[c]], &[s[pi], s[pj], q])
                    else {
                        continue;
                    };
                    // Quick screen on a fixed subset before full scoring.
                    let quick_hits = (0..quick_n)
                        .filter(|&idx| {
                            let p = pose.transform_point(&m[idx * m.len() / quick_n]);
                            score_grid.has_within(&p, tol)
                        })
                        .count();
                    if quick_hits * 3 < quick_n {
                        continue;
                    }
                    let (count, rmse) = score(m, score_grid, &pose, tol);
                    let better = match &best {
                        None => true,
                        Some((bc, br, _)) => count > *bc || (count == *bc && rmse < *br),
                    };
                    if better {
                        best = Some((count, rmse, pose));
                    }
                    if matches!(&best, Some((count, _, _)) if *count >= target) {
                        break 'outer;
                    }
                }
            }
        }
    }
    best.map(|(_, _, p)| p)
}

fn cloud_diameter_estimate<T: Real>(points: &[Point3<T>]) -> T {
    let bb = crate::geometry::Aabb::from_points(points.iter().copied()).expect("non-empty");
    bb.extents().norm()
}

fn sample_triple<T: Real>(
    rng: &mut ChaCha8Rng,
    points: &[Point3<T>],
    min_spread: T,
) -> Option<(usize, usize, usize)> {
    for _ in 0..8 {
        let a = rng.gen_range(0..points.len());
        let b = rng.gen_range(0..points.len());
        let c = rng.gen_range(0..points.len());
        if a == b || b == c || a == c {
            continue;
        }
        let ab = points[a] - points[b];
        let ac = points[a] - points[c];
        if ab.norm() < min_spread || ac.norm() < min_spread || (points[b] - points[c]).norm() < min_spread
        {
            continue;
        }
        // Reject flat triangles; they leave the rotation under-determined.
        if ab.cross(&ac).norm() < min_spread * min_spread * T::from_f64_lossy(0.2) {
            continue;
        }
        return Some((a, b, c));
    }
    None
}

fn score<T: Real>(
    model: &[Point3<T>],
    grid: &SpatialGrid<'_, T>,
    pose: &Pose<T>,
    threshold: T,
) -> (usize, T) {
    let mut count = 0usize;
    let mut sq_sum = T::zero();
    for p in model {
        if let Some((_, d)) = grid.nearest_within(&pose.transform_point(p), threshold) {
            count += 1;
            sq_sum += d * d;
        }
    }
    let rmse = if count > 0 {
        Float::sqrt(sq_sum / T::from_usize(count).unwrap())
    } else {
        T::infinity()
    };
    (count, rmse)
}

/// Least-squares rigid transform mapping `src` onto `dst` (Horn's method via
/// SVD of the cross-covariance). Returns `None` for degenerate inputs.
pub fn rigid_from_correspondences<T: Real>(
    src: &[Point3<T>],
    dst: &[Point3<T>],
) -> Option<Pose<T>> {
    assert_eq!(src.len(), dst.len());
    if src.len() < 3 {
        return None;
    }
    let n = T::from_usize(src.len()).unwrap();
    let cs = src.iter().fold(Vector3::zeros(), |a, p| a + p.coords) / n;
    let cd = dst.iter().fold(Vector3::zeros(), |a, p| a + p.coords) / n;
    let mut h = Matrix3::<T>::zeros();
    for (s, d) in src.iter().zip(dst) {
        h += (s.coords - cs) * (d.coords - cd).transpose();
    }
    let svd = h.svd(true, true);
    let (u, v_t) = (svd.u?, svd.v_t?);
    let mut r = v_t.transpose() * u.transpose();
    if r.determinant() < T::zero() {
        // Flip the weakest singular direction to stay in SO(3).
        let mut v = v_t.transpose();
        v.set_column(2, &(-v.column(2)));
        r = v * u.transpose();
    }
    let rotation = UnitQuaternion::from_rotation_matrix(&nalgebra::Rotation3::from_matrix_unchecked(r));
    let translation = cd - r * cs;
    Some(Pose {
        rotation,
        translation,
    })
}

/// Trimmed point-to-point ICP. Returns the refined pose and the mean
/// correspondence error after each iteration (non-increasing; refinement
/// stops rather than accept a worse mean).
fn icp<T: Real>(
    model: &PointCloud<T>,
    scene: &[Point3<T>],
    grid: &SpatialGrid<'_, T>,
    initial: Pose<T>,
    params: &RegParams<T>,
) -> (Pose<T>, Vec<f64>) {
    let mut pose = initial;
    let mut prev_pose = pose;
    let mut history: Vec<f64> = Vec::new();
    let mut prev_error = T::infinity();

    for _ in 0..params.icp_max_iterations {
        let mut src = Vec::new();
        let mut dst = Vec::new();
        let mut err_sum = T::zero();
        for p in &model.points {
            let tp = pose.transform_point(p);
            if let Some((j, d)) = grid.nearest_within(&tp, params.max_correspondence) {
                src.push(*p);
                dst.push(scene[j]);
                err_sum += d;
            }
        }
        if src.len() < 3 {
            break;
        }
        let mean = err_sum / T::from_usize(src.len()).unwrap();
        if mean > prev_error {
            // The last update made things worse; keep the previous pose.
            pose = prev_pose;
            break;
        }
        history.push(mean.to_f64_lossy());
        if prev_error - mean < params.icp_convergence {
            break;
        }
        prev_error = mean;
        prev_pose = pose;
        match rigid_from_correspondences(&src, &dst) {
            Some(next) => pose = next,
            None => break,
        }
    }
    (pose, history)
}

fn inlier_rmse<T: Real>(
    model: &PointCloud<T>,
    grid: &SpatialGrid<'_, T>,
    pose: &Pose<T>,
    threshold: T,
) -> T {
    let mut sq = T::zero();
    let mut n = 0usize;
    for p in &model.points {
        if let Some((_, d)) = grid.nearest_within(&pose.transform_point(p), threshold) {
            sq += d * d;
            n += 1;
        }
    }
    if n == 0 {
        T::zero()
    } else {
        Float::sqrt(sq / T::from_usize(n).unwrap())
    }
}

#[cfg(test)]
mod tests;
