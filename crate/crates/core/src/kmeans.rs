//! k-means clustering: k-means++ seeding followed by Lloyd iterations, with
//! seeded restarts.
//!
//! All randomness comes from `SplitMix64` streams. A run's restarts use
//! sub-seeds drawn from a stream seeded with the run seed, so the same
//! `(points, k, seed, restarts)` always returns the same partition regardless
//! of how the restarts are scheduled across threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, FeatureMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once no centroid moves by more than this squared distance.
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            seed: 42,
            restarts: 10,
            max_iter: 300,
            tol: 1e-4,
        }
    }
}

impl KMeansParams {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_restarts(self, restarts: usize) -> Self {
        Self { restarts, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub centroids: Vec<Vec<f64>>,
    /// 0-based cluster index per point.
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Sub-seed of the restart that produced this result.
    pub sub_seed: u64,
    pub restarts_run: usize,
    /// Inertia after every assignment and every centroid update.
    #[serde(skip)]
    pub inertia_trace: Vec<f64>,
}

impl ClusteringResult {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    /// Writes `respondent_id,cluster` with 1-based cluster numbers.
    pub fn write_assignments_csv<W: std::io::Write>(
        &self,
        row_ids: &[String],
        out: W,
    ) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["respondent_id", "cluster"])?;
        for (id, a) in row_ids.iter().zip(&self.assignments) {
            w.write_record([id.as_str(), &(a + 1).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sub-seeds for `count` restarts of a run seeded with `seed`.
pub fn derive_sub_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut stream = SplitMix64::seed_from_u64(seed);
    (0..count).map(|_| stream.next_u64()).collect()
}

/// Selection probabilities for the next k-means++ centroid: each point's
/// squared distance to its nearest chosen centroid over the total.
///
/// Returns `None` when every point coincides with a chosen centroid.
pub fn next_centroid_probabilities(
    points: &FeatureMatrix,
    chosen: &[Vec<f64>],
) -> Option<Vec<f64>> {
    let weights = nearest_squared_distances(points, chosen);
    let total: f64 = weights.iter().sum();
    (total > 0.0).then(|| weights.iter().map(|w| w / total).collect())
}

fn nearest_squared_distances(points: &FeatureMatrix, chosen: &[Vec<f64>]) -> Vec<f64> {
    points
        .rows()
        .map(|x| {
            chosen
                .iter()
                .map(|c| squared_distance(x, c))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn count_distinct(points: &FeatureMatrix) -> usize {
    let mut rows: Vec<&[f64]> = points.rows().collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows.dedup();
    rows.len()
}

/// k-means++ seeding: a uniformly drawn first centroid, then each further
/// centroid drawn from the points with probability proportional to the
/// squared distance to the nearest centroid chosen so far.
pub fn init_plus_plus<R: Rng + ?Sized>(
    points: &FeatureMatrix,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    check_k(points, k)?;
    let first = rng.gen_range(0..points.nrows());
    init_plus_plus_from(points, first, k, rng)
}

/// k-means++ seeding with the first centroid fixed at point `first`.
pub fn init_plus_plus_from<R: Rng + ?Sized>(
    points: &FeatureMatrix,
    first: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    check_k(points, k)?;
    if points.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("k-means++ input"));
    }
    let mut centroids = vec![points.row(first).to_vec()];
    let mut weights = nearest_squared_distances(points, &centroids);
    while centroids.len() < k {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::TooFewDistinctPoints {
                wanted: k,
                found: count_distinct(points),
            });
        }
        let target = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            pick = Some(i);
            if acc > target {
                break;
            }
        }
        let next = points
            .row(pick.expect("total > 0 implies a positive weight"))
            .to_vec();
        for (w, x) in weights.iter_mut().zip(points.rows()) {
            *w = w.min(squared_distance(x, &next));
        }
        centroids.push(next);
    }
    Ok(centroids)
}

fn check_k(points: &FeatureMatrix, k: usize) -> Result<()> {
    if k == 0 || k > points.nrows() {
        return Err(Error::InvalidArgument(format!(
            "k must be in 1..={}, got {k}",
            points.nrows()
        )));
    }
    Ok(())
}

/// Nearest centroid per point; ties go to the lowest centroid index.
pub fn assign_nearest(points: &FeatureMatrix, centroids: &[Vec<f64>]) -> Vec<usize> {
    points
        .rows()
        .map(|x| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = squared_distance(x, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Sum of squared distances from each point to its assigned centroid.
pub fn inertia(points: &FeatureMatrix, centroids: &[Vec<f64>], assignments: &[usize]) -> f64 {
    points
        .rows()
        .zip(assignments)
        .map(|(x, &a)| squared_distance(x, &centroids[a]))
        .sum()
}

/// Gives every empty cluster a member: the point farthest from its assigned
/// centroid among clusters that can spare one (ties to the lowest index).
fn repair_empty(points: &FeatureMatrix, centroids: &mut [Vec<f64>], assignments: &mut [usize]) {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = -1.0;
        for (i, x) in points.rows().enumerate() {
            let a = assignments[i];
            if sizes[a] < 2 {
                continue;
            }
            let d = squared_distance(x, &centroids[a]);
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        // k <= n guarantees a donor exists
        let i = far.expect("a cluster with two or more members");
        sizes[assignments[i]] -= 1;
        assignments[i] = c;
        sizes[c] = 1;
        centroids[c] = points.row(i).to_vec();
    }
}

fn cluster_means(points: &FeatureMatrix, assignments: &[usize], k: usize) -> Vec<Vec<f64>> {
    let d = points.ncols();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (x, &a) in points.rows().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(x) {
            *s += v;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        s.iter_mut().for_each(|v| *v /= n as f64);
    }
    sums
}

/// Lloyd's algorithm from the given starting centroids.
///
/// Alternates nearest-centroid assignment and mean updates until the
/// assignments stop changing, no centroid moves more than `tol` (squared), or
/// `max_iter` updates have run. The returned centroids are always the means
/// of the returned assignments.
pub fn lloyd(
    points: &FeatureMatrix,
    initial_centroids: Vec<Vec<f64>>,
    max_iter: usize,
    tol: f64,
) -> Result<ClusteringResult> {
    let k = initial_centroids.len();
    if k == 0 || k > points.nrows() {
        return Err(Error::InvalidArgument(format!(
            "need 1..={} initial centroids, got {k}",
            points.nrows()
        )));
    }
    if max_iter == 0 || tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "max_iter must be >= 1 and tol >= 0 (got {max_iter}, {tol})"
        )));
    }
    if initial_centroids
        .iter()
        .any(|c| c.len() != points.ncols() || c.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::NonFinite("initial centroids"));
    }

    let mut centroids = initial_centroids;
    let mut assignments = assign_nearest(points, &centroids);
    let mut trace = vec![inertia(points, &centroids, &assignments)];
    let mut iterations = 0;
    loop {
        iterations += 1;
        repair_empty(points, &mut centroids, &mut assignments);
        let updated = cluster_means(points, &assignments, k);
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| squared_distance(a, b))
            .fold(0.0, f64::max);
        centroids = updated;
        let current = inertia(points, &centroids, &assignments);
        if !current.is_finite() {
            return Err(Error::NonFinite("Lloyd iteration"));
        }
        trace.push(current);

        let next = assign_nearest(points, &centroids);
        if next == assignments {
            break;
        }
        assignments = next;
        trace.push(inertia(points, &centroids, &assignments));
        if shift <= tol || iterations >= max_iter {
            // one last update so the centroids are the means of these assignments
            repair_empty(points, &mut centroids, &mut assignments);
            centroids = cluster_means(points, &assignments, k);
            trace.push(inertia(points, &centroids, &assignments));
            break;
        }
    }

    Ok(ClusteringResult {
        inertia: inertia(points, &centroids, &assignments),
        centroids,
        assignments,
        iterations,
        seed: 0,
        sub_seed: 0,
        restarts_run: 1,
        inertia_trace: trace,
    })
}

fn run_once(
    points: &FeatureMatrix,
    k: usize,
    sub_seed: u64,
    params: &KMeansParams,
) -> Result<ClusteringResult> {
    let mut rng = SplitMix64::seed_from_u64(sub_seed);
    let init = init_plus_plus(points, k, &mut rng)?;
    let mut result = lloyd(points, init, params.max_iter, params.tol)?;
    result.sub_seed = sub_seed;
    Ok(result)
}

/// Best-of-`restarts` k-means: lowest inertia wins, ties to the lowest
/// sub-seed.
pub fn fit(points: &FeatureMatrix, k: usize, params: &KMeansParams) -> Result<ClusteringResult> {
    check_k(points, k)?;
    if params.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    let sub_seeds = derive_sub_seeds(params.seed, params.restarts);
    let runs: Vec<Result<ClusteringResult>> = sub_seeds
        .par_iter()
        .map(|&s| run_once(points, k, s, params))
        .collect();

    let mut best: Option<ClusteringResult> = None;
    for run in runs {
        let run = run?;
        let better = match &best {
            None => true,
            Some(b) => {
                run.inertia < b.inertia || (run.inertia == b.inertia && run.sub_seed < b.sub_seed)
            }
        };
        if better {
            best = Some(run);
        }
    }
    let mut best = best.expect("restarts >= 1");
    best.seed = params.seed;
    best.restarts_run = params.restarts;
    Ok(best)
}
