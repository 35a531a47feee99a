//! Choosing K (elbow of the distortion curve) and scoring a partition
//! (silhouette coefficient).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmeans::{self, KMeansParams};
use crate::matrix::{distance, FeatureMatrix};

/// Distortion (mean squared distance to the assigned centroid) per K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionCurve {
    pub k_values: Vec<usize>,
    pub distortion: Vec<f64>,
    pub elbow_k: Option<usize>,
}

impl DistortionCurve {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "distortion", "elbow"])?;
        for (&k, d) in self.k_values.iter().zip(&self.distortion) {
            w.write_record([
                k.to_string(),
                d.to_string(),
                (Some(k) == self.elbow_k).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fits k-means for every K in `k_min..=k_max` with the same seed policy.
pub fn sweep(
    points: &FeatureMatrix,
    k_min: usize,
    k_max: usize,
    params: &KMeansParams,
) -> Result<DistortionCurve> {
    if k_min < 1 || k_min >= k_max || k_max > points.nrows() {
        return Err(Error::InvalidArgument(format!(
            "sweep range {k_min}..={k_max} must satisfy 1 <= min < max <= {}",
            points.nrows()
        )));
    }
    let n = points.nrows() as f64;
    let k_values: Vec<usize> = (k_min..=k_max).collect();
    let distortion = k_values
        .par_iter()
        .map(|&k| kmeans::fit(points, k, params).map(|r| r.inertia / n))
        .collect::<Result<Vec<_>>>()?;
    Ok(DistortionCurve {
        k_values,
        distortion,
        elbow_k: None,
    })
}

/// Picks the interior K with the largest second difference
/// `(D(k-1) - D(k)) - (D(k) - D(k+1))`, ties to the smallest K, and records it
/// on the curve.
pub fn find_elbow(curve: &mut DistortionCurve) -> Result<usize> {
    let (ks, d) = (&curve.k_values, &curve.distortion);
    if ks.len() < 3 || d.len() != ks.len() {
        return Err(Error::InvalidArgument(format!(
            "elbow detection needs at least 3 points, got {}",
            ks.len()
        )));
    }
    if ks.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::InvalidArgument(
            "elbow detection needs consecutive k values".into(),
        ));
    }
    let mut best = 1;
    let mut best_gain = f64::NEG_INFINITY;
    for i in 1..ks.len() - 1 {
        let gain = (d[i - 1] - d[i]) - (d[i] - d[i + 1]);
        if gain > best_gain {
            best_gain = gain;
            best = i;
        }
    }
    curve.elbow_k = Some(ks[best]);
    Ok(ks[best])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteReport {
    pub per_point: Vec<f64>,
    pub mean: f64,
    /// Mean silhouette of the members of each cluster, by 0-based index.
    pub per_cluster_mean: Vec<f64>,
}

/// Silhouette coefficient of a partition, using Euclidean distance in the
/// space of `points`.
///
/// Points alone in their cluster score 0.
pub fn silhouette(points: &FeatureMatrix, assignments: &[usize]) -> Result<SilhouetteReport> {
    let n = points.nrows();
    if assignments.len() != n {
        return Err(Error::Structure(format!(
            "{} assignments for {n} points",
            assignments.len()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(
            "silhouette needs at least 2 points".into(),
        ));
    }
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidArgument(format!(
            "cluster index {empty} has no members"
        )));
    }
    if k < 2 {
        return Err(Error::InvalidArgument(
            "silhouette undefined for K = 1".into(),
        ));
    }

    let per_point: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let own = assignments[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            let xi = points.row(i);
            for (j, xj) in points.rows().enumerate() {
                if j != i {
                    sums[assignments[j]] += distance(xi, xj);
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect();

    let mean = per_point.iter().sum::<f64>() / n as f64;
    let mut cluster_sums = vec![0.0; k];
    for (s, &a) in per_point.iter().zip(assignments) {
        cluster_sums[a] += s;
    }
    let per_cluster_mean = cluster_sums
        .iter()
        .zip(&sizes)
        .map(|(s, &c)| s / c as f64)
        .collect();
    Ok(SilhouetteReport {
        per_point,
        mean,
        per_cluster_mean,
    })
}
