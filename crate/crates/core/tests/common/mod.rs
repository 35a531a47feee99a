//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;

use likert_cluster::FeatureMatrix;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use rand_xoshiro::SplitMix64;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

pub fn random_rows(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| (0..d).map(|_| r.gen_range(-5.0..5.0)).collect())
        .collect()
}

pub fn matrix(rows: &[Vec<f64>]) -> FeatureMatrix {
    FeatureMatrix::from_rows(rows).unwrap()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]).powi(2);
    }
    s.sqrt()
}

/// Textbook silhouette from a full pairwise distance table.
pub fn brute_silhouette(points: &[Vec<f64>], labels: &[usize]) -> (Vec<f64>, f64) {
    let n = points.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            dist[i][j] = euclid(&points[i], &points[j]);
        }
    }
    let k = labels.iter().max().unwrap() + 1;
    let mut s = vec![0.0; n];
    for i in 0..n {
        let own: Vec<usize> = (0..n)
            .filter(|&j| j != i && labels[j] == labels[i])
            .collect();
        if own.is_empty() {
            continue;
        }
        let a = own.iter().map(|&j| dist[i][j]).sum::<f64>() / own.len() as f64;
        let mut b = f64::INFINITY;
        for c in 0..k {
            if c == labels[i] {
                continue;
            }
            let members: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
            if members.is_empty() {
                continue;
            }
            let m = members.iter().map(|&j| dist[i][j]).sum::<f64>() / members.len() as f64;
            if m < b {
                b = m;
            }
        }
        s[i] = if a < b {
            1.0 - a / b
        } else if a > b {
            b / a - 1.0
        } else {
            0.0
        };
    }
    let mean = s.iter().sum::<f64>() / n as f64;
    (s, mean)
}

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand Index from the contingency table of two labelings.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let rows: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..kb).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let index: f64 = table.iter().flatten().map(|&c| choose2(c)).sum();
    let sum_a: f64 = rows.iter().map(|&c| choose2(c)).sum();
    let sum_b: f64 = cols.iter().map(|&c| choose2(c)).sum();
    let total = choose2(a.len() as u64);
    let expected = sum_a * sum_b / total;
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Minimum within-cluster sum of squares over every labeling that uses all
/// `k` labels.
pub fn exact_kmeans_optimum(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let d = points[0].len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut used = vec![false; k];
        labels.iter().for_each(|&l| used[l] = true);
        if used.iter().all(|&u| u) {
            let mut sse = 0.0;
            for c in 0..k {
                let members: Vec<&Vec<f64>> = (0..n)
                    .filter(|&i| labels[i] == c)
                    .map(|i| &points[i])
                    .collect();
                let mut mean = vec![0.0; d];
                for p in &members {
                    for j in 0..d {
                        mean[j] += p[j] / members.len() as f64;
                    }
                }
                for p in &members {
                    sse += (0..d).map(|j| (p[j] - mean[j]).powi(2)).sum::<f64>();
                }
            }
            best = best.min(sse);
        }
        // odometer increment over k^n labelings
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// Gaussian blobs with unit variance per coordinate; returns points and
/// planted labels.
pub fn gaussian_blobs(
    centers: &[Vec<f64>],
    per_blob: usize,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut r = rng(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_blob {
            points.push(center.iter().map(|m| m + normal.sample(&mut r)).collect());
            labels.push(c);
        }
    }
    (points, labels)
}

/// Square with side 10 in the plane.
pub fn square_centers() -> Vec<Vec<f64>> {
    vec![
        vec![0.0, 0.0],
        vec![10.0, 0.0],
        vec![0.0, 10.0],
        vec![10.0, 10.0],
    ]
}

/// Regular tetrahedron with edge length 10: all pairwise center distances
/// equal 10.
pub fn tetrahedron_centers() -> Vec<Vec<f64>> {
    let a = 10.0 / (2.0f64).sqrt() / 2.0;
    vec![
        vec![a, a, a],
        vec![a, -a, -a],
        vec![-a, a, -a],
        vec![-a, -a, a],
    ]
}

/// Survey CSV laid out like the bundled scales: 24 Hexad items (1..=7)
/// followed by 60 GRSLSS items (1..=5). Respondents come from a few latent
/// profiles so the data carries some cluster structure.
pub fn synthetic_survey_csv(n: usize, seed: u64) -> String {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let profiles: Vec<Vec<f64>> = (0..5)
        .map(|_| (0..84).map(|_| r.gen_range(-1.5..1.5)).collect())
        .collect();
    let mut out = String::from("respondent_id");
    for j in 0..24 {
        write!(out, ",hexad_{:02}", j + 1).unwrap();
    }
    for j in 0..60 {
        write!(out, ",grslss_{:02}", j + 1).unwrap();
    }
    out.push('\n');
    for i in 0..n {
        let p = &profiles[r.gen_range(0..profiles.len())];
        write!(out, "s{:03}", i + 1).unwrap();
        for (j, shift) in p.iter().enumerate() {
            let (lo, hi) = if j < 24 { (1.0, 7.0) } else { (1.0, 5.0) };
            let mid = (lo + hi) / 2.0;
            let v: f64 = (mid + shift + 0.8 * noise.sample(&mut r))
                .round()
                .clamp(lo, hi);
            write!(out, ",{}", v as i64).unwrap();
        }
        out.push('\n');
    }
    out
}
