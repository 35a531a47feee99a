//! Cluster analysis artifacts: size distribution, descriptive statistics,
//! per-cluster subscale means with dominant-type labels, and the rendered
//! report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate::{DistortionCurve, SilhouetteReport};
use crate::survey::{ScaleDefinition, ScoreMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSize {
    /// 1-based cluster number.
    pub cluster: usize,
    pub size: usize,
}

/// Cluster sizes, largest first, ties by ascending cluster number.
pub fn distribution(assignments: &[usize], k: usize) -> Vec<ClusterSize> {
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    let mut rows: Vec<ClusterSize> = sizes
        .into_iter()
        .enumerate()
        .map(|(c, size)| ClusterSize {
            cluster: c + 1,
            size,
        })
        .collect();
    rows.sort_by(|a, b| b.size.cmp(&a.size).then(a.cluster.cmp(&b.cluster)));
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubscaleStats {
    pub subscale: String,
    pub scale: String,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (divisor n - 1).
    pub std: f64,
}

pub fn describe(scores: &ScoreMatrix) -> Result<Vec<SubscaleStats>> {
    let n = scores.nrows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "descriptive statistics need at least 2 respondents, got {n}"
        )));
    }
    Ok((0..scores.ncols())
        .map(|j| {
            let col: Vec<f64> = (0..n).map(|i| scores.get(i, j)).collect();
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            SubscaleStats {
                subscale: scores.columns()[j].clone(),
                scale: scores.column_scales()[j].clone(),
                count: n,
                mean,
                std: var.sqrt(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubscaleMean {
    pub subscale: String,
    pub mean: f64,
}

/// The subscales of one scale that share the top floored mean.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominantSet {
    pub scale: String,
    pub subscales: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    /// 1-based cluster number.
    pub cluster: usize,
    pub size: usize,
    pub subscale_means: Vec<SubscaleMean>,
    /// One entry per scale, in scale order.
    pub dominant: Vec<DominantSet>,
}

impl ClusterProfile {
    pub fn dominant_for(&self, scale: &str) -> Option<&[String]> {
        self.dominant
            .iter()
            .find(|d| d.scale == scale)
            .map(|d| d.subscales.as_slice())
    }

    pub fn mean_of(&self, subscale: &str) -> Option<f64> {
        self.subscale_means
            .iter()
            .find(|m| m.subscale == subscale)
            .map(|m| m.mean)
    }
}

/// Per-cluster subscale means and dominant types.
///
/// Within each scale the dominant set is every subscale whose mean, floored
/// to an integer, equals the largest floored mean of that scale.
pub fn profile_clusters(
    scores: &ScoreMatrix,
    assignments: &[usize],
    k: usize,
    scales: &[ScaleDefinition],
) -> Result<Vec<ClusterProfile>> {
    if scores.nrows() != assignments.len() {
        return Err(Error::Structure(format!(
            "{} score rows but {} assignments",
            scores.nrows(),
            assignments.len()
        )));
    }
    if let Some(&bad) = assignments.iter().find(|&&a| a >= k) {
        return Err(Error::Structure(format!(
            "assignment {bad} is not below k = {k}"
        )));
    }
    let mut scale_columns = Vec::with_capacity(scales.len());
    for scale in scales {
        let cols = scale
            .subscales
            .iter()
            .map(|s| {
                scores
                    .column_index(&s.name)
                    .ok_or_else(|| Error::MissingColumn(s.name.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        scale_columns.push(cols);
    }

    let s = scores.ncols();
    let mut sums = vec![vec![0.0; s]; k];
    let mut sizes = vec![0usize; k];
    for (i, &a) in assignments.iter().enumerate() {
        sizes[a] += 1;
        for (acc, v) in sums[a].iter_mut().zip(scores.row(i)) {
            *acc += v;
        }
    }

    let mut profiles = Vec::with_capacity(k);
    for c in 0..k {
        if sizes[c] == 0 {
            return Err(Error::Structure(format!(
                "cluster {} has no members",
                c + 1
            )));
        }
        let means: Vec<f64> = sums[c].iter().map(|v| v / sizes[c] as f64).collect();
        let dominant = scales
            .iter()
            .zip(&scale_columns)
            .map(|(scale, cols)| {
                let top = cols
                    .iter()
                    .map(|&j| means[j].floor())
                    .fold(f64::NEG_INFINITY, f64::max);
                DominantSet {
                    scale: scale.name.clone(),
                    subscales: cols
                        .iter()
                        .filter(|&&j| means[j].floor() == top)
                        .map(|&j| scores.columns()[j].clone())
                        .collect(),
                }
            })
            .collect();
        profiles.push(ClusterProfile {
            cluster: c + 1,
            size: sizes[c],
            subscale_means: scores
                .columns()
                .iter()
                .zip(&means)
                .map(|(name, &mean)| SubscaleMean {
                    subscale: name.clone(),
                    mean,
                })
                .collect(),
            dominant,
        });
    }
    Ok(profiles)
}

/// Run parameters echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub restarts: usize,
    pub feature_mode: String,
    pub scaler: String,
    pub pca_components: usize,
    pub pca_cumulative_ratio: f64,
    pub k: usize,
    /// `"fixed"` or `"elbow"`.
    pub k_source: String,
    pub silhouette_mean: f64,
    /// Space in which distances for the silhouette were measured.
    pub silhouette_space: String,
    pub respondents: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteSummary {
    pub mean: f64,
    /// Keyed by 1-based cluster number.
    pub per_cluster_mean: Vec<ClusterSilhouette>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSilhouette {
    pub cluster: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metadata: ReportMetadata,
    pub distribution: Vec<ClusterSize>,
    pub descriptive: Vec<SubscaleStats>,
    pub profiles: Vec<ClusterProfile>,
    pub silhouette: SilhouetteSummary,
    pub elbow: Option<DistortionCurve>,
}

pub fn render_report(
    profiles: Vec<ClusterProfile>,
    distribution: Vec<ClusterSize>,
    descriptive: Vec<SubscaleStats>,
    silhouette: &SilhouetteReport,
    curve: Option<DistortionCurve>,
    metadata: ReportMetadata,
) -> Report {
    Report {
        metadata,
        distribution,
        descriptive,
        profiles,
        silhouette: SilhouetteSummary {
            mean: silhouette.mean,
            per_cluster_mean: silhouette
                .per_cluster_mean
                .iter()
                .enumerate()
                .map(|(c, &mean)| ClusterSilhouette {
                    cluster: c + 1,
                    mean,
                })
                .collect(),
        },
        elbow: curve,
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Plain-text rendering: three tables, one profile block per cluster, and
    /// a metadata block.
    pub fn to_text(&self) -> String {
        let label = |subscale: &str, scale: &str| format!("{subscale} ({scale})");
        let mut out = String::new();

        out.push_str("Table 1. Distribution of respondents by cluster\n\n");
        let rows: Vec<Vec<String>> = self
            .distribution
            .iter()
            .map(|c| vec![format!("Cluster {}", c.cluster), c.size.to_string()])
            .collect();
        out.push_str(&table(&["Cluster", "Number of Respondents"], &rows));

        out.push_str("\nTable 2. Descriptive statistics of subscale scores\n\n");
        let rows: Vec<Vec<String>> = self
            .descriptive
            .iter()
            .map(|d| {
                vec![
                    label(&d.subscale, &d.scale),
                    d.count.to_string(),
                    format_2dp(d.mean),
                    format_2dp(d.std),
                ]
            })
            .collect();
        out.push_str(&table(
            &["Subscale", "Count", "Mean", "Standard Deviation"],
            &rows,
        ));

        out.push_str("\nTable 3. Subscale means by cluster\n\n");
        let mut header = vec!["Subscale".to_string()];
        header.extend(
            self.profiles
                .iter()
                .map(|p| format!("Cluster-{}", p.cluster)),
        );
        let rows: Vec<Vec<String>> = self
            .descriptive
            .iter()
            .map(|d| {
                let mut row = vec![label(&d.subscale, &d.scale)];
                row.extend(
                    self.profiles
                        .iter()
                        .map(|p| p.mean_of(&d.subscale).map_or_else(String::new, format_2dp)),
                );
                row
            })
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        out.push_str(&table(&header, &rows));

        out.push_str("\nCluster profiles\n\n");
        for p in &self.profiles {
            out.push_str(&format!("Cluster {} (n = {})\n", p.cluster, p.size));
            for d in &p.dominant {
                out.push_str(&format!("  {}: {}\n", d.scale, d.subscales.join(", ")));
            }
        }

        let m = &self.metadata;
        out.push_str("\nMetadata\n\n");
        let rows = vec![
            vec!["respondents".into(), m.respondents.to_string()],
            vec!["feature mode".into(), m.feature_mode.clone()],
            vec!["scaler".into(), m.scaler.clone()],
            vec!["PCA components".into(), m.pca_components.to_string()],
            vec![
                "PCA cumulative variance".into(),
                format_2dp(m.pca_cumulative_ratio),
            ],
            vec!["K".into(), format!("{} ({})", m.k, m.k_source)],
            vec!["seed".into(), m.seed.to_string()],
            vec!["restarts".into(), m.restarts.to_string()],
            vec!["silhouette mean".into(), format_2dp(m.silhouette_mean)],
            vec!["silhouette space".into(), m.silhouette_space.clone()],
        ];
        for row in rows {
            out.push_str(&format!("{:<24} {}\n", format!("{}:", row[0]), row[1]));
        }
        out
    }
}

/// Left-aligned first column, right-aligned others, two-space gutters.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (j, cell) in cells.iter().enumerate().take(cols) {
            if j > 0 {
                s.push_str("  ");
            }
            let pad = widths[j] - cell.chars().count();
            if j == 0 {
                s.push_str(cell);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str(&" ".repeat(pad));
                s.push_str(cell);
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    out.push_str(&line(
        &widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>(),
    ));
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

/// Two-decimal rendering with half-up rounding on the shortest decimal
/// representation of `x`, so `40.115` becomes `"40.12"`.
pub fn format_2dp(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let repr = x.abs().to_string();
    let (int_part, frac) = repr.split_once('.').unwrap_or((&repr, ""));
    let frac: Vec<u8> = frac
        .bytes()
        .chain(std::iter::repeat(b'0'))
        .take(3)
        .collect();
    let mut digits: Vec<u8> = int_part.bytes().chain(frac[..2].iter().copied()).collect();
    if frac[2] >= b'5' {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, b'1');
                break;
            }
            i -= 1;
            if digits[i] == b'9' {
                digits[i] = b'0';
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 2;
    let body = format!(
        "{}.{}",
        std::str::from_utf8(&digits[..split]).unwrap(),
        std::str::from_utf8(&digits[split..]).unwrap()
    );
    if x < 0.0 && digits.iter().any(|&d| d != b'0') {
        format!("-{body}")
    } else {
        body
    }
}
