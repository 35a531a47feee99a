//! Column scaling: z-score standardization and median/IQR robust scaling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalerKind {
    Zscore,
    Robust,
}

impl std::fmt::Display for ScalerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScalerKind::Zscore => "zscore",
            ScalerKind::Robust => "robust",
        })
    }
}

impl std::str::FromStr for ScalerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zscore" => Ok(ScalerKind::Zscore),
            "robust" => Ok(ScalerKind::Robust),
            other => Err(Error::config("scaler", format!("unknown scaler '{other}'"))),
        }
    }
}

/// Fitted per-column center and spread.
///
/// Columns whose spread came out as zero are listed in `constant_columns` and
/// carry a spread of 1, so they transform to all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerModel {
    pub kind: ScalerKind,
    pub columns: Vec<String>,
    pub center: Vec<f64>,
    pub spread: Vec<f64>,
    pub constant_columns: Vec<String>,
}

impl ScalerModel {
    pub fn fit(kind: ScalerKind, m: &FeatureMatrix) -> Result<Self> {
        match kind {
            ScalerKind::Zscore => fit_zscore(m),
            ScalerKind::Robust => fit_robust(m),
        }
    }

    pub fn transform(&self, m: &FeatureMatrix) -> Result<FeatureMatrix> {
        transform(self, m)
    }
}

fn check_fit_input(m: &FeatureMatrix) -> Result<()> {
    if m.nrows() < 2 {
        return Err(Error::InvalidArgument(format!(
            "scaling needs at least 2 rows, got {}",
            m.nrows()
        )));
    }
    if m.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("scaler input"));
    }
    Ok(())
}

fn build(
    kind: ScalerKind,
    m: &FeatureMatrix,
    stats: impl Fn(&[f64]) -> (f64, f64, bool),
) -> ScalerModel {
    let d = m.ncols();
    let mut center = Vec::with_capacity(d);
    let mut spread = Vec::with_capacity(d);
    let mut constant_columns = Vec::new();
    for j in 0..d {
        let col = m.column(j);
        let (c, s, constant) = stats(&col);
        center.push(c);
        if constant {
            log::warn!(
                "column '{}' has zero spread; it will scale to zeros",
                m.columns()[j]
            );
            constant_columns.push(m.columns()[j].clone());
            spread.push(1.0);
        } else {
            spread.push(s);
        }
    }
    ScalerModel {
        kind,
        columns: m.columns().to_vec(),
        center,
        spread,
        constant_columns,
    }
}

/// Mean and population (divisor n) standard deviation per column.
pub fn fit_zscore(m: &FeatureMatrix) -> Result<ScalerModel> {
    check_fit_input(m)?;
    Ok(build(ScalerKind::Zscore, m, |col| {
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let constant = col.iter().all(|&x| x == col[0]) || var == 0.0;
        (mean, var.sqrt(), constant)
    }))
}

/// Median and interquartile range per column.
pub fn fit_robust(m: &FeatureMatrix) -> Result<ScalerModel> {
    check_fit_input(m)?;
    Ok(build(ScalerKind::Robust, m, |col| {
        let mut sorted = col.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = quantile_sorted(&sorted, 0.5);
        let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
        (median, iqr, iqr == 0.0)
    }))
}

/// Quantile of an ascending slice by linear interpolation at rank `q(n-1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// `(x - center) / spread`, column by column.
pub fn transform(model: &ScalerModel, m: &FeatureMatrix) -> Result<FeatureMatrix> {
    if m.columns() != model.columns.as_slice() {
        return Err(Error::Structure(format!(
            "scaler was fitted on {} columns {:?}.., got {} columns",
            model.columns.len(),
            model.columns.first(),
            m.ncols()
        )));
    }
    let d = m.ncols();
    let values = m
        .values()
        .iter()
        .enumerate()
        .map(|(idx, &x)| {
            let j = idx % d;
            (x - model.center[j]) / model.spread[j]
        })
        .collect::<Vec<_>>();
    // constant columns whose center is inexact (e.g. 0.1 * 3 / 3) must still map to zero
    let mut out = values;
    for name in &model.constant_columns {
        let j = model
            .columns
            .iter()
            .position(|c| c == name)
            .expect("fitted column");
        for row in out.chunks_exact_mut(d) {
            row[j] = 0.0;
        }
    }
    FeatureMatrix::new(m.row_ids().to_vec(), m.columns().to_vec(), out)
}
