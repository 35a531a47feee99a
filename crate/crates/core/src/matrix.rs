//! Dense real-valued respondents × features matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major `n × d` matrix with named rows and columns.
///
/// Every stage after scoring (scaling, projection, clustering) consumes and
/// produces this type, so row ids survive all the way to the assignment CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    row_ids: Vec<String>,
    columns: Vec<String>,
    values: Vec<f64>,
}

impl FeatureMatrix {
    /// Builds a matrix from row-major values. All values must be finite.
    pub fn new(row_ids: Vec<String>, columns: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != row_ids.len() * columns.len() {
            return Err(Error::Structure(format!(
                "{} values do not fill a {}x{} matrix",
                values.len(),
                row_ids.len(),
                columns.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix"));
        }
        Ok(Self {
            row_ids,
            columns,
            values,
        })
    }

    /// Builds a matrix from rows with generated ids (`r0`, `r1`, ...) and
    /// column names (`x0`, `x1`, ...).
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::Structure(format!(
                    "row {i} has {} entries, expected {d}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        let row_ids = (0..rows.len()).map(|i| format!("r{i}")).collect();
        let columns = (0..d).map(|j| format!("x{j}")).collect();
        Self::new(row_ids, columns, values)
    }

    pub fn nrows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.ncols();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        // chunks_exact(0) panics; a zero-width matrix still has n empty rows
        let d = self.ncols().max(1);
        let n = self.nrows();
        (0..n).map(move |i| {
            if self.columns.is_empty() {
                &self.values[0..0]
            } else {
                &self.values[i * d..(i + 1) * d]
            }
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ncols() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Returns a copy with rows reordered so that output row `i` is input row
    /// `order[i]`.
    pub fn select_rows(&self, order: &[usize]) -> Self {
        let mut values = Vec::with_capacity(order.len() * self.ncols());
        for &i in order {
            values.extend_from_slice(self.row(i));
        }
        Self {
            row_ids: order.iter().map(|&i| self.row_ids[i].clone()).collect(),
            columns: self.columns.clone(),
            values,
        }
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_rows() {
        let err = FeatureMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert!(matches!(err, Error::Structure(_)));
    }

    #[test]
    fn rejects_nan() {
        assert!(FeatureMatrix::from_rows(&[[1.0, f64::NAN]]).is_err());
    }

    #[test]
    fn select_rows_reorders_ids_and_values() {
        let m = FeatureMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let p = m.select_rows(&[2, 0, 1]);
        assert_eq!(p.row_ids(), ["r2", "r0", "r1"]);
        assert_eq!(p.row(0), [5.0, 6.0]);
        assert_eq!(p.column(1), vec![6.0, 2.0, 4.0]);
    }
}
