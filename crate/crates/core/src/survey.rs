//! Survey ingestion: CSV parsing, scale definitions and subscale scoring.
//!
//! A survey file has one id column and one column per Likert item. Scale
//! definitions refer to items by 0-based index into the item columns (the
//! header order with the id column removed). Every item column must belong to
//! exactly one scale, which is where its admissible range comes from.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

const DEFAULT_HEXAD: &str = include_str!("../scales/hexad.json");
const DEFAULT_GRSLSS: &str = include_str!("../scales/grslss.json");

/// One named subscale and the item columns that are summed into it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subscale {
    pub name: String,
    pub items: Vec<usize>,
}

/// A Likert instrument: its point range and how items map onto subscales.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleDefinition {
    pub name: String,
    pub point_range: (i64, i64),
    pub subscales: Vec<Subscale>,
    #[serde(default)]
    pub reverse_items: Vec<usize>,
}

impl ScaleDefinition {
    pub fn from_json(text: &str) -> Result<Self> {
        let scale: Self = serde_json::from_str(text).map_err(|e| Error::Json {
            path: "<scale definition>".into(),
            source: e,
        })?;
        scale.check()?;
        Ok(scale)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let scale: Self = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.into(),
            source: e,
        })?;
        scale.check()?;
        Ok(scale)
    }

    /// Placeholder Hexad layout: six user types of four consecutive 7-point
    /// items, occupying item columns 0..24.
    pub fn default_hexad() -> Self {
        Self::from_json(DEFAULT_HEXAD).expect("bundled hexad.json is valid")
    }

    /// Placeholder GRSLSS layout: six learning styles of ten consecutive
    /// 5-point items, occupying item columns 24..84.
    pub fn default_grslss() -> Self {
        Self::from_json(DEFAULT_GRSLSS).expect("bundled grslss.json is valid")
    }

    /// All item indices of this scale, in subscale order.
    pub fn items(&self) -> impl Iterator<Item = usize> + '_ {
        self.subscales.iter().flat_map(|s| s.items.iter().copied())
    }

    pub fn item_count(&self) -> usize {
        self.subscales.iter().map(|s| s.items.len()).sum()
    }

    /// Checks the invariants that do not depend on the matrix width.
    pub fn check(&self) -> Result<()> {
        let (lo, hi) = self.point_range;
        if lo >= hi {
            return Err(Error::Structure(format!(
                "scale '{}': point_range [{lo}, {hi}] is empty or degenerate",
                self.name
            )));
        }
        if self.subscales.is_empty() {
            return Err(Error::Structure(format!(
                "scale '{}' has no subscales",
                self.name
            )));
        }
        let mut names = HashSet::new();
        let mut seen = HashSet::new();
        for sub in &self.subscales {
            if !names.insert(sub.name.as_str()) {
                return Err(Error::Structure(format!(
                    "scale '{}': duplicate subscale name '{}'",
                    self.name, sub.name
                )));
            }
            if sub.items.is_empty() {
                return Err(Error::Structure(format!(
                    "scale '{}': subscale '{}' has no items",
                    self.name, sub.name
                )));
            }
            for &item in &sub.items {
                if !seen.insert(item) {
                    return Err(Error::Structure(format!(
                        "scale '{}': item {item} is assigned to more than one subscale",
                        self.name
                    )));
                }
            }
        }
        if let Some(r) = self.reverse_items.iter().find(|r| !seen.contains(r)) {
            return Err(Error::Structure(format!(
                "scale '{}': reverse item {r} is not an item of this scale",
                self.name
            )));
        }
        Ok(())
    }
}

/// The bundled placeholder scales in score-column order (GRSLSS, then Hexad).
pub fn default_scales() -> Vec<ScaleDefinition> {
    vec![
        ScaleDefinition::default_grslss(),
        ScaleDefinition::default_hexad(),
    ]
}

/// Validates a set of scales against a matrix with `width` item columns and
/// returns each item's admissible range.
fn item_ranges(scales: &[ScaleDefinition], width: usize) -> Result<Vec<Option<(i64, i64)>>> {
    let mut ranges = vec![None; width];
    for scale in scales {
        scale.check()?;
        for item in scale.items() {
            let slot = ranges.get_mut(item).ok_or_else(|| {
                Error::MissingColumn(format!(
                    "item index {item} of scale '{}' (only {width} item columns)",
                    scale.name
                ))
            })?;
            if slot.is_some() {
                return Err(Error::Structure(format!(
                    "item {item} is claimed by more than one scale"
                )));
            }
            *slot = Some(scale.point_range);
        }
    }
    Ok(ranges)
}

/// Integer survey responses, respondents × items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LikertMatrix {
    respondent_ids: Vec<String>,
    item_names: Vec<String>,
    values: Vec<i64>,
    item_ranges: Vec<(i64, i64)>,
}

impl LikertMatrix {
    /// Builds a matrix from row-major responses, checking every invariant.
    pub fn new(
        respondent_ids: Vec<String>,
        item_names: Vec<String>,
        values: Vec<i64>,
        item_ranges: Vec<(i64, i64)>,
    ) -> Result<Self> {
        let (n, p) = (respondent_ids.len(), item_names.len());
        if n == 0 || p == 0 {
            return Err(Error::Structure(format!(
                "survey matrix must be non-empty (got {n} respondents, {p} items)"
            )));
        }
        if values.len() != n * p || item_ranges.len() != p {
            return Err(Error::Structure("survey matrix dimensions disagree".into()));
        }
        let mut ids = HashSet::new();
        for id in &respondent_ids {
            if !ids.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        for (i, row) in values.chunks_exact(p).enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let (lo, hi) = item_ranges[j];
                if v < lo || v > hi {
                    return Err(Error::Cell {
                        row: respondent_ids[i].clone(),
                        column: item_names[j].clone(),
                        value: v.to_string(),
                        reason: format!("outside the admissible range [{lo}, {hi}]"),
                    });
                }
            }
        }
        Ok(Self {
            respondent_ids,
            item_names,
            values,
            item_ranges,
        })
    }

    pub fn nrows(&self) -> usize {
        self.respondent_ids.len()
    }

    pub fn ncols(&self) -> usize {
        self.item_names.len()
    }

    pub fn respondent_ids(&self) -> &[String] {
        &self.respondent_ids
    }

    pub fn item_names(&self) -> &[String] {
        &self.item_names
    }

    pub fn item_ranges(&self) -> &[(i64, i64)] {
        &self.item_ranges
    }

    pub fn row(&self, i: usize) -> &[i64] {
        let p = self.ncols();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.values[i * self.ncols() + j]
    }

    /// The raw answers as a real-valued feature matrix.
    pub fn to_features(&self) -> FeatureMatrix {
        FeatureMatrix::new(
            self.respondent_ids.clone(),
            self.item_names.clone(),
            self.values.iter().map(|&v| v as f64).collect(),
        )
        .expect("integer answers are finite")
    }

    /// Returns a copy with rows reordered so that output row `i` is input row
    /// `order[i]`.
    pub fn select_rows(&self, order: &[usize]) -> Self {
        let mut values = Vec::with_capacity(order.len() * self.ncols());
        for &i in order {
            values.extend_from_slice(self.row(i));
        }
        Self {
            respondent_ids: order
                .iter()
                .map(|&i| self.respondent_ids[i].clone())
                .collect(),
            item_names: self.item_names.clone(),
            values,
            item_ranges: self.item_ranges.clone(),
        }
    }
}

/// Reads a survey CSV from disk. See [`parse_reader`].
pub fn parse_csv(
    path: impl AsRef<Path>,
    id_column: &str,
    scales: &[ScaleDefinition],
) -> Result<LikertMatrix> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_reader(file, id_column, scales).map_err(|e| match e {
        Error::Csv { source, .. } => Error::Csv {
            path: path.into(),
            source,
        },
        other => other,
    })
}

/// Parses survey responses. Rows keep file order; every non-id column is an
/// item column and must be claimed by one of `scales`.
pub fn parse_reader<R: Read>(
    reader: R,
    id_column: &str,
    scales: &[ScaleDefinition],
) -> Result<LikertMatrix> {
    let csv_err = |source| Error::Csv {
        path: "<input>".into(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let id_idx = header
        .iter()
        .position(|h| h == id_column)
        .ok_or_else(|| Error::MissingColumn(id_column.to_string()))?;
    let item_cols: Vec<usize> = (0..header.len()).filter(|&c| c != id_idx).collect();
    let item_names: Vec<String> = item_cols.iter().map(|&c| header[c].to_string()).collect();

    let ranges = item_ranges(scales, item_names.len())?;
    if let Some(j) = ranges.iter().position(Option::is_none) {
        return Err(Error::Structure(format!(
            "column '{}' is not assigned to any scale",
            item_names[j]
        )));
    }
    let ranges: Vec<(i64, i64)> = ranges.into_iter().flatten().collect();

    let mut ids = Vec::new();
    let mut seen = HashSet::new();
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let id = record[id_idx].to_string();
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        for (j, &c) in item_cols.iter().enumerate() {
            let raw = &record[c];
            let cell_err = |reason: String| Error::Cell {
                row: id.clone(),
                column: item_names[j].clone(),
                value: raw.to_string(),
                reason,
            };
            if raw.is_empty() {
                return Err(cell_err("missing value".into()));
            }
            let v: i64 = raw.parse().map_err(|_| cell_err("not an integer".into()))?;
            let (lo, hi) = ranges[j];
            if v < lo || v > hi {
                return Err(cell_err(format!(
                    "outside the admissible range [{lo}, {hi}]"
                )));
            }
            values.push(v);
        }
        ids.push(id);
    }
    LikertMatrix::new(ids, item_names, values, ranges)
}

/// Per-respondent subscale scores, all scales concatenated in scale order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    respondent_ids: Vec<String>,
    columns: Vec<String>,
    /// Name of the scale each column belongs to.
    column_scales: Vec<String>,
    values: Vec<f64>,
}

impl ScoreMatrix {
    /// Builds a score matrix directly, e.g. from externally computed scores.
    pub fn new(
        respondent_ids: Vec<String>,
        columns: Vec<String>,
        column_scales: Vec<String>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if columns.len() != column_scales.len()
            || values.len() != respondent_ids.len() * columns.len()
        {
            return Err(Error::Structure("score matrix dimensions disagree".into()));
        }
        Ok(Self {
            respondent_ids,
            columns,
            column_scales,
            values,
        })
    }

    pub fn nrows(&self) -> usize {
        self.respondent_ids.len()
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn respondent_ids(&self) -> &[String] {
        &self.respondent_ids
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn column_scales(&self) -> &[String] {
        &self.column_scales
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let s = self.ncols();
        &self.values[i * s..(i + 1) * s]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ncols() + j]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_features(&self) -> FeatureMatrix {
        FeatureMatrix::new(
            self.respondent_ids.clone(),
            self.columns.clone(),
            self.values.clone(),
        )
        .expect("scores are finite")
    }

    /// Writes `respondent_id,<subscale>...` CSV.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["respondent_id".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (i, id) in self.respondent_ids.iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sums each respondent's (reverse-corrected) answers per subscale.
///
/// Reverse-keyed items are mapped `v -> lo + hi - v` before summing.
pub fn score(matrix: &LikertMatrix, scales: &[ScaleDefinition]) -> Result<ScoreMatrix> {
    let width = matrix.ncols();
    item_ranges(scales, width)?;

    let mut columns = Vec::new();
    let mut column_scales = Vec::new();
    // (items, reversed flags, lo + hi) per output column
    let mut plan: Vec<(Vec<usize>, Vec<bool>, i64)> = Vec::new();
    for scale in scales {
        let reversed: HashSet<usize> = scale.reverse_items.iter().copied().collect();
        let (lo, hi) = scale.point_range;
        for sub in &scale.subscales {
            columns.push(sub.name.clone());
            column_scales.push(scale.name.clone());
            let flags = sub.items.iter().map(|i| reversed.contains(i)).collect();
            plan.push((sub.items.clone(), flags, lo + hi));
        }
    }
    let mut dup = HashSet::new();
    for c in &columns {
        if !dup.insert(c.as_str()) {
            return Err(Error::Structure(format!(
                "subscale name '{c}' appears in more than one scale"
            )));
        }
    }

    let mut values = Vec::with_capacity(matrix.nrows() * columns.len());
    for i in 0..matrix.nrows() {
        let row = matrix.row(i);
        for (items, flags, mirror) in &plan {
            let total: i64 = items
                .iter()
                .zip(flags)
                .map(|(&j, &rev)| if rev { mirror - row[j] } else { row[j] })
                .sum();
            values.push(total as f64);
        }
    }
    ScoreMatrix::new(
        matrix.respondent_ids().to_vec(),
        columns,
        column_scales,
        values,
    )
}
