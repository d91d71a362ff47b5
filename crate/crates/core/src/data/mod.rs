//! Datasets, stratified train/test splitting and client partitioning.

mod partition;
mod split;

pub use partition::{
    max_classes_per_client, partition_alpha_chunking, partition_iid, PartitionMode, PartitionPlan,
    ShardReport,
};
pub use split::{stratified_split, TrainTestSplit};

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl std::fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "#{i}"),
            LabelColumn::Name(n) => write!(f, "{n:?}"),
        }
    }
}

/// Dense feature matrix with integer class labels in `0..class_count`.
///
/// Every class in range appears at least once and all feature values are
/// finite. Rows are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    feature_count: usize,
    class_count: usize,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Build a dataset from per-row feature vectors and labels. The class
    /// count is `max(label) + 1`; every class below it must be present.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        let feature_count = rows.first().map_or(0, Vec::len);
        let mut features = Vec::with_capacity(rows.len() * feature_count);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != feature_count {
                return Err(Error::InvalidDataset(format!(
                    "row {r} has {} features, expected {feature_count}",
                    row.len()
                )));
            }
            features.extend_from_slice(row);
        }
        let class_count = labels.iter().max().map_or(0, |m| m + 1);
        let feature_names = (0..feature_count).map(|i| format!("f{i}")).collect();
        let class_names = (0..class_count).map(|c| c.to_string()).collect();
        Self::new(features, labels, feature_count, feature_names, class_names)
    }

    fn new(
        features: Vec<f64>,
        labels: Vec<usize>,
        feature_count: usize,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidDataset("dataset has no rows".into()));
        }
        if feature_count == 0 {
            return Err(Error::InvalidDataset(
                "dataset has no feature columns".into(),
            ));
        }
        if features.len() != labels.len() * feature_count {
            return Err(Error::InvalidDataset(format!(
                "{} feature values for {} rows of {feature_count} features",
                features.len(),
                labels.len()
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / feature_count,
                column: feature_names[pos % feature_count].clone(),
            });
        }
        let class_count = class_names.len();
        let mut seen = vec![false; class_count];
        for &l in &labels {
            if l >= class_count {
                return Err(Error::InvalidDataset(format!(
                    "label {l} outside 0..{class_count}"
                )));
            }
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidDataset(format!(
                "class {missing} has no rows"
            )));
        }
        Ok(Self {
            features,
            labels,
            feature_count,
            class_count,
            feature_names,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_count..(i + 1) * self.feature_count]
    }

    #[inline]
    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.features[row * self.feature_count + feature]
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Original label strings, indexed by class id.
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Per-class row counts over `rows`.
    pub fn class_histogram(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &r in rows {
            counts[self.labels[r]] += 1;
        }
        counts
    }

    /// Rows of each class among `rows`, preserving the order of `rows`.
    pub fn rows_by_class(&self, rows: &[usize]) -> Vec<Vec<usize>> {
        let mut by_class = vec![Vec::new(); self.class_count];
        for &r in rows {
            by_class[self.labels[r]].push(r);
        }
        by_class
    }

    /// Write the dataset as CSV with a header row and the label in a final
    /// `label` column holding the original class names.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push("label");
        writer.write_record(&header)?;
        for i in 0..self.len() {
            let mut record: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            record.push(self.class_names[self.labels[i]].clone());
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Load a headed CSV file. Labels are relabeled to `0..c` in order of first
/// appearance; every other column must parse as a finite number.
pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let label_idx = match label_column {
        LabelColumn::Index(i) if *i < headers.len() => *i,
        LabelColumn::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?,
        _ => return Err(Error::MissingLabelColumn(label_column.to_string())),
    };
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut class_ids: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();

    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (col, field) in record.iter().enumerate() {
            if col == label_idx {
                let next = class_ids.len();
                let id = *class_ids.entry(field.to_owned()).or_insert_with(|| {
                    class_names.push(field.to_owned());
                    next
                });
                labels.push(id);
                continue;
            }
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                column: headers[col].clone(),
                message: format!("cannot parse {field:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    row,
                    column: headers[col].clone(),
                });
            }
            features.push(value);
        }
    }
    if class_names.len() < 2 {
        return Err(Error::TooFewClasses(class_names.len()));
    }
    let feature_count = feature_names.len();
    Dataset::new(features, labels, feature_count, feature_names, class_names)
}
