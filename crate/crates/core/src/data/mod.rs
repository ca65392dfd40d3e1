//! Tabular data: CSV ingestion, preprocessing, stratified splitting and
//! quantile binning.

mod binning;
mod csv_io;
mod preprocess;
mod split;
pub mod synth;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use binning::{bin, BinSchema, BinnedDataset, FeatureBins, DEFAULT_MAX_BINS, UNKNOWN_BIN};
pub use csv_io::{load_csv, write_csv};
pub use preprocess::{
    preprocess, preprocess_with, CategoryLevel, PreprocessOptions, PreprocessReport, ScalingParam,
    IMPUTED_VALUE,
};
pub use split::{split, split_preprocessed, stratified_indices, Partition, SplitPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// Raw column storage. Numeric missing cells are `NaN`, text missing cells `None`.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Text(Vec<Option<String>>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn take(&self, rows: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(rows.iter().map(|&r| v[r]).collect()),
            Column::Text(v) => Column::Text(rows.iter().map(|&r| v[r].clone()).collect()),
        }
    }
}

/// Location/scale used to z-score a numeric column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub mean: f64,
    pub stddev: f64,
}

/// Column-major binary-classification table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    feature_kinds: Vec<FeatureKind>,
    columns: Vec<Column>,
    target: Vec<u8>,
    target_name: String,
    /// Original spelling of the labels mapped to 0 and 1.
    target_labels: [String; 2],
    /// Per-feature z-score parameters, present once the table went through `preprocess`.
    scales: Option<Vec<Option<Scale>>>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        feature_kinds: Vec<FeatureKind>,
        columns: Vec<Column>,
        target: Vec<u8>,
    ) -> Result<Self> {
        let ds = Dataset {
            feature_names,
            feature_kinds,
            columns,
            target,
            target_name: "target".to_string(),
            target_labels: ["0".to_string(), "1".to_string()],
            scales: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// All-numeric table, the common case for synthetic data and tests.
    pub fn from_numeric(
        feature_names: Vec<String>,
        columns: Vec<Vec<f64>>,
        target: Vec<u8>,
    ) -> Result<Self> {
        let kinds = vec![FeatureKind::Numeric; columns.len()];
        Dataset::new(
            feature_names,
            kinds,
            columns.into_iter().map(Column::Numeric).collect(),
            target,
        )
    }

    pub fn with_target_name(mut self, name: impl Into<String>, labels: [String; 2]) -> Self {
        self.target_name = name.into();
        self.target_labels = labels;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.target.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if self.feature_names.len() != self.columns.len()
            || self.feature_kinds.len() != self.columns.len()
        {
            return Err(Error::invalid(
                "feature names, kinds and columns differ in length",
            ));
        }
        let n = self.target.len();
        for (name, col) in self.feature_names.iter().zip(&self.columns) {
            if col.len() != n {
                return Err(Error::invalid(format!(
                    "column {name:?} has {} rows, target has {n}",
                    col.len()
                )));
            }
        }
        let mut seen = HashSet::new();
        for name in &self.feature_names {
            if name.is_empty() {
                return Err(Error::invalid("empty feature name"));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::invalid(format!("duplicate feature name {name:?}")));
            }
        }
        if let Some(&bad) = self.target.iter().find(|&&t| t > 1) {
            return Err(Error::invalid(format!("target value {bad} is not 0/1")));
        }
        let positives = self.target.iter().filter(|&&t| t == 1).count();
        if positives == 0 || positives == n {
            return Err(Error::SingleClassTarget);
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_kinds(&self) -> &[FeatureKind] {
        &self.feature_kinds
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn column(&self, feature: usize) -> &Column {
        &self.columns[feature]
    }

    /// Numeric view of a column; text columns must be encoded by `preprocess` first.
    pub fn numeric(&self, feature: usize) -> Result<&[f64]> {
        match &self.columns[feature] {
            Column::Numeric(v) => Ok(v),
            Column::Text(_) => Err(Error::invalid(format!(
                "feature {:?} is not encoded; run preprocess first",
                self.feature_names[feature]
            ))),
        }
    }

    pub fn target(&self) -> &[u8] {
        &self.target
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn target_labels(&self) -> &[String; 2] {
        &self.target_labels
    }

    pub fn positives(&self) -> usize {
        self.target.iter().filter(|&&t| t == 1).count()
    }

    pub fn is_preprocessed(&self) -> bool {
        self.scales.is_some()
    }

    /// z-score parameters applied to `feature`, if it was scaled.
    pub fn scale(&self, feature: usize) -> Option<Scale> {
        self.scales.as_ref().and_then(|s| s[feature])
    }

    /// Values before z-scoring (imputation is kept).
    pub fn unscaled(&self, feature: usize) -> Result<Vec<f64>> {
        let values = self.numeric(feature)?;
        Ok(match self.scale(feature) {
            Some(s) => values.iter().map(|v| v * s.stddev + s.mean).collect(),
            None => values.to_vec(),
        })
    }

    /// Restrict to the given features, in the given order.
    pub fn select_features(&self, features: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = features.iter().find(|&&f| f >= self.n_features()) {
            return Err(Error::invalid(format!("feature id {bad} out of range")));
        }
        Ok(Dataset {
            feature_names: features
                .iter()
                .map(|&f| self.feature_names[f].clone())
                .collect(),
            feature_kinds: features.iter().map(|&f| self.feature_kinds[f]).collect(),
            columns: features.iter().map(|&f| self.columns[f].clone()).collect(),
            target: self.target.clone(),
            target_name: self.target_name.clone(),
            target_labels: self.target_labels.clone(),
            scales: self
                .scales
                .as_ref()
                .map(|s| features.iter().map(|&f| s[f]).collect()),
        })
    }

    /// Restrict to the given rows; both classes must remain.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_rows()) {
            return Err(Error::invalid(format!("row {bad} out of range")));
        }
        let ds = self.take_rows(rows);
        ds.validate()?;
        Ok(ds)
    }

    pub(crate) fn take_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            feature_kinds: self.feature_kinds.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            target: rows.iter().map(|&r| self.target[r]).collect(),
            target_name: self.target_name.clone(),
            target_labels: self.target_labels.clone(),
            scales: self.scales.clone(),
        }
    }

    /// Apply `f` to one numeric column.
    pub fn map_numeric(&self, feature: usize, f: impl Fn(f64) -> f64) -> Result<Dataset> {
        let mut out = self.clone();
        let values = self.numeric(feature)?.iter().map(|&v| f(v)).collect();
        out.columns[feature] = Column::Numeric(values);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_single_class_and_duplicates() {
        let err = Dataset::from_numeric(vec!["a".into()], vec![vec![1.0, 2.0]], vec![1, 1]);
        assert!(matches!(err, Err(Error::SingleClassTarget)));
        let err = Dataset::from_numeric(
            vec!["a".into(), "a".into()],
            vec![vec![1.0, 2.0], vec![1.0, 2.0]],
            vec![0, 1],
        );
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
        let err = Dataset::from_numeric(vec!["a".into()], vec![vec![1.0]], vec![0, 1]);
        assert!(err.is_err());
    }

    #[test]
    fn select_features_keeps_order() {
        let ds = Dataset::from_numeric(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            vec![0, 1],
        )
        .unwrap();
        let sub = ds.select_features(&[2, 0]).unwrap();
        assert_eq!(sub.feature_names(), &["c".to_string(), "a".to_string()]);
        assert_eq!(sub.numeric(0).unwrap(), &[5.0, 6.0]);
    }
}
