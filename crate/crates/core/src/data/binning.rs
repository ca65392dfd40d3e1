use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureKind};
use crate::{Error, Result};

pub const DEFAULT_MAX_BINS: usize = 256;

/// Bin index for values that cannot be placed: unseen categorical codes and `NaN`.
pub const UNKNOWN_BIN: u16 = u16::MAX;

/// Binning rule of one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBins {
    pub name: String,
    pub kind: FeatureKind,
    /// Strictly increasing cut points; a value falls into bin `#{edges < value}`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<f64>,
    /// Categorical codes observed at fit time, one bin each, in bin order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<i64>,
    pub n_bins: usize,
}

impl FeatureBins {
    fn fit_numeric(name: &str, values: &[f64], max_bins: usize) -> Self {
        let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
        sorted.sort_by(f64::total_cmp);
        let edges = quantile_edges(&sorted, max_bins);
        FeatureBins {
            name: name.to_string(),
            kind: FeatureKind::Numeric,
            n_bins: edges.len() + 1,
            edges,
            levels: Vec::new(),
        }
    }

    fn fit_categorical(name: &str, values: &[f64]) -> Self {
        let mut levels: Vec<i64> = values
            .iter()
            .filter(|v| !v.is_nan())
            .map(|&v| v as i64)
            .collect();
        levels.sort_unstable();
        levels.dedup();
        FeatureBins {
            name: name.to_string(),
            kind: FeatureKind::Categorical,
            n_bins: levels.len().max(1),
            edges: Vec::new(),
            levels,
        }
    }

    pub fn bin_of(&self, value: f64) -> u16 {
        if value.is_nan() {
            return UNKNOWN_BIN;
        }
        match self.kind {
            FeatureKind::Numeric => self.edges.partition_point(|&e| e < value) as u16,
            FeatureKind::Categorical => {
                let code = value as i64;
                self.levels
                    .binary_search(&code)
                    .or_else(|_| self.levels.binary_search(&-1))
                    .map_or(UNKNOWN_BIN, |b| b as u16)
            }
        }
    }
}

/// Cut points at empirical quantiles of `sorted`; equal values always share a bin.
fn quantile_edges(sorted: &[f64], max_bins: usize) -> Vec<f64> {
    let n = sorted.len();
    if n == 0 {
        return Vec::new();
    }
    let mut distinct: Vec<(f64, usize)> = Vec::new(); // (value, end index exclusive)
    for (i, &v) in sorted.iter().enumerate() {
        match distinct.last_mut() {
            Some(last) if last.0 == v => last.1 = i + 1,
            _ => distinct.push((v, i + 1)),
        }
    }
    let cut_after = |k: usize| -> f64 { midpoint(distinct[k].0, distinct[k + 1].0) };
    let mut edges = Vec::new();
    if distinct.len() <= max_bins {
        for k in 0..distinct.len() - 1 {
            edges.push(cut_after(k));
        }
        return edges;
    }
    let mut k = 0;
    for b in 1..max_bins {
        let q = b * n / max_bins;
        if q == 0 {
            continue;
        }
        // first run of equal values that reaches position q
        while k < distinct.len() && distinct[k].1 < q {
            k += 1;
        }
        if k + 1 >= distinct.len() {
            break;
        }
        let e = cut_after(k);
        if edges.last() != Some(&e) {
            edges.push(e);
        }
    }
    edges
}

/// A cut strictly separating `lo < hi` (so `lo` bins low and `hi` bins high).
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m > lo && m < hi {
        m
    } else {
        lo
    }
}

/// Binning rules for every feature of a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSchema {
    pub features: Vec<FeatureBins>,
    pub max_bins: usize,
}

impl BinSchema {
    pub fn fit(ds: &Dataset, max_bins: usize) -> Result<Self> {
        if !(2..=u16::MAX as usize).contains(&max_bins) {
            return Err(Error::invalid(format!(
                "max_bins {max_bins} outside [2, 65535]"
            )));
        }
        let features = (0..ds.n_features())
            .into_par_iter()
            .map(|j| {
                let values = ds.numeric(j)?;
                let name = &ds.feature_names()[j];
                Ok(match ds.feature_kinds()[j] {
                    FeatureKind::Numeric => FeatureBins::fit_numeric(name, values, max_bins),
                    FeatureKind::Categorical => FeatureBins::fit_categorical(name, values),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BinSchema { features, max_bins })
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }

    /// Bin a table whose columns are found by name.
    pub fn transform(&self, ds: &Dataset) -> Result<BinnedDataset> {
        let bins = self
            .features
            .par_iter()
            .map(|fb| {
                let j = ds.feature_index(&fb.name).ok_or_else(|| {
                    Error::FeatureMismatch(format!("column {:?} not in dataset", fb.name))
                })?;
                Ok(ds.numeric(j)?.iter().map(|&v| fb.bin_of(v)).collect())
            })
            .collect::<Result<Vec<Vec<u16>>>>()?;
        Ok(BinnedDataset {
            schema: self.clone(),
            bins,
            target: ds.target().to_vec(),
        })
    }
}

/// Quantile-binned view of a [`Dataset`] consumed by every tree learner.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDataset {
    schema: BinSchema,
    bins: Vec<Vec<u16>>,
    target: Vec<u8>,
}

/// Fit a binning on `ds` and apply it.
pub fn bin(ds: &Dataset, max_bins: usize) -> Result<BinnedDataset> {
    BinSchema::fit(ds, max_bins)?.transform(ds)
}

impl BinnedDataset {
    pub fn from_parts(schema: BinSchema, bins: Vec<Vec<u16>>, target: Vec<u8>) -> Result<Self> {
        if schema.n_features() != bins.len() {
            return Err(Error::invalid("schema and bin columns differ in length"));
        }
        for (fb, col) in schema.features.iter().zip(&bins) {
            if col.len() != target.len() {
                return Err(Error::invalid(format!(
                    "column {:?} has wrong length",
                    fb.name
                )));
            }
            if col
                .iter()
                .any(|&b| b != UNKNOWN_BIN && b as usize >= fb.n_bins)
            {
                return Err(Error::invalid(format!("bin out of range in {:?}", fb.name)));
            }
        }
        Ok(BinnedDataset {
            schema,
            bins,
            target,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.bins.len()
    }

    pub fn schema(&self) -> &BinSchema {
        &self.schema
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.schema.names().map(str::to_string).collect()
    }

    pub fn bins(&self, feature: usize) -> &[u16] {
        &self.bins[feature]
    }

    pub fn n_bins(&self, feature: usize) -> usize {
        self.schema.features[feature].n_bins
    }

    pub fn bin_edges(&self, feature: usize) -> &[f64] {
        &self.schema.features[feature].edges
    }

    pub fn target(&self) -> &[u8] {
        &self.target
    }

    /// Bin indices of one row across all features.
    pub fn row(&self, row: usize) -> Vec<u16> {
        self.bins.iter().map(|c| c[row]).collect()
    }

    pub fn take_rows(&self, rows: &[usize]) -> BinnedDataset {
        BinnedDataset {
            schema: self.schema.clone(),
            bins: self
                .bins
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
            target: rows.iter().map(|&r| self.target[r]).collect(),
        }
    }

    pub fn select_features(&self, features: &[usize]) -> BinnedDataset {
        BinnedDataset {
            schema: BinSchema {
                features: features
                    .iter()
                    .map(|&f| self.schema.features[f].clone())
                    .collect(),
                max_bins: self.schema.max_bins,
            },
            bins: features.iter().map(|&f| self.bins[f].clone()).collect(),
            target: self.target.clone(),
        }
    }

    /// Replace one feature's bin column (same binning rule).
    pub fn with_column(&self, feature: usize, column: Vec<u16>) -> BinnedDataset {
        assert_eq!(column.len(), self.n_rows());
        let mut out = self.clone();
        out.bins[feature] = column;
        out
    }

    /// Append extra columns that reuse existing binning rules under new names.
    pub fn with_appended(&self, columns: Vec<(FeatureBins, Vec<u16>)>) -> BinnedDataset {
        let mut out = self.clone();
        for (fb, col) in columns {
            assert_eq!(col.len(), self.n_rows());
            out.schema.features.push(fb);
            out.bins.push(col);
        }
        out
    }
}
