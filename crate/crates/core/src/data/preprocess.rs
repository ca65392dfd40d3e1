use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Column, Dataset, FeatureKind, Scale};
use crate::{Error, Result};

/// Value written into missing numeric cells before scaling.
pub const IMPUTED_VALUE: f64 = -9999.0;

const MISSING_LEVEL: &str = "<missing>";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    /// Expand categoricals into 0/1 indicator columns instead of ordinal codes.
    pub one_hot: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryLevel {
    /// `None` is the missing-value level.
    pub level: Option<String>,
    pub code: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalingParam {
    Scaled {
        mean: f64,
        stddev: f64,
    },
    /// Zero-variance (or entirely missing) numeric column.
    Unscaled,
    Categorical,
}

/// Everything learned from the training table, serialisable so that the test table
/// can be transformed identically in a later run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub feature_names: Vec<String>,
    pub imputed_cells_per_feature: Vec<usize>,
    pub category_maps: Vec<Option<Vec<CategoryLevel>>>,
    pub scaling_params: Vec<ScalingParam>,
    #[serde(default)]
    pub one_hot: bool,
}

impl PreprocessReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn code_of(&self, feature: usize, level: &Option<String>) -> i64 {
        self.category_maps[feature]
            .as_ref()
            .and_then(|m| m.iter().find(|l| &l.level == level))
            .map_or(-1, |l| l.code)
    }
}

/// Impute, encode and scale with ordinal categorical codes.
pub fn preprocess(
    ds: &Dataset,
    fit_report: Option<&PreprocessReport>,
) -> Result<(Dataset, PreprocessReport)> {
    preprocess_with(ds, fit_report, PreprocessOptions::default())
}

/// Like [`preprocess`]. With a `fit_report` the stored maps and scaling parameters are
/// applied as-is (and `options` is ignored in favour of the report's own encoding).
pub fn preprocess_with(
    ds: &Dataset,
    fit_report: Option<&PreprocessReport>,
    options: PreprocessOptions,
) -> Result<(Dataset, PreprocessReport)> {
    if ds.n_features() == 0 {
        return Err(Error::EmptyDataset);
    }
    if ds.is_preprocessed() {
        return match fit_report {
            Some(r) => Ok((ds.clone(), r.clone())),
            None => Err(Error::invalid("dataset is already preprocessed")),
        };
    }
    let report = match fit_report {
        Some(r) => {
            if r.feature_names != ds.feature_names() {
                return Err(Error::FeatureMismatch(format!(
                    "report expects {:?}, dataset has {:?}",
                    r.feature_names,
                    ds.feature_names()
                )));
            }
            let mut r = r.clone();
            r.imputed_cells_per_feature = count_missing(ds);
            r
        }
        None => fit_report_for(ds, options),
    };
    Ok((apply(ds, &report), report))
}

fn levels_of(ds: &Dataset, feature: usize) -> Vec<Option<String>> {
    match ds.column(feature) {
        Column::Text(v) => v.clone(),
        Column::Numeric(v) => v
            .iter()
            .map(|x| (!x.is_nan()).then(|| format!("{x}")))
            .collect(),
    }
}

fn count_missing(ds: &Dataset) -> Vec<usize> {
    (0..ds.n_features())
        .map(|j| match (ds.feature_kinds()[j], ds.column(j)) {
            (FeatureKind::Numeric, Column::Numeric(v)) => v.iter().filter(|x| x.is_nan()).count(),
            _ => 0,
        })
        .collect()
}

fn fit_report_for(ds: &Dataset, options: PreprocessOptions) -> PreprocessReport {
    let mut category_maps = Vec::with_capacity(ds.n_features());
    let mut scaling_params = Vec::with_capacity(ds.n_features());
    for j in 0..ds.n_features() {
        let categorical = ds.feature_kinds()[j] == FeatureKind::Categorical
            || matches!(ds.column(j), Column::Text(_));
        if categorical {
            let mut counts: HashMap<Option<String>, usize> = HashMap::new();
            for level in levels_of(ds, j) {
                *counts.entry(level).or_default() += 1;
            }
            let mut ordered: Vec<(Option<String>, usize)> = counts.into_iter().collect();
            ordered.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            category_maps.push(Some(
                ordered
                    .into_iter()
                    .enumerate()
                    .map(|(code, (level, _))| CategoryLevel {
                        level,
                        code: code as i64,
                    })
                    .collect(),
            ));
            scaling_params.push(ScalingParam::Categorical);
        } else {
            category_maps.push(None);
            let values = match ds.column(j) {
                Column::Numeric(v) => v,
                Column::Text(_) => unreachable!("text columns are categorical"),
            };
            scaling_params.push(fit_scale(values));
        }
    }
    PreprocessReport {
        feature_names: ds.feature_names().to_vec(),
        imputed_cells_per_feature: count_missing(ds),
        category_maps,
        scaling_params,
        one_hot: options.one_hot,
    }
}

fn fit_scale(values: &[f64]) -> ScalingParam {
    let present: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    if present.is_empty() {
        return ScalingParam::Unscaled;
    }
    let n = present.len() as f64;
    let mean = present.iter().sum::<f64>() / n;
    let var = present.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let stddev = var.sqrt();
    if stddev <= 1e-12 * mean.abs().max(1.0) {
        ScalingParam::Unscaled
    } else {
        ScalingParam::Scaled { mean, stddev }
    }
}

fn apply(ds: &Dataset, report: &PreprocessReport) -> Dataset {
    let mut names = Vec::new();
    let mut kinds = Vec::new();
    let mut columns = Vec::new();
    let mut scales = Vec::new();
    for j in 0..ds.n_features() {
        match report.scaling_params[j] {
            ScalingParam::Categorical => {
                let codes: Vec<i64> = levels_of(ds, j)
                    .iter()
                    .map(|l| report.code_of(j, l))
                    .collect();
                if report.one_hot {
                    let map = report.category_maps[j].as_deref().unwrap_or_default();
                    for level in map {
                        let label = level.level.as_deref().unwrap_or(MISSING_LEVEL);
                        names.push(format!("{}={}", ds.feature_names()[j], label));
                        kinds.push(FeatureKind::Numeric);
                        columns.push(Column::Numeric(
                            codes
                                .iter()
                                .map(|&c| if c == level.code { 1.0 } else { 0.0 })
                                .collect(),
                        ));
                        scales.push(None);
                    }
                } else {
                    names.push(ds.feature_names()[j].clone());
                    kinds.push(FeatureKind::Categorical);
                    columns.push(Column::Numeric(codes.iter().map(|&c| c as f64).collect()));
                    scales.push(None);
                }
            }
            param => {
                let raw = match ds.column(j) {
                    Column::Numeric(v) => v.clone(),
                    // a text column cannot reach here when the report came from a
                    // compatible table; treat unparsable cells as missing
                    Column::Text(v) => v
                        .iter()
                        .map(|c| {
                            c.as_deref()
                                .and_then(|s| s.parse().ok())
                                .unwrap_or(f64::NAN)
                        })
                        .collect(),
                };
                let imputed = raw
                    .into_iter()
                    .map(|v| if v.is_nan() { IMPUTED_VALUE } else { v });
                let (values, scale): (Vec<f64>, _) = match param {
                    ScalingParam::Scaled { mean, stddev } => (
                        imputed.map(|v| (v - mean) / stddev).collect(),
                        Some(Scale { mean, stddev }),
                    ),
                    _ => (imputed.collect(), None),
                };
                names.push(ds.feature_names()[j].clone());
                kinds.push(FeatureKind::Numeric);
                columns.push(Column::Numeric(values));
                scales.push(scale);
            }
        }
    }
    let mut out = Dataset::new(names, kinds, columns, ds.target().to_vec())
        .expect("preprocessing preserves dataset invariants")
        .with_target_name(ds.target_name(), ds.target_labels().clone());
    out.scales = Some(scales);
    out
}
