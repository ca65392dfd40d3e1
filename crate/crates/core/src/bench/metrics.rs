use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::ebm::{predict, AdditiveModel};
use crate::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    /// Tally hard predictions (`p >= threshold` is positive) against labels.
    pub fn from_probabilities(proba: &[f64], labels: &[u8], threshold: f64) -> Self {
        let mut c = ConfusionCounts::default();
        for (&p, &y) in proba.iter().zip(labels) {
            match (p >= threshold, y == 1) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// F1 of the positive class, `2TP / (2TP + FP + FN)`; 0 when undefined.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            (self.tp + self.tn) as f64 / self.total() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub f1: f64,
    pub accuracy: f64,
    /// Wall time of the final model fit only.
    pub fit_seconds: f64,
    pub n_features: usize,
    pub confusion: ConfusionCounts,
    pub threshold: f64,
}

impl EvalResult {
    pub fn from_counts(
        confusion: ConfusionCounts,
        n_features: usize,
        fit_seconds: f64,
        threshold: f64,
    ) -> Self {
        if 2 * confusion.tp + confusion.fp + confusion.fn_ == 0 {
            log::warn!("no positives predicted or present; F1 set to 0");
        }
        EvalResult {
            f1: confusion.f1(),
            accuracy: confusion.accuracy(),
            fit_seconds,
            n_features,
            confusion,
            threshold,
        }
    }
}

/// Score `model` on `test` at the default 0.5 threshold.
pub fn evaluate(model: &AdditiveModel, test: &Dataset, fit_seconds: f64) -> Result<EvalResult> {
    evaluate_at(model, test, fit_seconds, DEFAULT_THRESHOLD)
}

pub fn evaluate_at(
    model: &AdditiveModel,
    test: &Dataset,
    fit_seconds: f64,
    threshold: f64,
) -> Result<EvalResult> {
    if test.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    let proba = predict(model, test)?;
    let counts = ConfusionCounts::from_probabilities(&proba, test.target(), threshold);
    Ok(EvalResult::from_counts(
        counts,
        model.schema.n_features(),
        fit_seconds,
        threshold,
    ))
}
