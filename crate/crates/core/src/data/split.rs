use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
    pub ratio: f64,
    pub partition: Partition,
}

/// Row indices (into the source table) of each side of a split, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Class-stratified partition of `labels`: each class contributes
/// `round(ratio * class_count)` rows to the first side.
pub fn stratified_indices(labels: &[u8], ratio: f64, seed: u64) -> Result<Partition> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid(format!(
            "split ratio {ratio} outside (0, 1)"
        )));
    }
    if labels.len() < 2 {
        return Err(Error::invalid("need at least two rows to split"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [0u8, 1] {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if rows.is_empty() {
            continue;
        }
        rows.shuffle(&mut rng);
        let n_train = (ratio * rows.len() as f64).round() as usize;
        if n_train == 0 || n_train == rows.len() {
            return Err(Error::EmptyClassAfterSplit(class));
        }
        train.extend_from_slice(&rows[..n_train]);
        test.extend_from_slice(&rows[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Partition { train, test })
}

/// Deterministic stratified train/test split.
pub fn split(ds: &Dataset, ratio: f64, seed: u64) -> Result<SplitPair> {
    let partition = stratified_indices(ds.target(), ratio, seed)?;
    Ok(SplitPair {
        train: ds.take_rows(&partition.train),
        test: ds.take_rows(&partition.test),
        seed,
        ratio,
        partition,
    })
}

/// Split, then fit preprocessing on the training rows and apply it unchanged
/// to the test rows. Returns `(train, test)`.
pub fn split_preprocessed(ds: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let parts = split(ds, ratio, seed)?;
    let (train, report) = super::preprocess(&parts.train, None)?;
    let (test, _) = super::preprocess(&parts.test, Some(&report))?;
    Ok((train, test))
}
