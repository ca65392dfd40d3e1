use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::importance::{normalize, rank_scores};
use super::{FeatureScore, TreeEnsemble};
use crate::data::BinnedDataset;
use crate::{Error, Result};

fn error_rate(ens: &TreeEnsemble, data: &BinnedDataset) -> f64 {
    let labels = ens.predict_labels(data);
    let wrong = labels
        .iter()
        .zip(data.target())
        .filter(|(a, b)| a != b)
        .count();
    wrong as f64 / data.n_rows() as f64
}

/// Mean increase of `1 - accuracy` when one feature's column is shuffled, clipped at
/// zero and normalised to sum to one.
pub fn permutation_importance(
    ens: &TreeEnsemble,
    validation: &BinnedDataset,
    repeats: usize,
    seed: u64,
) -> Result<Vec<FeatureScore>> {
    if repeats == 0 {
        return Err(Error::invalid("repeats must be at least 1"));
    }
    if validation.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let baseline = error_rate(ens, validation);
    let mut scores: Vec<f64> = (0..validation.n_features())
        .into_par_iter()
        .map(|f| {
            if !ens.uses_feature(f) {
                return 0.0;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (f as u64).wrapping_mul(0x2545_F491));
            let mut column = validation.bins(f).to_vec();
            let mut total = 0.0;
            for _ in 0..repeats {
                column.shuffle(&mut rng);
                let permuted = validation.with_column(f, column.clone());
                total += error_rate(ens, &permuted) - baseline;
            }
            (total / repeats as f64).max(0.0)
        })
        .collect();
    normalize(&mut scores);
    Ok(rank_scores(&scores))
}
