use serde::{Deserialize, Serialize};

use super::{EnsembleMode, FeatureScore, TreeEnsemble};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceKind {
    /// Cover-weighted impurity decrease.
    Mdi,
    /// Total split gain, scaled by `α_t` for boosted stumps.
    Gain,
}

/// Attach 1-based ranks (descending score, ties by ascending feature id).
/// The output stays in feature order.
pub fn rank_scores(scores: &[f64]) -> Vec<FeatureScore> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut out: Vec<FeatureScore> = scores
        .iter()
        .enumerate()
        .map(|(feature, &score)| FeatureScore {
            feature,
            score,
            rank: 0,
        })
        .collect();
    for (rank, &f) in order.iter().enumerate() {
        out[f].rank = rank + 1;
    }
    out
}

pub(crate) fn normalize(scores: &mut [f64]) {
    let total: f64 = scores.iter().sum();
    if total > 0.0 {
        scores.iter_mut().for_each(|s| *s /= total);
    }
}

/// Split-based importance summed over every tree and normalised to sum to one.
/// An ensemble without splits scores every feature 0.
pub fn impurity_importance(ens: &TreeEnsemble, kind: ImportanceKind) -> Vec<FeatureScore> {
    let mut scores = vec![0.0; ens.n_features()];
    for (tree, &w) in ens.trees.iter().zip(&ens.tree_weights) {
        let scale = match (kind, ens.mode) {
            (ImportanceKind::Gain, EnsembleMode::Adaboost) => w.max(0.0),
            _ => 1.0,
        };
        for node in &tree.nodes {
            if let Some(f) = node.split_feature {
                scores[f] += scale * node.gain;
            }
        }
    }
    normalize(&mut scores);
    rank_scores(&scores)
}
