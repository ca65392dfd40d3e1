use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::grow::{grow_tree, Criterion, GrowConfig, RowStats};
use super::{EnsembleMode, Tree, TreeEnsemble, TreeParams};
use crate::data::BinnedDataset;
use crate::{logistic, Error, Result};

/// SAMME stump weight for a two-class problem: `ln((1 - ε) / ε)`.
pub fn samme_alpha(weighted_error: f64) -> f64 {
    let e = weighted_error.clamp(1e-10, 1.0 - 1e-10);
    ((1.0 - e) / e).ln()
}

pub fn fit_ensemble(
    data: &BinnedDataset,
    mode: EnsembleMode,
    params: &TreeParams,
) -> Result<TreeEnsemble> {
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if params.max_depth == 0 && mode != EnsembleMode::Adaboost {
        return Err(Error::invalid("max_depth must be at least 1"));
    }
    if !(params.subsample > 0.0 && params.subsample <= 1.0) {
        return Err(Error::invalid("subsample must lie in (0, 1]"));
    }
    if params.learning_rate.is_nan() || params.learning_rate <= 0.0 {
        return Err(Error::invalid("learning_rate must be positive"));
    }
    Ok(match mode {
        EnsembleMode::RandomForest => fit_forest(data, params),
        EnsembleMode::GradientBoosted => fit_boosted(data, params),
        EnsembleMode::Adaboost => fit_adaboost(data, params),
    })
}

fn tree_seed(seed: u64, t: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(t as u64 + 1)
}

fn fit_forest(data: &BinnedDataset, params: &TreeParams) -> TreeEnsemble {
    let n = data.n_rows();
    let m = data.n_features();
    let max_features = params
        .max_features
        .unwrap_or_else(|| ((m as f64).sqrt().round() as usize).max(1));
    let cfg = GrowConfig {
        criterion: Criterion::Gini,
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        max_features,
    };
    let y: Vec<f64> = data.target().iter().map(|&t| t as f64).collect();
    let trees: Vec<Tree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(params.seed, t));
            let mut counts = vec![0.0f64; n];
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1.0;
            }
            let rows: Vec<usize> = (0..n).filter(|&i| counts[i] > 0.0).collect();
            let stats = RowStats {
                a: counts.iter().zip(&y).map(|(w, y)| w * y).collect(),
                b: counts.clone(),
                c: counts,
            };
            grow_tree(data, rows, &stats, &cfg, &mut rng)
        })
        .collect();
    TreeEnsemble {
        mode: EnsembleMode::RandomForest,
        tree_weights: vec![1.0; trees.len()],
        trees,
        base_score: 0.0,
        feature_names: data.feature_names(),
    }
}

fn fit_boosted(data: &BinnedDataset, params: &TreeParams) -> TreeEnsemble {
    let n = data.n_rows();
    let y = data.target();
    let rate =
        (data.target().iter().map(|&t| t as f64).sum::<f64>() / n as f64).clamp(1e-6, 1.0 - 1e-6);
    let base_score = (rate / (1.0 - rate)).ln();
    let cfg = GrowConfig {
        criterion: Criterion::Newton {
            lambda: params.lambda,
            min_child_weight: params.min_child_weight,
        },
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        max_features: params.max_features.unwrap_or(data.n_features()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut raw = vec![base_score; n];
    let mut trees = Vec::with_capacity(params.n_trees);
    let sample_size = ((params.subsample * n as f64).round() as usize).clamp(1, n);
    for _ in 0..params.n_trees {
        let mut stats = RowStats {
            a: vec![0.0; n],
            b: vec![0.0; n],
            c: vec![1.0; n],
        };
        for i in 0..n {
            let p = logistic(raw[i]);
            stats.a[i] = p - y[i] as f64;
            stats.b[i] = p * (1.0 - p);
        }
        let rows: Vec<usize> = if sample_size < n {
            let mut r = sample(&mut rng, n, sample_size).into_vec();
            r.sort_unstable();
            r
        } else {
            (0..n).collect()
        };
        let tree = grow_tree(data, rows, &stats, &cfg, &mut rng);
        for (i, r) in raw.iter_mut().enumerate() {
            *r += params.learning_rate * tree.predict(|f| data.bins(f)[i]);
        }
        trees.push(tree);
    }
    TreeEnsemble {
        mode: EnsembleMode::GradientBoosted,
        tree_weights: vec![params.learning_rate; trees.len()],
        trees,
        base_score,
        feature_names: data.feature_names(),
    }
}

/// SAMME with depth-1 stumps; stops as soon as a stump is no better than chance.
fn fit_adaboost(data: &BinnedDataset, params: &TreeParams) -> TreeEnsemble {
    let n = data.n_rows();
    let y = data.target();
    let cfg = GrowConfig {
        criterion: Criterion::Gini,
        max_depth: 1,
        min_samples_leaf: params.min_samples_leaf,
        max_features: params.max_features.unwrap_or(data.n_features()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut w = vec![1.0 / n as f64; n];
    let mut trees = Vec::new();
    let mut alphas = Vec::new();
    for _ in 0..params.n_trees {
        let stats = RowStats {
            a: w.iter().zip(y).map(|(w, &y)| w * y as f64).collect(),
            b: w.clone(),
            c: vec![1.0; n],
        };
        let mut stump = grow_tree(data, (0..n).collect(), &stats, &cfg, &mut rng);
        for node in &mut stump.nodes {
            node.leaf_value = if node.leaf_value >= 0.5 { 1.0 } else { -1.0 };
        }
        let miss: Vec<bool> = (0..n)
            .map(|i| {
                let h = stump.predict(|f| data.bins(f)[i]);
                (h > 0.0) != (y[i] == 1)
            })
            .collect();
        let total: f64 = w.iter().sum();
        let err: f64 = w
            .iter()
            .zip(&miss)
            .filter(|(_, &m)| m)
            .map(|(w, _)| w)
            .sum::<f64>()
            / total;
        if err >= 0.5 {
            break;
        }
        let alpha = samme_alpha(err);
        trees.push(stump);
        alphas.push(alpha);
        if err <= 1e-10 {
            break;
        }
        let scale = alpha.exp();
        for (wi, &m) in w.iter_mut().zip(&miss) {
            if m {
                *wi *= scale;
            }
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|wi| *wi /= total);
    }
    TreeEnsemble {
        mode: EnsembleMode::Adaboost,
        trees,
        tree_weights: alphas,
        base_score: 0.0,
        feature_names: data.feature_names(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{bin, Dataset};

    fn threshold_data(n: usize) -> BinnedDataset {
        // x decides the label, z is a deterministic scramble of the row index
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let z: Vec<f64> = (0..n).map(|i| ((i * 7919) % n) as f64).collect();
        let y: Vec<u8> = (0..n).map(|i| u8::from(i >= n / 2)).collect();
        bin(
            &Dataset::from_numeric(vec!["x".into(), "z".into()], vec![x, z], y).unwrap(),
            64,
        )
        .unwrap()
    }

    #[test]
    fn samme_alpha_at_chance_is_zero() {
        assert_eq!(samme_alpha(0.5), 0.0);
        assert!(samme_alpha(0.1) > 0.0);
        assert!(samme_alpha(0.6) < 0.0);
    }

    #[test]
    fn empty_ensemble_predicts_base_score() {
        let data = threshold_data(50);
        for mode in [
            EnsembleMode::RandomForest,
            EnsembleMode::GradientBoosted,
            EnsembleMode::Adaboost,
        ] {
            let ens = fit_ensemble(&data, mode, &TreeParams::for_mode(mode).with_trees(0)).unwrap();
            assert!(ens.trees.is_empty());
            for r in ens.predict_raw(&data) {
                assert_eq!(r, ens.base_score);
            }
        }
    }

    #[test]
    fn covers_add_up_and_gains_nonnegative() {
        let data = threshold_data(200);
        for mode in [
            EnsembleMode::RandomForest,
            EnsembleMode::GradientBoosted,
            EnsembleMode::Adaboost,
        ] {
            let ens =
                fit_ensemble(&data, mode, &TreeParams::for_mode(mode).with_trees(10)).unwrap();
            for tree in &ens.trees {
                for node in &tree.nodes {
                    if let (Some(l), Some(r)) = (node.left, node.right) {
                        assert_eq!(node.cover, tree.nodes[l].cover + tree.nodes[r].cover);
                        assert!(node.gain >= 0.0);
                    } else {
                        assert!(node.left.is_none() && node.right.is_none());
                    }
                }
                if mode == EnsembleMode::Adaboost {
                    assert!(tree.depth() <= 1);
                }
            }
        }
    }

    #[test]
    fn every_mode_learns_a_threshold() {
        let data = threshold_data(200);
        for mode in [
            EnsembleMode::RandomForest,
            EnsembleMode::GradientBoosted,
            EnsembleMode::Adaboost,
        ] {
            let ens =
                fit_ensemble(&data, mode, &TreeParams::for_mode(mode).with_trees(20)).unwrap();
            let labels = ens.predict_labels(&data);
            let correct = labels
                .iter()
                .zip(data.target())
                .filter(|(a, b)| a == b)
                .count();
            assert!(correct >= 198, "{mode:?}: {correct}");
        }
    }

    #[test]
    fn adaboost_stops_on_perfect_stump() {
        let data = threshold_data(100);
        let ens = fit_ensemble(&data, EnsembleMode::Adaboost, &TreeParams::adaboost()).unwrap();
        assert_eq!(ens.trees.len(), 1);
        assert_eq!(ens.trees[0].nodes[0].split_feature, Some(0));
    }

    #[test]
    fn ensemble_json_round_trip() {
        let data = threshold_data(60);
        let ens = fit_ensemble(
            &data,
            EnsembleMode::GradientBoosted,
            &TreeParams::gradient_boosted().with_trees(3),
        )
        .unwrap();
        let back = TreeEnsemble::from_json(&ens.to_json().unwrap()).unwrap();
        assert_eq!(back, ens);
    }
}
