use super::{Selection, Selector, SelectorConfig};
use crate::data::{bin, stratified_indices, BinnedDataset, Dataset};
use crate::ebm::{fit_ebm, term_importance, Term};
use crate::trees::{
    fit_ensemble, impurity_importance, permutation_importance, rank_scores, tree_shap,
    EnsembleMode, ImportanceKind, TreeEnsemble,
};
use crate::Result;

fn fit(train: &BinnedDataset, mode: EnsembleMode, config: &SelectorConfig) -> Result<TreeEnsemble> {
    let params = match mode {
        EnsembleMode::RandomForest => &config.random_forest,
        EnsembleMode::GradientBoosted => &config.gradient_boosted,
        EnsembleMode::Adaboost => &config.adaboost,
    };
    fit_ensemble(train, mode, &params.clone().with_seed(config.seed))
}

fn normalized(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.iter().map(|v| v / total).collect()
    } else {
        raw.to_vec()
    }
}

/// Mean |SHAP| of a gradient-boosted ensemble.
pub struct ShapSelector;

impl Selector for ShapSelector {
    fn name(&self) -> &str {
        "shap"
    }

    fn select(&self, train: &Dataset, config: &SelectorConfig) -> Result<Selection> {
        let data = bin(train, config.max_bins)?;
        let ens = fit(&data, EnsembleMode::GradientBoosted, config)?;
        let raw: Vec<f64> = tree_shap(&ens, &data)
            .scores
            .iter()
            .map(|s| s.score)
            .collect();
        let scores = rank_scores(&normalized(&raw));
        Ok(Selection::with_cutoff(scores, config.importance_cutoff))
    }
}

/// SAMME stumps, gain weighted by each stump's `α`.
pub struct AdaBoostSelector;

impl Selector for AdaBoostSelector {
    fn name(&self) -> &str {
        "adaboost"
    }

    fn select(&self, train: &Dataset, config: &SelectorConfig) -> Result<Selection> {
        let data = bin(train, config.max_bins)?;
        let ens = fit(&data, EnsembleMode::Adaboost, config)?;
        let scores = impurity_importance(&ens, ImportanceKind::Gain);
        Ok(Selection::with_cutoff(scores, config.importance_cutoff))
    }
}

/// Total split gain of gradient-boosted trees.
pub struct XgboostSelector;

impl Selector for XgboostSelector {
    fn name(&self) -> &str {
        "xgboost"
    }

    fn select(&self, train: &Dataset, config: &SelectorConfig) -> Result<Selection> {
        let data = bin(train, config.max_bins)?;
        let ens = fit(&data, EnsembleMode::GradientBoosted, config)?;
        let scores = impurity_importance(&ens, ImportanceKind::Gain);
        Ok(Selection::with_cutoff(scores, config.importance_cutoff))
    }
}

/// Mean decrease in Gini impurity of a random forest.
pub struct RandomForestSelector;

impl Selector for RandomForestSelector {
    fn name(&self) -> &str {
        "random_forest"
    }

    fn select(&self, train: &Dataset, config: &SelectorConfig) -> Result<Selection> {
        let data = bin(train, config.max_bins)?;
        let ens = fit(&data, EnsembleMode::RandomForest, config)?;
        let scores = impurity_importance(&ens, ImportanceKind::Mdi);
        Ok(Selection::with_cutoff(scores, config.importance_cutoff))
    }
}

/// Accuracy drop of a random forest when a feature is shuffled on held-out rows.
pub struct PermutationSelector;

impl Selector for PermutationSelector {
    fn name(&self) -> &str {
        "permutation"
    }

    fn select(&self, train: &Dataset, config: &SelectorConfig) -> Result<Selection> {
        let data = bin(train, config.max_bins)?;
        let part =
            stratified_indices(data.target(), 1.0 - config.permutation_holdout, config.seed)?;
        let fit_rows = data.take_rows(&part.train);
        let held_out = data.take_rows(&part.test);
        let ens = fit(&fit_rows, EnsembleMode::RandomForest, config)?;
        let scores =
            permutation_importance(&ens, &held_out, config.permutation_repeats, config.seed)?;
        Ok(Selection::with_cutoff(scores, config.importance_cutoff))
    }
}

/// Main-term importances of a full EBM; keeps the `ebm_top_n` strongest features.
pub struct EbmSelector;

impl Selector for EbmSelector {
    fn name(&self) -> &str {
        "ebm"
    }

    fn select(&self, train: &Dataset, config: &SelectorConfig) -> Result<Selection> {
        let data = bin(train, config.ebm.max_bins)?;
        let params = crate::ebm::EbmParams {
            seed: config.seed,
            ..config.ebm.clone()
        };
        let model = fit_ebm(&data, &params)?;
        let mut raw = vec![0.0; train.n_features()];
        for t in term_importance(&model, &data) {
            if let Term::Main(f) = t.term {
                raw[f] = t.importance;
            }
        }
        let scores = rank_scores(&normalized(&raw));
        let keep: Vec<usize> = scores
            .iter()
            .filter(|s| s.rank <= config.ebm_top_n)
            .map(|s| s.feature)
            .collect();
        Ok(Selection::ordered(scores, keep))
    }
}

/// Keeps every feature; scores are uniform.
pub struct AllFeaturesSelector;

impl Selector for AllFeaturesSelector {
    fn name(&self) -> &str {
        "all"
    }

    fn select(&self, train: &Dataset, _config: &SelectorConfig) -> Result<Selection> {
        let m = train.n_features();
        let scores = rank_scores(&vec![1.0 / m as f64; m]);
        Ok(Selection::ordered(scores, (0..m).collect()))
    }
}
