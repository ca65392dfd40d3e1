//! First-stage feature selectors behind one interface.
//!
//! Every selector scores all input features and returns a subset. Selectors are
//! looked up by name in a [`SelectorRegistry`]; [`run_selector`] uses the default
//! registry.

mod boruta;
mod filter;
mod model;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, DEFAULT_MAX_BINS};
use crate::ebm::EbmParams;
use crate::trees::{FeatureScore, TreeParams};
use crate::{Error, Result};

pub use boruta::{binomial_two_sided_p, BorutaSelector};
pub use filter::{
    correlation_matrix, pearson, vif_values, CorrelationSelector, VarianceSelector, VifSelector,
};
pub use model::{
    AdaBoostSelector, AllFeaturesSelector, EbmSelector, PermutationSelector, RandomForestSelector,
    ShapSelector, XgboostSelector,
};

/// The nine cross-feature selectors, in reporting order.
pub const CROSS_SELECTORS: [&str; 9] = [
    "shap",
    "adaboost",
    "xgboost",
    "random_forest",
    "correlation",
    "vif",
    "variance_threshold",
    "permutation",
    "boruta",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BorutaConfig {
    pub max_iterations: usize,
    pub p_value: f64,
    /// Trees in each iteration's forest.
    pub n_trees: usize,
}

impl Default for BorutaConfig {
    fn default() -> Self {
        BorutaConfig {
            max_iterations: 100,
            p_value: 0.05,
            n_trees: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectorConfig {
    /// Minimum sum-normalised score kept by the model-based selectors.
    pub importance_cutoff: f64,
    /// Feature pairs above this absolute correlation are pruned to one member.
    pub correlation_cutoff: f64,
    pub vif_threshold: f64,
    /// Applied to unscaled values.
    pub variance_threshold: f64,
    pub boruta: BorutaConfig,
    pub permutation_repeats: usize,
    /// Stratified share of the training rows held out for permutation scoring.
    pub permutation_holdout: f64,
    /// Features kept by the `ebm` selector.
    pub ebm_top_n: usize,
    pub max_bins: usize,
    pub random_forest: TreeParams,
    pub gradient_boosted: TreeParams,
    pub adaboost: TreeParams,
    pub ebm: EbmParams,
    /// Seeds every learner; the `seed` fields of the nested parameter sets are ignored.
    pub seed: u64,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        SelectorConfig {
            importance_cutoff: 0.02,
            correlation_cutoff: 0.7,
            vif_threshold: 10.0,
            variance_threshold: 0.0,
            boruta: BorutaConfig::default(),
            permutation_repeats: 5,
            permutation_holdout: 0.25,
            ebm_top_n: 20,
            max_bins: DEFAULT_MAX_BINS,
            random_forest: TreeParams::random_forest(),
            gradient_boosted: TreeParams::gradient_boosted(),
            adaboost: TreeParams::adaboost(),
            ebm: EbmParams::default(),
            seed: 0,
        }
    }
}

impl SelectorConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let thresholds = [
            ("importance_cutoff", self.importance_cutoff),
            ("correlation_cutoff", self.correlation_cutoff),
            ("vif_threshold", self.vif_threshold),
            ("variance_threshold", self.variance_threshold),
        ];
        for (name, v) in thresholds {
            if v.is_nan() || v < 0.0 {
                return Err(Error::invalid(format!("{name} must be non-negative")));
            }
        }
        if !(self.boruta.p_value > 0.0 && self.boruta.p_value < 1.0) {
            return Err(Error::invalid("boruta.p_value must lie in (0, 1)"));
        }
        if self.permutation_repeats == 0 {
            return Err(Error::invalid("permutation_repeats must be at least 1"));
        }
        if !(self.permutation_holdout > 0.0 && self.permutation_holdout < 1.0) {
            return Err(Error::invalid("permutation_holdout must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Scores for every input feature plus the chosen subset.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub scores: Vec<FeatureScore>,
    /// Sorted by descending score, then ascending id.
    pub selected: Vec<usize>,
}

impl Selection {
    /// Keep features whose score reaches `cutoff`.
    pub fn with_cutoff(scores: Vec<FeatureScore>, cutoff: f64) -> Self {
        let keep: Vec<usize> = scores
            .iter()
            .filter(|s| s.score >= cutoff)
            .map(|s| s.feature)
            .collect();
        Selection::ordered(scores, keep)
    }

    /// Order an arbitrary subset by the ranks in `scores`.
    pub fn ordered(scores: Vec<FeatureScore>, mut selected: Vec<usize>) -> Self {
        selected.sort_by_key(|&f| scores[f].rank);
        Selection { scores, selected }
    }
}

/// A feature selection strategy.
pub trait Selector: Send + Sync {
    fn name(&self) -> &str;

    fn select(&self, train: &Dataset, config: &SelectorConfig) -> Result<Selection>;
}

/// A selector's result with the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorOutput {
    pub selector: String,
    pub feature_names: Vec<String>,
    pub scores: Vec<FeatureScore>,
    pub selected: Vec<usize>,
    pub params: SelectorConfig,
    pub fit_seconds: f64,
}

impl SelectorOutput {
    pub fn selected_names(&self) -> Vec<String> {
        self.selected
            .iter()
            .map(|&f| self.feature_names[f].clone())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Named selectors available at runtime.
pub struct SelectorRegistry {
    entries: Vec<Box<dyn Selector>>,
}

impl Default for SelectorRegistry {
    fn default() -> Self {
        let mut r = SelectorRegistry::empty();
        r.register(Box::new(ShapSelector));
        r.register(Box::new(AdaBoostSelector));
        r.register(Box::new(XgboostSelector));
        r.register(Box::new(RandomForestSelector));
        r.register(Box::new(CorrelationSelector));
        r.register(Box::new(VifSelector));
        r.register(Box::new(VarianceSelector));
        r.register(Box::new(PermutationSelector));
        r.register(Box::new(BorutaSelector));
        r.register(Box::new(EbmSelector));
        r.register(Box::new(AllFeaturesSelector));
        r
    }
}

impl SelectorRegistry {
    pub fn empty() -> Self {
        SelectorRegistry {
            entries: Vec::new(),
        }
    }

    /// Add a selector, replacing any existing one with the same name.
    pub fn register(&mut self, selector: Box<dyn Selector>) {
        self.entries.retain(|s| s.name() != selector.name());
        self.entries.push(selector);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Selector> {
        self.entries
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|s| s.name()).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|s| s.name() == name)
    }

    pub fn run(
        &self,
        name: &str,
        train: &Dataset,
        config: &SelectorConfig,
    ) -> Result<SelectorOutput> {
        let selector = self
            .get(name)
            .ok_or_else(|| Error::UnknownSelector(name.to_string()))?;
        config.validate()?;
        let start = Instant::now();
        let selection = selector.select(train, config)?;
        let fit_seconds = start.elapsed().as_secs_f64();
        if selection.selected.is_empty() {
            log::warn!("selector {name} kept no features");
        }
        Ok(SelectorOutput {
            selector: name.to_string(),
            feature_names: train.feature_names().to_vec(),
            scores: selection.scores,
            selected: selection.selected,
            params: config.clone(),
            fit_seconds,
        })
    }
}

/// Run a selector from the default registry.
pub fn run_selector(
    name: &str,
    train: &Dataset,
    config: &SelectorConfig,
) -> Result<SelectorOutput> {
    SelectorRegistry::default().run(name, train, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::rank_scores;

    #[test]
    fn cutoff_excludes_low_scores() {
        let s = Selection::with_cutoff(rank_scores(&[0.5, 0.3, 0.019, 0.181]), 0.02);
        assert_eq!(s.selected, vec![0, 1, 3]);
    }

    #[test]
    fn registry_knows_all_nine() {
        let r = SelectorRegistry::default();
        for name in CROSS_SELECTORS {
            assert!(r.get(name).is_some(), "{name}");
        }
        assert!(r.get("ebm").is_some());
    }

    #[test]
    fn unknown_name_is_an_error() {
        let ds = Dataset::from_numeric(vec!["a".into()], vec![vec![0.0, 1.0]], vec![0, 1]).unwrap();
        let err = run_selector("lasso", &ds, &SelectorConfig::default()).unwrap_err();
        assert!(matches!(err, Error::UnknownSelector(_)));
    }

    #[test]
    fn config_json_rejects_unknown_keys() {
        assert!(serde_json::from_str::<SelectorConfig>("{\"cutof\": 1}").is_err());
        let c: SelectorConfig = serde_json::from_str("{\"vif_threshold\": 5}").unwrap();
        assert_eq!(c.vif_threshold, 5.0);
        assert_eq!(c.importance_cutoff, 0.02);
    }
}
