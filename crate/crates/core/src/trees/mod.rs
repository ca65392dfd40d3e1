//! Tree ensembles over binned data and the importance engines built on them.

mod fit;
mod grow;
mod importance;
mod permutation;
mod shap;

use serde::{Deserialize, Serialize};

use crate::data::{BinnedDataset, UNKNOWN_BIN};
use crate::Result;

pub use fit::{fit_ensemble, samme_alpha};
pub use importance::{impurity_importance, rank_scores, ImportanceKind};
pub use permutation::permutation_importance;
pub use shap::{tree_shap, ShapValues};

/// One node of a flattened binary tree. Rows go left when their bin is at most
/// `split_bin`; unknown bins go right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub split_feature: Option<usize>,
    #[serde(default)]
    pub split_bin: u16,
    pub left: Option<usize>,
    pub right: Option<usize>,
    /// Prediction if the node were a leaf; the output for leaves.
    pub leaf_value: f64,
    /// Training rows (with bootstrap multiplicity) reaching the node.
    pub cover: f64,
    pub gain: f64,
}

impl TreeNode {
    pub fn leaf(value: f64, cover: f64) -> Self {
        TreeNode {
            split_feature: None,
            split_bin: 0,
            left: None,
            right: None,
            leaf_value: value,
            cover,
            gain: 0.0,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.split_feature.is_none()
    }

    pub(crate) fn goes_left(&self, bin: u16) -> bool {
        bin != UNKNOWN_BIN && bin <= self.split_bin
    }
}

/// Tree stored as a node vector with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, bin_of: impl Fn(usize) -> u16) -> f64 {
        let mut id = 0;
        loop {
            let node = &self.nodes[id];
            match node.split_feature {
                None => return node.leaf_value,
                Some(f) => {
                    id = if node.goes_left(bin_of(f)) {
                        node.left.expect("internal node has a left child")
                    } else {
                        node.right.expect("internal node has a right child")
                    }
                }
            }
        }
    }

    /// Cover-weighted mean leaf value.
    pub fn expected_value(&self) -> f64 {
        let root = self.nodes[0].cover;
        if root <= 0.0 {
            return self.nodes[0].leaf_value;
        }
        self.nodes
            .iter()
            .filter(|n| n.is_leaf())
            .map(|n| n.leaf_value * n.cover / root)
            .sum()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, id: usize) -> usize {
            let n = &t.nodes[id];
            match (n.left, n.right) {
                (Some(l), Some(r)) => 1 + walk(t, l).max(walk(t, r)),
                _ => 0,
            }
        }
        walk(self, 0)
    }

    pub fn uses_feature(&self, feature: usize) -> bool {
        self.nodes.iter().any(|n| n.split_feature == Some(feature))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleMode {
    RandomForest,
    GradientBoosted,
    Adaboost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Row fraction per boosted tree (sampling without replacement).
    pub subsample: f64,
    /// L2 leaf regularisation of boosted trees.
    pub lambda: f64,
    pub min_samples_leaf: usize,
    /// Minimum hessian per child in boosted trees.
    pub min_child_weight: f64,
    /// Features tried per split; `None` means sqrt(m) for forests and all otherwise.
    pub max_features: Option<usize>,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams::gradient_boosted()
    }
}

impl TreeParams {
    pub fn random_forest() -> Self {
        TreeParams {
            n_trees: 200,
            max_depth: 12,
            learning_rate: 1.0,
            subsample: 1.0,
            lambda: 0.0,
            min_samples_leaf: 1,
            min_child_weight: 0.0,
            max_features: None,
            seed: 0,
        }
    }

    pub fn gradient_boosted() -> Self {
        TreeParams {
            n_trees: 300,
            max_depth: 6,
            learning_rate: 0.1,
            subsample: 1.0,
            lambda: 1.0,
            min_samples_leaf: 1,
            min_child_weight: 1.0,
            max_features: None,
            seed: 0,
        }
    }

    pub fn adaboost() -> Self {
        TreeParams {
            n_trees: 200,
            max_depth: 1,
            learning_rate: 1.0,
            subsample: 1.0,
            lambda: 0.0,
            min_samples_leaf: 1,
            min_child_weight: 0.0,
            max_features: None,
            seed: 0,
        }
    }

    pub fn for_mode(mode: EnsembleMode) -> Self {
        match mode {
            EnsembleMode::RandomForest => Self::random_forest(),
            EnsembleMode::GradientBoosted => Self::gradient_boosted(),
            EnsembleMode::Adaboost => Self::adaboost(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trees(mut self, n_trees: usize) -> Self {
        self.n_trees = n_trees;
        self
    }
}

/// Random forest, gradient-boosted trees or SAMME boosted stumps.
///
/// The raw score of a row is `base_score + Σ_t w_t · tree_t(row)`, where the weights
/// are normalised to sum to one for forests (leaf values are class-1 frequencies).
/// Boosted trees carry the learning rate and stumps carry `α_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub mode: EnsembleMode,
    pub trees: Vec<Tree>,
    pub tree_weights: Vec<f64>,
    pub base_score: f64,
    pub feature_names: Vec<String>,
}

impl TreeEnsemble {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Weight each tree's output is multiplied by in the raw score.
    pub fn effective_weights(&self) -> Vec<f64> {
        match self.mode {
            EnsembleMode::RandomForest => {
                let total: f64 = self.tree_weights.iter().sum();
                if total > 0.0 {
                    self.tree_weights.iter().map(|w| w / total).collect()
                } else {
                    vec![0.0; self.tree_weights.len()]
                }
            }
            _ => self.tree_weights.clone(),
        }
    }

    pub fn predict_raw_row(&self, bin_of: impl Fn(usize) -> u16 + Copy) -> f64 {
        self.base_score
            + self
                .trees
                .iter()
                .zip(self.effective_weights())
                .map(|(t, w)| w * t.predict(bin_of))
                .sum::<f64>()
    }

    pub fn predict_raw(&self, data: &BinnedDataset) -> Vec<f64> {
        let weights = self.effective_weights();
        let mut raw = vec![self.base_score; data.n_rows()];
        for (tree, w) in self.trees.iter().zip(weights) {
            for (i, r) in raw.iter_mut().enumerate() {
                *r += w * tree.predict(|f| data.bins(f)[i]);
            }
        }
        raw
    }

    /// Score above which a row is labelled 1.
    pub fn decision_threshold(&self) -> f64 {
        match self.mode {
            EnsembleMode::RandomForest => 0.5,
            EnsembleMode::GradientBoosted | EnsembleMode::Adaboost => 0.0,
        }
    }

    pub fn predict_labels(&self, data: &BinnedDataset) -> Vec<u8> {
        let t = self.decision_threshold();
        self.predict_raw(data)
            .into_iter()
            .map(|r| u8::from(r > t))
            .collect()
    }

    pub fn uses_feature(&self, feature: usize) -> bool {
        self.trees.iter().any(|t| t.uses_feature(feature))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// One feature's importance; rank 1 is the most important.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature: usize,
    pub score: f64,
    pub rank: usize,
}
