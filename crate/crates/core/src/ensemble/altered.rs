use serde::{Deserialize, Serialize};

use super::{fit_subset, plain_ebm, Manifest, PipelineResult};
use crate::bench::DEFAULT_THRESHOLD;
use crate::data::Dataset;
use crate::ebm::{normalized, EbmParams, Term, TermImportance};
use crate::{Error, Result};

/// Which mains must out-rank a pair for the pair to survive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankRule {
    #[default]
    Both,
    Either,
}

impl RankRule {
    pub fn keeps(self, pair_rank: usize, main_ranks: (usize, usize)) -> bool {
        let (a, b) = (main_ranks.0 < pair_rank, main_ranks.1 < pair_rank);
        match self {
            RankRule::Both => a && b,
            RankRule::Either => a || b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlteredEbmConfig {
    /// `M`, applied to sum-normalized importances of the preliminary model.
    pub importance_threshold: f64,
    pub comparison: RankRule,
}

impl Default for AlteredEbmConfig {
    fn default() -> Self {
        AlteredEbmConfig {
            importance_threshold: 0.05,
            comparison: RankRule::Both,
        }
    }
}

/// What the preliminary model decided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlteredManifest {
    pub config: AlteredEbmConfig,
    /// Normalized term importances of the preliminary model.
    pub preliminary: Vec<TermImportance>,
    /// Input-table ids of the features that cleared `M`.
    pub kept_features: Vec<usize>,
    /// Input-table ids of the pairs offered to the final fit.
    pub kept_pairs: Vec<(usize, usize)>,
}

/// Pairs of `importance` whose mains out-rank them under `rule`.
pub fn surviving_pairs(importance: &[TermImportance], rule: RankRule) -> Vec<(usize, usize)> {
    let main_rank = |f: usize| {
        importance
            .iter()
            .find(|t| t.term == Term::Main(f))
            .map_or(usize::MAX, |t| t.rank)
    };
    importance
        .iter()
        .filter_map(|t| match t.term {
            Term::Pair(a, b) if rule.keeps(t.rank, (main_rank(a), main_rank(b))) => Some((a, b)),
            _ => None,
        })
        .collect()
}

/// Preselect features with a full model, prune pairs that out-rank their own
/// mains, then refit on what is left.
pub fn altered_ebm(
    train: &Dataset,
    test: &Dataset,
    config: &AlteredEbmConfig,
    ebm: &EbmParams,
) -> Result<PipelineResult> {
    if config.importance_threshold.is_nan() || config.importance_threshold < 0.0 {
        return Err(Error::invalid("importance_threshold must be non-negative"));
    }
    let pre = plain_ebm(train, test, ebm)?;
    let preliminary = normalized(&pre.importance);
    let ids = &pre.selected_features;
    let kept_local: Vec<usize> = preliminary
        .iter()
        .filter_map(|t| match t.term {
            Term::Main(f) if t.importance >= config.importance_threshold => Some(f),
            _ => None,
        })
        .collect();
    if kept_local.is_empty() {
        return Err(Error::ThresholdEliminatesAll);
    }
    let kept_pairs: Vec<(usize, usize)> = surviving_pairs(&preliminary, config.comparison)
        .into_iter()
        .filter(|(a, b)| kept_local.contains(a) && kept_local.contains(b))
        .map(|(a, b)| (ids[a], ids[b]))
        .collect();
    let mut kept_features: Vec<usize> = kept_local.iter().map(|&f| ids[f]).collect();
    kept_features.sort_unstable();
    log::debug!(
        "altered model keeps {} features and {} candidate pairs",
        kept_features.len(),
        kept_pairs.len()
    );
    fit_subset(
        "altered_ebm",
        train,
        test,
        &kept_features,
        Some(&kept_pairs),
        ebm,
        DEFAULT_THRESHOLD,
        Manifest {
            altered: Some(AlteredManifest {
                config: config.clone(),
                preliminary,
                kept_features: kept_features.clone(),
                kept_pairs: kept_pairs.clone(),
            }),
            ..Manifest::default()
        },
    )
}
