//! The three pipelines that put feature selection in front of the additive model:
//! a single cross-selector ([`ensemble1`]), pooled selector outputs
//! ([`ensemble2`]) and the pruned refit ([`altered_ebm`]).

mod altered;
mod pool;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::{evaluate_at, EvalResult, DEFAULT_THRESHOLD};
use crate::data::{bin, Dataset};
use crate::diagnostics::{dominance_report, spurious_report, DominanceReport, SpuriousReport};
use crate::ebm::{fit_ebm_with, term_importance, AdditiveModel, EbmParams, Term, TermImportance};
use crate::selectors::{SelectorConfig, SelectorOutput, SelectorRegistry, CROSS_SELECTORS};
use crate::{Error, Result};

pub use altered::{altered_ebm, AlteredEbmConfig, AlteredManifest, RankRule};
pub use pool::{pool_a, pool_b, Pool, PoolBMode, PoolConfig};

/// Everything needed to re-run a pipeline and to audit its output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub ebm: EbmParams,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub selectors: Vec<SelectorOutput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<PoolConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub altered: Option<AlteredManifest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub pipeline: String,
    /// Column ids in the input table, ascending.
    pub selected_features: Vec<usize>,
    pub selected_names: Vec<String>,
    pub model: AdditiveModel,
    pub eval: EvalResult,
    pub importance: Vec<TermImportance>,
    pub dominance: DominanceReport,
    pub spurious: SpuriousReport,
    pub manifest: Manifest,
}

impl PipelineResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Restrict both splits to `features`, fit, evaluate and audit.
///
/// `pairs` is a whitelist in input-table ids; `None` screens all pairs.
#[allow(clippy::too_many_arguments)]
pub(crate) fn fit_subset(
    pipeline: &str,
    train: &Dataset,
    test: &Dataset,
    features: &[usize],
    pairs: Option<&[(usize, usize)]>,
    ebm: &EbmParams,
    threshold: f64,
    manifest: Manifest,
) -> Result<PipelineResult> {
    let mut features = features.to_vec();
    features.sort_unstable();
    features.dedup();
    if features.is_empty() {
        return Err(Error::EmptyFeaturePool);
    }
    let sub_train = train.select_features(&features)?;
    let sub_test = test.select_features(&features)?;
    let local = |id: usize| features.binary_search(&id).ok();
    let local_pairs: Option<Vec<(usize, usize)>> = pairs.map(|list| {
        list.iter()
            .filter_map(|&(a, b)| Some((local(a)?, local(b)?)))
            .collect()
    });

    let binned = bin(&sub_train, ebm.max_bins)?;
    let started = Instant::now();
    let model =
        fit_ebm_with(&binned, ebm, local_pairs.as_deref())?.with_feature_ids(features.clone());
    let fit_seconds = started.elapsed().as_secs_f64();

    let eval = evaluate_at(&model, &sub_test, fit_seconds, threshold)?;
    let importance = term_importance(&model, &binned);
    let dominance = dominance_report(&importance);
    let spurious = spurious_report(&importance)?;
    Ok(PipelineResult {
        pipeline: pipeline.to_string(),
        selected_names: sub_train.feature_names().to_vec(),
        selected_features: features,
        model,
        eval,
        importance,
        dominance,
        spurious,
        manifest: Manifest {
            ebm: ebm.clone(),
            threshold,
            ..manifest
        },
    })
}

/// Plain EBM on every feature.
pub fn plain_ebm(train: &Dataset, test: &Dataset, ebm: &EbmParams) -> Result<PipelineResult> {
    let all: Vec<usize> = (0..train.n_features()).collect();
    fit_subset(
        "plain",
        train,
        test,
        &all,
        None,
        ebm,
        DEFAULT_THRESHOLD,
        Manifest::default(),
    )
}

/// Plain EBM refit on the `n` features whose main effects ranked highest in a
/// first fit on all features.
pub fn top_n_ebm(
    train: &Dataset,
    test: &Dataset,
    n: usize,
    ebm: &EbmParams,
) -> Result<PipelineResult> {
    let full = plain_ebm(train, test, ebm)?;
    let mut mains: Vec<&TermImportance> = full
        .importance
        .iter()
        .filter(|t| matches!(t.term, Term::Main(_)))
        .collect();
    mains.sort_by_key(|t| t.rank);
    let keep: Vec<usize> = mains
        .iter()
        .take(n)
        .map(|t| match t.term {
            Term::Main(f) => full.selected_features[f],
            Term::Pair(..) => unreachable!(),
        })
        .collect();
    fit_subset(
        &format!("plain_top{n}"),
        train,
        test,
        &keep,
        None,
        ebm,
        DEFAULT_THRESHOLD,
        Manifest::default(),
    )
}

/// Run one selector on `train`, then fit the model on its selection.
pub fn ensemble1(
    train: &Dataset,
    test: &Dataset,
    selector: &str,
    config: &SelectorConfig,
    ebm: &EbmParams,
) -> Result<PipelineResult> {
    ensemble1_with(
        &SelectorRegistry::default(),
        train,
        test,
        selector,
        config,
        ebm,
    )
}

pub fn ensemble1_with(
    registry: &SelectorRegistry,
    train: &Dataset,
    test: &Dataset,
    selector: &str,
    config: &SelectorConfig,
    ebm: &EbmParams,
) -> Result<PipelineResult> {
    let output = registry.run(selector, train, config)?;
    ensemble1_from(train, test, output, ebm)
}

/// Fit on the selection of an already computed selector output.
pub fn ensemble1_from(
    train: &Dataset,
    test: &Dataset,
    output: SelectorOutput,
    ebm: &EbmParams,
) -> Result<PipelineResult> {
    if output.selected.is_empty() {
        return Err(Error::EmptyFeaturePool);
    }
    let features = output.selected.clone();
    let name = format!("ensemble1_{}", output.selector);
    fit_subset(
        &name,
        train,
        test,
        &features,
        None,
        ebm,
        DEFAULT_THRESHOLD,
        Manifest {
            selectors: vec![output],
            ..Manifest::default()
        },
    )
}

/// All nine cross-selectors on `train`, concurrently, in canonical order.
pub fn run_cross_selectors(
    train: &Dataset,
    config: &SelectorConfig,
) -> Result<Vec<SelectorOutput>> {
    let registry = SelectorRegistry::default();
    CROSS_SELECTORS
        .par_iter()
        .map(|name| registry.run(name, train, config))
        .collect()
}

/// Pool selector outputs and fit the model on the pooled features.
pub fn ensemble2(
    train: &Dataset,
    test: &Dataset,
    outputs: &[SelectorOutput],
    which: Pool,
    config: &PoolConfig,
    ebm: &EbmParams,
) -> Result<PipelineResult> {
    config.validate(outputs.len())?;
    let features = match which {
        Pool::A => pool_a(outputs, config),
        Pool::B => pool_b(outputs, config),
    };
    if features.is_empty() {
        return Err(Error::EmptyFeaturePool);
    }
    fit_subset(
        which.pipeline_name(),
        train,
        test,
        &features,
        None,
        ebm,
        DEFAULT_THRESHOLD,
        Manifest {
            selectors: outputs.to_vec(),
            pool: Some(config.clone()),
            ..Manifest::default()
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::split;
    use crate::data::synth::SynthConfig;

    fn small() -> (Dataset, Dataset) {
        let ds = SynthConfig {
            rows: 600,
            ..SynthConfig::default()
        }
        .generate()
        .unwrap()
        .dataset;
        let s = split(&ds, 0.7, 3).unwrap();
        (s.train, s.test)
    }

    fn quick() -> EbmParams {
        EbmParams {
            outer_rounds: 200,
            ..EbmParams::default()
        }
    }

    #[test]
    fn identity_selector_matches_plain() {
        let (train, test) = small();
        let plain = plain_ebm(&train, &test, &quick()).unwrap();
        let all = ensemble1(&train, &test, "all", &SelectorConfig::default(), &quick()).unwrap();
        assert_eq!(plain.eval.confusion, all.eval.confusion);
        assert_eq!(plain.model.main_terms, all.model.main_terms);
        assert_eq!(plain.model.pair_terms, all.model.pair_terms);
    }

    #[test]
    fn model_ids_follow_selection() {
        let (train, test) = small();
        let r = fit_subset(
            "t",
            &train,
            &test,
            &[4, 1],
            None,
            &quick(),
            0.5,
            Manifest::default(),
        )
        .unwrap();
        assert_eq!(r.selected_features, vec![1, 4]);
        assert_eq!(r.model.feature_ids, r.selected_features);
    }

    #[test]
    fn empty_subset_is_an_error() {
        let (train, test) = small();
        let err = fit_subset(
            "t",
            &train,
            &test,
            &[],
            None,
            &quick(),
            0.5,
            Manifest::default(),
        );
        assert!(matches!(err, Err(Error::EmptyFeaturePool)));
    }

    #[test]
    fn result_round_trips_through_json() {
        let (train, test) = small();
        let r = plain_ebm(&train, &test, &quick()).unwrap();
        let back = PipelineResult::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back.selected_features, r.selected_features);
        assert_eq!(back.eval, r.eval);
    }
}
