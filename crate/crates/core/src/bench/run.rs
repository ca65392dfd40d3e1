use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::synth::SynthConfig;
use crate::data::{load_csv, split_preprocessed, Dataset};
use crate::diagnostics::{DominanceReport, SpuriousReport};
use crate::ebm::{EbmParams, TermImportance};
use crate::ensemble::{
    altered_ebm, ensemble1_from, ensemble2, plain_ebm, top_n_ebm, AlteredEbmConfig, PipelineResult,
    Pool, PoolConfig,
};
use crate::selectors::{SelectorConfig, SelectorOutput, SelectorRegistry, CROSS_SELECTORS};
use crate::{Error, Result};

use super::EvalResult;

/// Where a benchmark dataset comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BenchDataset {
    Csv {
        name: String,
        path: PathBuf,
        target: String,
    },
    Synthetic {
        name: String,
        #[serde(default)]
        config: SynthConfig,
    },
}

impl BenchDataset {
    pub fn name(&self) -> &str {
        match self {
            BenchDataset::Csv { name, .. } | BenchDataset::Synthetic { name, .. } => name,
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        match self {
            BenchDataset::Csv { path, target, .. } => load_csv(path, target),
            BenchDataset::Synthetic { config, .. } => Ok(config.generate()?.dataset),
        }
    }
}

/// One row of the benchmark matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PipelineSpec {
    Plain,
    PlainTopN { n: usize },
    Ensemble1 { selector: String },
    PoolA,
    PoolB,
    Altered,
}

impl PipelineSpec {
    pub fn row_name(&self) -> String {
        match self {
            PipelineSpec::Plain => "plain".into(),
            PipelineSpec::PlainTopN { n } => format!("plain_top{n}"),
            PipelineSpec::Ensemble1 { selector } => format!("ensemble1_{selector}"),
            PipelineSpec::PoolA => "pool_a".into(),
            PipelineSpec::PoolB => "pool_b".into(),
            PipelineSpec::Altered => "altered_ebm".into(),
        }
    }

    fn needs_selectors(&self) -> Vec<&str> {
        match self {
            PipelineSpec::Ensemble1 { selector } => vec![selector.as_str()],
            PipelineSpec::PoolA | PipelineSpec::PoolB => CROSS_SELECTORS.to_vec(),
            _ => Vec::new(),
        }
    }
}

/// The fourteen rows of the full matrix, in report order.
pub fn default_pipelines() -> Vec<PipelineSpec> {
    let mut rows = vec![PipelineSpec::Plain, PipelineSpec::PlainTopN { n: 20 }];
    rows.extend(CROSS_SELECTORS.iter().map(|s| PipelineSpec::Ensemble1 {
        selector: s.to_string(),
    }));
    rows.extend([
        PipelineSpec::PoolA,
        PipelineSpec::PoolB,
        PipelineSpec::Altered,
    ]);
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub datasets: Vec<BenchDataset>,
    pub pipelines: Vec<PipelineSpec>,
    /// Seeds the split, every selector and the additive model.
    pub seed: u64,
    /// Training share of the stratified split.
    pub split_ratio: f64,
    pub threshold: f64,
    pub ebm: EbmParams,
    pub selectors: SelectorConfig,
    pub pool: PoolConfig,
    pub altered: AlteredEbmConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            datasets: vec![BenchDataset::Synthetic {
                name: "synthetic".into(),
                config: SynthConfig::benchmark(),
            }],
            pipelines: default_pipelines(),
            seed: 0,
            split_ratio: 0.7,
            threshold: super::DEFAULT_THRESHOLD,
            ebm: EbmParams::default(),
            selectors: SelectorConfig::default(),
            pool: PoolConfig::default(),
            altered: AlteredEbmConfig::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::invalid("split_ratio must lie in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::invalid("threshold must lie in [0, 1]"));
        }
        self.selectors.validate()?;
        self.pool.validate(CROSS_SELECTORS.len())?;
        let registry = SelectorRegistry::default();
        for p in &self.pipelines {
            for s in p.needs_selectors() {
                if !registry.contains(s) {
                    return Err(Error::UnknownSelector(s.to_string()));
                }
            }
        }
        Ok(())
    }

    fn ebm_params(&self) -> EbmParams {
        EbmParams {
            seed: self.seed,
            ..self.ebm.clone()
        }
    }

    fn selector_config(&self) -> SelectorConfig {
        self.selectors.clone().with_seed(self.seed)
    }
}

/// Enough to re-run one row in isolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowManifest {
    pub dataset: BenchDataset,
    pub pipeline: PipelineSpec,
    pub seed: u64,
    pub split_ratio: f64,
    pub threshold: f64,
    pub ebm: EbmParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selectors: Option<SelectorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<PoolConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub altered: Option<AlteredEbmConfig>,
    /// Wall time of each selector that fed the row; not part of the model fit time.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub selector_times: Vec<SelectorTime>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorTime {
    pub selector: String,
    pub fit_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowOutcome {
    pub selected_features: Vec<String>,
    pub eval: EvalResult,
    pub dominance: DominanceReport,
    pub spurious: SpuriousReport,
    pub importance: Vec<TermImportance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dataset: String,
    pub pipeline: String,
    /// `None` when the row succeeded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<RowOutcome>,
    pub manifest: RowManifest,
}

impl BenchRow {
    pub fn succeeded(&self) -> bool {
        self.outcome.is_some()
    }

    /// File-system friendly `dataset__pipeline` label.
    pub fn label(&self) -> String {
        let clean = |s: &str| -> String {
            s.chars()
                .map(|c| {
                    if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                        c
                    } else {
                        '_'
                    }
                })
                .collect()
        };
        format!("{}__{}", clean(&self.dataset), clean(&self.pipeline))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub crate_version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
}

impl Environment {
    pub fn current() -> Self {
        Environment {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            threads: rayon::current_num_threads(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub environment: Environment,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn row(&self, dataset: &str, pipeline: &str) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.dataset == dataset && r.pipeline == pipeline)
    }
}

struct Prepared {
    train: Dataset,
    test: Dataset,
    outputs: Vec<(String, Result<SelectorOutput>)>,
}

impl Prepared {
    fn output(&self, name: &str) -> Result<SelectorOutput> {
        match self.outputs.iter().find(|(n, _)| n == name) {
            Some((_, Ok(out))) => Ok(out.clone()),
            Some((_, Err(e))) => Err(Error::invalid(format!("selector {name} failed: {e}"))),
            None => Err(Error::UnknownSelector(name.to_string())),
        }
    }
}

fn prepare(dataset: &BenchDataset, config: &BenchConfig) -> Result<Prepared> {
    let raw = dataset.load()?;
    let (train, test) = split_preprocessed(&raw, config.split_ratio, config.seed)?;

    let mut needed: Vec<&str> = Vec::new();
    for p in &config.pipelines {
        for s in p.needs_selectors() {
            if !needed.contains(&s) {
                needed.push(s);
            }
        }
    }
    let registry = SelectorRegistry::default();
    let selector_config = config.selector_config();
    let outputs = needed
        .par_iter()
        .map(|&name| {
            (
                name.to_string(),
                registry.run(name, &train, &selector_config),
            )
        })
        .collect();
    Ok(Prepared {
        train,
        test,
        outputs,
    })
}

fn run_row(spec: &PipelineSpec, data: &Prepared, config: &BenchConfig) -> Result<PipelineResult> {
    let ebm = config.ebm_params();
    let (train, test) = (&data.train, &data.test);
    let result = match spec {
        PipelineSpec::Plain => plain_ebm(train, test, &ebm),
        PipelineSpec::PlainTopN { n } => top_n_ebm(train, test, *n, &ebm),
        PipelineSpec::Ensemble1 { selector } => {
            ensemble1_from(train, test, data.output(selector)?, &ebm)
        }
        PipelineSpec::PoolA | PipelineSpec::PoolB => {
            let outputs = CROSS_SELECTORS
                .iter()
                .map(|s| data.output(s))
                .collect::<Result<Vec<_>>>()?;
            let pool = if *spec == PipelineSpec::PoolA {
                Pool::A
            } else {
                Pool::B
            };
            ensemble2(train, test, &outputs, pool, &config.pool, &ebm)
        }
        PipelineSpec::Altered => altered_ebm(train, test, &config.altered, &ebm),
    }?;
    if config.threshold != super::DEFAULT_THRESHOLD {
        let eval = super::evaluate_at(
            &result.model,
            test,
            result.eval.fit_seconds,
            config.threshold,
        )?;
        return Ok(PipelineResult { eval, ..result });
    }
    Ok(result)
}

fn manifest_for(
    dataset: &BenchDataset,
    spec: &PipelineSpec,
    config: &BenchConfig,
    data: Option<&Prepared>,
) -> RowManifest {
    let names = spec.needs_selectors();
    let selector_times = data
        .map(|d| {
            names
                .iter()
                .filter_map(|&n| d.output(n).ok())
                .map(|o| SelectorTime {
                    selector: o.selector,
                    fit_seconds: o.fit_seconds,
                })
                .collect()
        })
        .unwrap_or_default();
    RowManifest {
        dataset: dataset.clone(),
        pipeline: spec.clone(),
        seed: config.seed,
        split_ratio: config.split_ratio,
        threshold: config.threshold,
        ebm: config.ebm_params(),
        selectors: (!names.is_empty()).then(|| config.selector_config()),
        pool: matches!(spec, PipelineSpec::PoolA | PipelineSpec::PoolB)
            .then(|| config.pool.clone()),
        altered: matches!(spec, PipelineSpec::Altered).then(|| config.altered.clone()),
        selector_times,
    }
}

/// Run every configured pipeline on every dataset.
///
/// Rows run concurrently but are reported in configuration order. A row that
/// fails is kept with its error message and the run continues.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let mut rows = Vec::new();
    for dataset in &config.datasets {
        let prepared = prepare(dataset, config);
        let batch: Vec<BenchRow> = config
            .pipelines
            .par_iter()
            .map(|spec| {
                let manifest = manifest_for(dataset, spec, config, prepared.as_ref().ok());
                let result = match &prepared {
                    Ok(data) => run_row(spec, data, config),
                    Err(e) => Err(Error::invalid(format!("dataset unavailable: {e}"))),
                };
                let (error, outcome) = match result {
                    Ok(r) => (
                        None,
                        Some(RowOutcome {
                            selected_features: r.selected_names,
                            eval: r.eval,
                            dominance: r.dominance,
                            spurious: r.spurious,
                            importance: r.importance,
                        }),
                    ),
                    Err(e) => {
                        log::warn!("{} / {} failed: {e}", dataset.name(), spec.row_name());
                        (Some(e.to_string()), None)
                    }
                };
                BenchRow {
                    dataset: dataset.name().to_string(),
                    pipeline: spec.row_name(),
                    error,
                    outcome,
                    manifest,
                }
            })
            .collect();
        rows.extend(batch);
    }
    Ok(BenchReport {
        config: config.clone(),
        environment: Environment::current(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_matrix_has_fourteen_rows() {
        let rows = default_pipelines();
        assert_eq!(rows.len(), 14);
        assert_eq!(rows[0].row_name(), "plain");
        assert_eq!(rows[1].row_name(), "plain_top20");
        assert_eq!(rows[13].row_name(), "altered_ebm");
    }

    #[test]
    fn empty_pipeline_list_gives_empty_report() {
        let config = BenchConfig {
            pipelines: Vec::new(),
            ..BenchConfig::default()
        };
        assert!(run_benchmark(&config).unwrap().rows.is_empty());
    }

    #[test]
    fn unknown_selector_is_rejected_up_front() {
        let config = BenchConfig {
            pipelines: vec![PipelineSpec::Ensemble1 {
                selector: "lasso".into(),
            }],
            ..BenchConfig::default()
        };
        assert!(matches!(
            run_benchmark(&config),
            Err(Error::UnknownSelector(_))
        ));
    }

    #[test]
    fn missing_file_is_a_failed_row() {
        let config = BenchConfig {
            datasets: vec![BenchDataset::Csv {
                name: "gone".into(),
                path: "/nonexistent/data.csv".into(),
                target: "y".into(),
            }],
            pipelines: vec![PipelineSpec::Plain],
            ..BenchConfig::default()
        };
        let report = run_benchmark(&config).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(report.rows[0].error.is_some());
    }

    #[test]
    fn config_json_rejects_unknown_keys() {
        assert!(serde_json::from_str::<BenchConfig>(r#"{"seeds": 3}"#).is_err());
        let c: BenchConfig = serde_json::from_str(r#"{"seed": 3}"#).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.pipelines.len(), 14);
    }
}
