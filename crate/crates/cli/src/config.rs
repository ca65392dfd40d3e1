use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use glassboost::bench::BenchConfig;
use glassboost::data::synth::SynthConfig;
use glassboost::ebm::EbmParams;
use glassboost::ensemble::{AlteredEbmConfig, PoolBMode, PoolConfig, RankRule};
use glassboost::selectors::SelectorConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::{CommonArgs, PipelineArgs, PoolBModeArg, RankRuleArg, SelectorFlags, SynthArgs};
use crate::UserError;

pub const SEED_ENV: &str = "GLASSBOOST_SEED";

/// Settings shared by `select`, `train` and `pipeline`. This is also the
/// manifest those commands print.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub target: Option<String>,
    pub seed: u64,
    pub split_ratio: f64,
    pub threshold: f64,
    pub ebm: EbmParams,
    pub selectors: SelectorConfig,
    pub pool: PoolConfig,
    pub altered: AlteredEbmConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: None,
            target: None,
            seed: 0,
            split_ratio: 0.7,
            threshold: glassboost::bench::DEFAULT_THRESHOLD,
            ebm: EbmParams::default(),
            selectors: SelectorConfig::default(),
            pool: PoolConfig::default(),
            altered: AlteredEbmConfig::default(),
        }
    }
}

fn env_seed() -> anyhow::Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            UserError::new(format!("{SEED_ENV}={s:?} is not an unsigned integer")).into()
        }),
        Err(_) => Ok(None),
    }
}

/// Parse a JSON config file (or an empty object), applying the environment
/// seed when the file does not set one. Unknown keys are rejected.
pub fn load_file<T: DeserializeOwned>(path: Option<&Path>) -> anyhow::Result<T> {
    let mut value = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| UserError::new(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str::<Value>(&text)
                .map_err(|e| UserError::new(format!("config {} is not JSON: {e}", p.display())))?
        }
        None => Value::Object(Default::default()),
    };
    let Value::Object(map) = &mut value else {
        return Err(UserError::new("config must be a JSON object").into());
    };
    if !map.contains_key("seed") {
        if let Some(seed) = env_seed()? {
            map.insert("seed".into(), seed.into());
        }
    }
    serde_json::from_value(value).map_err(|e| UserError::new(format!("invalid config: {e}")).into())
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

impl RunConfig {
    pub fn from_common(c: &CommonArgs) -> anyhow::Result<Self> {
        let mut cfg: RunConfig = load_file(c.config.as_deref())?;
        if c.data.is_some() {
            cfg.data = c.data.clone();
        }
        if c.target.is_some() {
            cfg.target = c.target.clone();
        }
        set(&mut cfg.seed, c.seed);
        set(&mut cfg.split_ratio, c.split);
        set(&mut cfg.threshold, c.threshold);
        set(&mut cfg.ebm.n_interactions, c.interactions);
        set(&mut cfg.ebm.outer_rounds, c.rounds);
        cfg.ebm.seed = cfg.seed;
        cfg.selectors.seed = cfg.seed;
        Ok(cfg)
    }

    pub fn apply_selector_flags(&mut self, f: &SelectorFlags) {
        set(&mut self.selectors.importance_cutoff, f.cutoff);
        set(&mut self.selectors.correlation_cutoff, f.correlation_cutoff);
        set(&mut self.selectors.vif_threshold, f.vif_threshold);
        set(&mut self.selectors.variance_threshold, f.variance_threshold);
        set(
            &mut self.selectors.boruta.max_iterations,
            f.boruta_iterations,
        );
    }

    pub fn apply_pipeline_flags(&mut self, a: &PipelineArgs) {
        set(&mut self.pool.k_min_overlap, a.k);
        set(&mut self.pool.top_p, a.p);
        set(
            &mut self.pool.pool_b_mode,
            a.pool_b_mode.map(|m| match m {
                PoolBModeArg::Union => PoolBMode::Union,
                PoolBModeArg::Borda => PoolBMode::Borda,
            }),
        );
        if a.borda_size.is_some() {
            self.pool.borda_size = a.borda_size;
        }
        set(&mut self.altered.importance_threshold, a.m);
        set(
            &mut self.altered.comparison,
            a.rank_rule.map(|r| match r {
                RankRuleArg::Both => RankRule::Both,
                RankRuleArg::Either => RankRule::Either,
            }),
        );
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(UserError::new("split ratio must lie in (0, 1)").into());
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(UserError::new("threshold must lie in [0, 1]").into());
        }
        self.selectors.validate().map_err(UserError::from_core)?;
        Ok(())
    }

    pub fn data(&self) -> anyhow::Result<(&Path, &str)> {
        match (&self.data, &self.target) {
            (Some(d), Some(t)) => Ok((d.as_path(), t.as_str())),
            _ => {
                Err(UserError::new("--data and --target are required (flag or config file)").into())
            }
        }
    }
}

pub fn synth_config(a: &SynthArgs) -> anyhow::Result<SynthConfig> {
    let mut cfg: SynthConfig = if a.benchmark {
        let base =
            serde_json::to_value(SynthConfig::benchmark()).context("serialising defaults")?;
        let file: Value = load_file(a.config.as_deref())?;
        merge(base, file)?
    } else {
        load_file(a.config.as_deref())?
    };
    set(&mut cfg.rows, a.rows);
    set(&mut cfg.informative, a.informative);
    set(&mut cfg.redundant, a.redundant);
    set(&mut cfg.rho, a.rho);
    set(&mut cfg.exact, a.exact);
    set(&mut cfg.noise, a.noise);
    set(&mut cfg.imbalance, a.imbalance);
    set(&mut cfg.latent_noise, a.latent_noise);
    set(&mut cfg.seed, a.seed);
    Ok(cfg)
}

/// Overlay the keys of `top` onto `base` (objects only).
fn merge<T: DeserializeOwned>(mut base: Value, top: Value) -> anyhow::Result<T> {
    if let (Value::Object(b), Value::Object(t)) = (&mut base, top) {
        b.extend(t);
    }
    serde_json::from_value(base).map_err(|e| UserError::new(format!("invalid config: {e}")).into())
}

pub fn bench_config(path: Option<&Path>, seed: Option<u64>) -> anyhow::Result<BenchConfig> {
    let mut cfg: BenchConfig = load_file(path)?;
    set(&mut cfg.seed, seed);
    cfg.validate().map_err(UserError::from_core)?;
    Ok(cfg)
}
