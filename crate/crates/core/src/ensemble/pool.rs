use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::selectors::SelectorOutput;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pool {
    A,
    B,
}

impl Pool {
    pub fn pipeline_name(self) -> &'static str {
        match self {
            Pool::A => "pool_a",
            Pool::B => "pool_b",
        }
    }
}

/// How Pool B merges the selectors' rankings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolBMode {
    /// Deduplicated union of every selector's top `P` selected features.
    #[default]
    Union,
    /// Global top features by the Borda sum of `m - rank` over selectors.
    Borda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoolConfig {
    /// `K`: a feature enters Pool A when at least this many selectors chose it.
    pub k_min_overlap: usize,
    /// `P`: features taken from the head of each selector's ranking for Pool B.
    pub top_p: usize,
    pub pool_b_mode: PoolBMode,
    /// Pool size in Borda mode; defaults to the size the union mode would give.
    pub borda_size: Option<usize>,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig {
            k_min_overlap: 4,
            top_p: 3,
            pool_b_mode: PoolBMode::Union,
            borda_size: None,
        }
    }
}

impl PoolConfig {
    pub fn validate(&self, n_selectors: usize) -> Result<()> {
        if n_selectors == 0 {
            return Err(Error::invalid("pooling needs at least one selector output"));
        }
        if self.k_min_overlap == 0 || self.k_min_overlap > n_selectors {
            return Err(Error::invalid(format!(
                "k_min_overlap {} outside 1..={n_selectors}",
                self.k_min_overlap
            )));
        }
        if self.top_p == 0 {
            return Err(Error::invalid("top_p must be at least 1"));
        }
        Ok(())
    }
}

/// Features chosen by at least `K` selectors, most frequent first (ties by id).
pub fn pool_a(outputs: &[SelectorOutput], config: &PoolConfig) -> Vec<usize> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for out in outputs {
        let mut seen = out.selected.clone();
        seen.sort_unstable();
        seen.dedup();
        for f in seen {
            *counts.entry(f).or_default() += 1;
        }
    }
    let mut pooled: Vec<(usize, usize)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= config.k_min_overlap)
        .collect();
    pooled.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    if pooled.is_empty() {
        log::warn!("no feature reaches {} selector votes", config.k_min_overlap);
    }
    pooled.into_iter().map(|(f, _)| f).collect()
}

fn union_top(outputs: &[SelectorOutput], top_p: usize) -> Vec<usize> {
    let mut pooled = Vec::new();
    for out in outputs {
        for &f in out.selected.iter().take(top_p) {
            if !pooled.contains(&f) {
                pooled.push(f);
            }
        }
    }
    pooled
}

fn borda(outputs: &[SelectorOutput], size: usize) -> Vec<usize> {
    let mut total: BTreeMap<usize, usize> = BTreeMap::new();
    for out in outputs {
        let m = out.scores.len();
        for s in &out.scores {
            *total.entry(s.feature).or_default() += m.saturating_sub(s.rank);
        }
    }
    let mut ranked: Vec<(usize, usize)> = total.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.into_iter().take(size).map(|(f, _)| f).collect()
}

/// Pool B under the configured mode. Union order is first appearance across
/// selectors; Borda order is descending aggregate score.
pub fn pool_b(outputs: &[SelectorOutput], config: &PoolConfig) -> Vec<usize> {
    let union = union_top(outputs, config.top_p);
    match config.pool_b_mode {
        PoolBMode::Union => union,
        PoolBMode::Borda => borda(outputs, config.borda_size.unwrap_or(union.len())),
    }
}
