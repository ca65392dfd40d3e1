use serde::{Deserialize, Serialize};

use super::boost::{boost_terms, Layout, TermCells, NO_CELL};
use super::interactions::rank_pairs;
use super::model::{AdditiveModel, MainTerm, PairTerm};
use crate::data::{stratified_indices, BinnedDataset, DEFAULT_MAX_BINS, UNKNOWN_BIN};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EbmParams {
    pub learning_rate: f64,
    pub outer_rounds: usize,
    /// Leaves of the per-feature inner learner.
    pub inner_tree_leaves: usize,
    pub n_interactions: usize,
    pub validation_fraction: f64,
    pub early_stop_patience: usize,
    /// Minimum validation log-loss improvement that resets the patience counter.
    pub early_stop_tolerance: f64,
    pub min_samples_leaf: usize,
    /// Main bins are merged into at most this many bins per axis of a pair grid.
    pub max_interaction_bins: usize,
    /// Quantile bins per feature used when a pipeline bins raw data for the model.
    pub max_bins: usize,
    pub seed: u64,
}

impl Default for EbmParams {
    fn default() -> Self {
        EbmParams {
            learning_rate: 0.01,
            outer_rounds: 5000,
            inner_tree_leaves: 3,
            n_interactions: 10,
            validation_fraction: 0.15,
            early_stop_patience: 50,
            early_stop_tolerance: 0.0,
            min_samples_leaf: 2,
            max_interaction_bins: 32,
            max_bins: DEFAULT_MAX_BINS,
            seed: 0,
        }
    }
}

impl EbmParams {
    fn validate(&self) -> Result<()> {
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::invalid("learning_rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::invalid("validation_fraction must lie in [0, 1)"));
        }
        if self.max_interaction_bins < 2 {
            return Err(Error::invalid("max_interaction_bins must be at least 2"));
        }
        Ok(())
    }
}

/// Fit mains, screen pairs on the main-effect residuals and fit the selected pairs.
pub fn fit_ebm(data: &BinnedDataset, params: &EbmParams) -> Result<AdditiveModel> {
    fit_ebm_with(data, params, None)
}

/// As [`fit_ebm`], but interactions are only screened among `pair_candidates`
/// when given.
pub fn fit_ebm_with(
    data: &BinnedDataset,
    params: &EbmParams,
    pair_candidates: Option<&[(usize, usize)]>,
) -> Result<AdditiveModel> {
    params.validate()?;
    let n = data.n_rows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let target = data.target();
    let positives = target.iter().filter(|&&t| t == 1).count();
    if positives == 0 || positives == n {
        return Err(Error::SingleClassTarget);
    }
    let rate = positives as f64 / n as f64;
    let intercept = (rate / (1.0 - rate)).ln();
    let mut model = AdditiveModel::intercept_only(intercept, data.schema().clone());
    model.interaction_bins = (0..data.n_features())
        .map(|f| interaction_bin_map(data, f, params.max_interaction_bins))
        .collect();
    if params.outer_rounds == 0 {
        return Ok(model);
    }

    let (train, validation) = carve_validation(target, params);
    let active: Vec<usize> = (0..data.n_features())
        .filter(|&f| data.n_bins(f) >= 2)
        .collect();
    if active.is_empty() {
        return Ok(model);
    }

    let main_cells: Vec<TermCells> = active
        .iter()
        .map(|&f| TermCells {
            cells: data
                .bins(f)
                .iter()
                .map(|&b| if b == UNKNOWN_BIN { NO_CELL } else { b as u32 })
                .collect(),
            n_cells: data.n_bins(f),
            layout: Layout::Line,
        })
        .collect();
    let mut scores = vec![intercept; n];
    let mains = boost_terms(
        &main_cells,
        target,
        &train,
        &validation,
        &mut scores,
        params,
    );
    log::debug!("main effects stopped after {} rounds", mains.rounds);
    model.main_terms = active
        .iter()
        .zip(mains.values)
        .map(|(&feature, values)| MainTerm { feature, values })
        .collect();

    let candidates: Vec<(usize, usize)> = match pair_candidates {
        Some(list) => list
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .filter(|&(a, b)| a != b && active.contains(&a) && active.contains(&b))
            .collect(),
        None => active
            .iter()
            .enumerate()
            .flat_map(|(k, &a)| active[k + 1..].iter().map(move |&b| (a, b)))
            .collect(),
    };
    let pairs = rank_pairs(
        data,
        &train,
        &scores,
        &model.interaction_bins,
        &candidates,
        params.n_interactions,
        params.min_samples_leaf.max(1) as f64,
    );
    if !pairs.is_empty() {
        let pair_cells: Vec<TermCells> = pairs
            .iter()
            .map(|p| pair_term_cells(data, &model.interaction_bins, p.pair))
            .collect();
        let fitted = boost_terms(
            &pair_cells,
            target,
            &train,
            &validation,
            &mut scores,
            params,
        );
        log::debug!("pairs stopped after {} rounds", fitted.rounds);
        model.pair_terms = pairs
            .iter()
            .zip(pair_cells.iter().zip(fitted.values))
            .map(|(p, (cells, values))| {
                let Layout::Grid(r, c) = cells.layout else {
                    unreachable!("pair terms are grids")
                };
                PairTerm {
                    features: p.pair,
                    shape: (r, c),
                    values,
                }
            })
            .collect();
    }
    center_terms(&mut model, data);
    Ok(model)
}

fn carve_validation(target: &[u8], params: &EbmParams) -> (Vec<usize>, Vec<usize>) {
    let all: Vec<usize> = (0..target.len()).collect();
    if params.validation_fraction <= 0.0 {
        return (all, Vec::new());
    }
    match stratified_indices(target, 1.0 - params.validation_fraction, params.seed) {
        Ok(p) => (p.train, p.test),
        Err(_) => (all, Vec::new()),
    }
}

/// Merge adjacent main bins into at most `max_bins` groups of similar row counts.
fn interaction_bin_map(data: &BinnedDataset, feature: usize, max_bins: usize) -> Vec<u16> {
    let n_bins = data.n_bins(feature);
    if n_bins <= max_bins {
        return (0..n_bins as u16).collect();
    }
    let mut counts = vec![0usize; n_bins];
    for &b in data.bins(feature) {
        if b != UNKNOWN_BIN {
            counts[b as usize] += 1;
        }
    }
    let total: usize = counts.iter().sum::<usize>().max(1);
    let mut before = 0usize;
    let mut raw = Vec::with_capacity(n_bins);
    for c in counts {
        let center = before as f64 + c as f64 / 2.0;
        raw.push(((center * max_bins as f64 / total as f64) as usize).min(max_bins - 1));
        before += c;
    }
    // renumber densely
    let mut map = Vec::with_capacity(n_bins);
    let mut next = 0u16;
    for (k, &g) in raw.iter().enumerate() {
        if k > 0 && g != raw[k - 1] {
            next += 1;
        }
        map.push(next);
    }
    map
}

pub(crate) fn pair_term_cells(
    data: &BinnedDataset,
    interaction_bins: &[Vec<u16>],
    (a, b): (usize, usize),
) -> TermCells {
    let rows = *interaction_bins[a].last().unwrap_or(&0) as usize + 1;
    let cols = *interaction_bins[b].last().unwrap_or(&0) as usize + 1;
    let cells = data
        .bins(a)
        .iter()
        .zip(data.bins(b))
        .map(|(&x, &y)| {
            if x == UNKNOWN_BIN || y == UNKNOWN_BIN {
                NO_CELL
            } else {
                let i = interaction_bins[a][x as usize] as usize;
                let j = interaction_bins[b][y as usize] as usize;
                (i * cols + j) as u32
            }
        })
        .collect();
    TermCells {
        cells,
        n_cells: rows * cols,
        layout: Layout::Grid(rows, cols),
    }
}

/// Shift every term to zero mean over the rows of `data`; shifts go into the intercept.
fn center_terms(model: &mut AdditiveModel, data: &BinnedDataset) {
    for term in &mut model.main_terms {
        let mut counts = vec![0.0; term.values.len()];
        for &b in data.bins(term.feature) {
            if b != UNKNOWN_BIN {
                counts[b as usize] += 1.0;
            }
        }
        let mean = weighted_mean(&term.values, &counts);
        term.values.iter_mut().for_each(|v| *v -= mean);
        model.intercept += mean;
    }
    let bins = model.interaction_bins.clone();
    for term in &mut model.pair_terms {
        let cells = pair_term_cells(data, &bins, term.features);
        let mut counts = vec![0.0; term.values.len()];
        for &c in &cells.cells {
            if c != NO_CELL {
                counts[c as usize] += 1.0;
            }
        }
        let mean = weighted_mean(&term.values, &counts);
        term.values.iter_mut().for_each(|v| *v -= mean);
        model.intercept += mean;
    }
}

fn weighted_mean(values: &[f64], counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    values.iter().zip(counts).map(|(v, c)| v * c).sum::<f64>() / total
}
