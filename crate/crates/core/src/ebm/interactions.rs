use serde::{Deserialize, Serialize};

use super::boost::{histogram, Stat};
use super::fit::pair_term_cells;
use super::model::AdditiveModel;
use crate::data::BinnedDataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub pair: (usize, usize),
    /// Loss reduction of the best four-quadrant cut on the residual gradients.
    pub score: f64,
}

/// Rank every feature pair by how much a single axis-aligned 2D cut reduces the
/// loss of `model` on `data`, keeping the best `top_k`.
pub fn detect_interactions(
    model: &AdditiveModel,
    data: &BinnedDataset,
    top_k: usize,
) -> Vec<PairScore> {
    let active: Vec<usize> = (0..data.n_features())
        .filter(|&f| data.n_bins(f) >= 2)
        .collect();
    let candidates: Vec<(usize, usize)> = active
        .iter()
        .enumerate()
        .flat_map(|(k, &a)| active[k + 1..].iter().map(move |&b| (a, b)))
        .collect();
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    let scores = model.predict_raw_binned(data);
    rank_pairs(
        data,
        &rows,
        &scores,
        &model.interaction_bins,
        &candidates,
        top_k,
        1.0,
    )
}

pub(crate) fn rank_pairs(
    data: &BinnedDataset,
    rows: &[usize],
    scores: &[f64],
    interaction_bins: &[Vec<u16>],
    candidates: &[(usize, usize)],
    top_k: usize,
    min_leaf: f64,
) -> Vec<PairScore> {
    if top_k == 0 {
        return Vec::new();
    }
    let mut ranked: Vec<PairScore> = candidates
        .iter()
        .filter_map(|&pair| {
            let cells = pair_term_cells(data, interaction_bins, pair);
            let super::boost::Layout::Grid(r, c) = cells.layout else {
                return None;
            };
            let hist = histogram(&cells, rows, data.target(), scores);
            let score = best_quadrant_gain(&hist, r, c, min_leaf);
            (score > 0.0).then_some(PairScore { pair, score })
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.pair.cmp(&b.pair)));
    ranked.truncate(top_k);
    ranked
}

/// Best gain over all cuts `(i, j)` splitting the grid into four quadrants.
pub(crate) fn best_quadrant_gain(hist: &[Stat], rows: usize, cols: usize, min_leaf: f64) -> f64 {
    if rows < 2 || cols < 2 {
        return 0.0;
    }
    // cumulative[(i + 1) * (cols + 1) + (j + 1)] = sum over cells [0..=i] x [0..=j]
    let w = cols + 1;
    let mut cum = vec![Stat::default(); (rows + 1) * w];
    for i in 0..rows {
        for j in 0..cols {
            let mut s = hist[i * cols + j];
            s.add(cum[i * w + j + 1]);
            s.add(cum[(i + 1) * w + j]);
            s = s.minus(cum[i * w + j]);
            cum[(i + 1) * w + j + 1] = s;
        }
    }
    let total = cum[rows * w + cols];
    let base = total.score();
    let mut best = 0.0;
    for i in 0..rows - 1 {
        let top = cum[(i + 1) * w + cols];
        for j in 0..cols - 1 {
            let tl = cum[(i + 1) * w + j + 1];
            let left = cum[rows * w + j + 1];
            let tr = top.minus(tl);
            let bl = left.minus(tl);
            let br = total.minus(top).minus(bl);
            if [tl, tr, bl, br].iter().any(|q| q.n < min_leaf) {
                continue;
            }
            let gain = tl.score() + tr.score() + bl.score() + br.score() - base;
            if gain > best {
                best = gain;
            }
        }
    }
    best
}
