//! Cyclic Newton boosting of lookup-table terms, shared by main effects and pairs.

use super::fit::EbmParams;
use crate::logistic;

pub(crate) const NO_CELL: u32 = u32::MAX;
const HESSIAN_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Layout {
    Line,
    Grid(usize, usize),
}

/// One term's view of the data: the lookup cell of every row.
pub(crate) struct TermCells {
    pub cells: Vec<u32>,
    pub n_cells: usize,
    pub layout: Layout,
}

#[derive(Clone, Copy, Default)]
pub(crate) struct Stat {
    pub g: f64,
    pub h: f64,
    pub n: f64,
}

impl Stat {
    pub fn add(&mut self, o: Stat) {
        self.g += o.g;
        self.h += o.h;
        self.n += o.n;
    }

    pub fn minus(self, o: Stat) -> Stat {
        Stat {
            g: self.g - o.g,
            h: self.h - o.h,
            n: self.n - o.n,
        }
    }

    /// `G² / H`, twice the Newton loss reduction of fitting this node's value.
    pub fn score(self) -> f64 {
        self.g * self.g / self.h.max(HESSIAN_FLOOR)
    }

    pub fn value(self) -> f64 {
        -self.g / self.h.max(HESSIAN_FLOOR)
    }
}

/// Gradient/hessian histogram of a term over `rows`.
pub(crate) fn histogram(
    term: &TermCells,
    rows: &[usize],
    target: &[u8],
    scores: &[f64],
) -> Vec<Stat> {
    let mut hist = vec![Stat::default(); term.n_cells];
    for &r in rows {
        let c = term.cells[r];
        if c == NO_CELL {
            continue;
        }
        let p = logistic(scores[r]);
        let s = &mut hist[c as usize];
        s.g += p - target[r] as f64;
        s.h += p * (1.0 - p);
        s.n += 1.0;
    }
    hist
}

pub(crate) fn log_loss(rows: &[usize], target: &[u8], scores: &[f64]) -> f64 {
    let total: f64 = rows
        .iter()
        .map(|&r| {
            // log(1 + e^{-s}) for y = 1, log(1 + e^{s}) for y = 0
            let s = if target[r] == 1 {
                -scores[r]
            } else {
                scores[r]
            };
            if s > 0.0 {
                s + (-s).exp().ln_1p()
            } else {
                s.exp().ln_1p()
            }
        })
        .sum();
    total / rows.len().max(1) as f64
}

/// Best single cut of the contiguous range `[lo, hi)`: `(last bin of the left part, gain)`.
fn best_cut(prefix: &[Stat], lo: usize, hi: usize, min_leaf: f64) -> Option<(usize, f64)> {
    let total = prefix[hi].minus(prefix[lo]);
    let base = total.score();
    let mut best: Option<(usize, f64)> = None;
    for c in lo..hi - 1 {
        let left = prefix[c + 1].minus(prefix[lo]);
        let right = total.minus(left);
        if left.n < min_leaf || right.n < min_leaf {
            continue;
        }
        let gain = left.score() + right.score() - base;
        if gain > 1e-12 && best.is_none_or(|(_, g)| gain > g) {
            best = Some((c, gain));
        }
    }
    best
}

fn prefix_sums(hist: &[Stat]) -> Vec<Stat> {
    let mut prefix = Vec::with_capacity(hist.len() + 1);
    let mut acc = Stat::default();
    prefix.push(acc);
    for s in hist {
        acc.add(*s);
        prefix.push(acc);
    }
    prefix
}

/// Piecewise-constant update with at most `max_leaves` contiguous leaves, grown
/// best-first. `None` when no cut is worth making.
pub(crate) fn fit_line(hist: &[Stat], max_leaves: usize, min_leaf: f64) -> Option<Vec<f64>> {
    let n = hist.len();
    if n < 2 || max_leaves < 2 {
        return None;
    }
    let prefix = prefix_sums(hist);
    let mut leaves = vec![(0usize, n)];
    while leaves.len() < max_leaves {
        let mut best: Option<(usize, usize, f64)> = None;
        for (k, &(lo, hi)) in leaves.iter().enumerate() {
            if let Some((c, gain)) = best_cut(&prefix, lo, hi, min_leaf) {
                if best.is_none_or(|(_, _, g)| gain > g) {
                    best = Some((k, c, gain));
                }
            }
        }
        let Some((k, c, _)) = best else { break };
        let (lo, hi) = leaves[k];
        leaves[k] = (lo, c + 1);
        leaves.insert(k + 1, (c + 1, hi));
    }
    if leaves.len() < 2 {
        return None;
    }
    let mut out = vec![0.0; n];
    for (lo, hi) in leaves {
        let v = prefix[hi].minus(prefix[lo]).value();
        out[lo..hi].fill(v);
    }
    Some(out)
}

/// Two-level tree on a grid: one cut along a primary axis, then an independent cut
/// along the other axis on each side (up to four leaves).
pub(crate) fn fit_grid(hist: &[Stat], rows: usize, cols: usize, min_leaf: f64) -> Option<Vec<f64>> {
    struct Plan {
        transposed: bool,
        cut: usize,
        side_cuts: [Option<usize>; 2],
        score: f64,
    }
    let mut best: Option<Plan> = None;
    for transposed in [false, true] {
        let (n1, n2) = if transposed {
            (cols, rows)
        } else {
            (rows, cols)
        };
        if n1 < 2 {
            continue;
        }
        let at = |a: usize, b: usize| -> Stat {
            if transposed {
                hist[b * cols + a]
            } else {
                hist[a * cols + b]
            }
        };
        let mut column_total = vec![Stat::default(); n2];
        for a in 0..n1 {
            for (b, t) in column_total.iter_mut().enumerate() {
                t.add(at(a, b));
            }
        }
        let mut lower = vec![Stat::default(); n2];
        for cut in 0..n1 - 1 {
            for (b, l) in lower.iter_mut().enumerate() {
                l.add(at(cut, b));
            }
            let upper: Vec<Stat> = column_total
                .iter()
                .zip(&lower)
                .map(|(t, l)| t.minus(*l))
                .collect();
            let mut score = 0.0;
            let mut side_cuts = [None, None];
            let mut valid = true;
            for (side, profile) in [&lower, &upper].into_iter().enumerate() {
                let prefix = prefix_sums(profile);
                let total = prefix[n2];
                if total.n < min_leaf {
                    valid = false;
                    break;
                }
                score += total.score();
                if let Some((c, gain)) = best_cut(&prefix, 0, n2, min_leaf) {
                    score += gain;
                    side_cuts[side] = Some(c);
                }
            }
            if valid && best.as_ref().is_none_or(|p| score > p.score) {
                best = Some(Plan {
                    transposed,
                    cut,
                    side_cuts,
                    score,
                });
            }
        }
    }
    let plan = best?;
    let total: Stat = hist.iter().fold(Stat::default(), |mut a, s| {
        a.add(*s);
        a
    });
    if plan.score - total.score() <= 1e-12 {
        return None;
    }
    let (n1, n2) = if plan.transposed {
        (cols, rows)
    } else {
        (rows, cols)
    };
    let index = |a: usize, b: usize| {
        if plan.transposed {
            b * cols + a
        } else {
            a * cols + b
        }
    };
    let mut out = vec![0.0; hist.len()];
    for (side, range) in [(0, 0..plan.cut + 1), (1, plan.cut + 1..n1)] {
        let leaf_ranges = match plan.side_cuts[side] {
            Some(c) => [Some(0..c + 1), Some(c + 1..n2)],
            None => [Some(0..n2), None],
        };
        for leaf in leaf_ranges.into_iter().flatten() {
            let mut s = Stat::default();
            for a in range.clone() {
                for b in leaf.clone() {
                    s.add(hist[index(a, b)]);
                }
            }
            let v = s.value();
            for a in range.clone() {
                for b in leaf.clone() {
                    out[index(a, b)] = v;
                }
            }
        }
    }
    Some(out)
}

pub(crate) struct BoostOutcome {
    pub values: Vec<Vec<f64>>,
    pub rounds: usize,
}

/// Round-robin boosting of `terms` starting from `scores` (updated in place to the
/// returned state). Keeps the term values from the round with the best validation
/// log-loss when a validation set is present.
pub(crate) fn boost_terms(
    terms: &[TermCells],
    target: &[u8],
    train: &[usize],
    validation: &[usize],
    scores: &mut [f64],
    params: &EbmParams,
) -> BoostOutcome {
    let start = scores.to_vec();
    let mut values: Vec<Vec<f64>> = terms.iter().map(|t| vec![0.0; t.n_cells]).collect();
    let mut best_values = values.clone();
    let mut best_loss = log_loss(validation, target, scores);
    let mut best_round = 0;
    let min_leaf = params.min_samples_leaf.max(1) as f64;
    let mut rounds = 0;
    for round in 1..=params.outer_rounds {
        rounds = round;
        let mut changed = false;
        for (term, vals) in terms.iter().zip(values.iter_mut()) {
            let hist = histogram(term, train, target, scores);
            let update = match term.layout {
                Layout::Line => fit_line(&hist, params.inner_tree_leaves, min_leaf),
                Layout::Grid(r, c) => fit_grid(&hist, r, c, min_leaf),
            };
            let Some(update) = update else { continue };
            changed = true;
            let step: Vec<f64> = update.iter().map(|u| params.learning_rate * u).collect();
            for (v, s) in vals.iter_mut().zip(&step) {
                *v += s;
            }
            for (score, &c) in scores.iter_mut().zip(&term.cells) {
                if c != NO_CELL {
                    *score += step[c as usize];
                }
            }
        }
        if validation.is_empty() {
            if !changed {
                break;
            }
            continue;
        }
        let loss = log_loss(validation, target, scores);
        if loss < best_loss - params.early_stop_tolerance {
            best_loss = loss;
            best_values.clone_from(&values);
            best_round = round;
        } else if round - best_round >= params.early_stop_patience || !changed {
            break;
        }
    }
    if validation.is_empty() {
        best_values = values;
    }
    scores.copy_from_slice(&start);
    for (term, vals) in terms.iter().zip(&best_values) {
        for (score, &c) in scores.iter_mut().zip(&term.cells) {
            if c != NO_CELL {
                *score += vals[c as usize];
            }
        }
    }
    BoostOutcome {
        values: best_values,
        rounds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stat(g: f64, h: f64) -> Stat {
        Stat { g, h, n: 10.0 }
    }

    #[test]
    fn line_learner_uses_at_most_three_leaves() {
        let hist = vec![
            stat(-5.0, 1.0),
            stat(-5.0, 1.0),
            stat(0.0, 1.0),
            stat(5.0, 1.0),
            stat(5.0, 1.0),
        ];
        let out = fit_line(&hist, 3, 1.0).unwrap();
        let mut distinct = out.clone();
        distinct.dedup();
        assert!(distinct.len() <= 3);
        assert!(out[0] > 0.0 && out[4] < 0.0);
        assert_eq!(out[0], out[1]);
    }

    #[test]
    fn flat_gradients_give_no_update() {
        let hist = vec![stat(1.0, 1.0); 4];
        assert!(fit_line(&hist, 3, 1.0).is_none());
    }

    #[test]
    fn grid_learner_recovers_checkerboard() {
        // 2x2 XOR pattern of gradients
        let hist = vec![
            stat(-4.0, 1.0),
            stat(4.0, 1.0),
            stat(4.0, 1.0),
            stat(-4.0, 1.0),
        ];
        let out = fit_grid(&hist, 2, 2, 1.0).unwrap();
        assert!(out[0] > 0.0 && out[3] > 0.0);
        assert!(out[1] < 0.0 && out[2] < 0.0);
    }
}
