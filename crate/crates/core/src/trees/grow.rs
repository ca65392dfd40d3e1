use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

use super::{Tree, TreeNode};
use crate::data::{BinnedDataset, UNKNOWN_BIN};

#[derive(Debug, Clone, Copy)]
pub(crate) enum Criterion {
    /// Weighted Gini impurity on `(a, b) = (Σ w·y, Σ w)`.
    Gini,
    /// Second-order loss reduction on `(a, b) = (Σ g, Σ h)`.
    Newton { lambda: f64, min_child_weight: f64 },
}

impl Criterion {
    fn leaf_value(self, a: f64, b: f64) -> f64 {
        match self {
            Criterion::Gini => {
                if b > 0.0 {
                    a / b
                } else {
                    0.0
                }
            }
            Criterion::Newton { lambda, .. } => -a / (b + lambda).max(1e-12),
        }
    }

    /// Loss-like quantity whose decrease is the split gain.
    fn impurity(self, a: f64, b: f64) -> f64 {
        match self {
            Criterion::Gini => {
                if b > 0.0 {
                    (2.0 * a * (b - a) / b).max(0.0)
                } else {
                    0.0
                }
            }
            Criterion::Newton { lambda, .. } => -0.5 * a * a / (b + lambda).max(1e-12),
        }
    }
}

/// Per-row sufficient statistics; `c` is the cover contribution (row multiplicity).
pub(crate) struct RowStats {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

pub(crate) struct GrowConfig {
    pub criterion: Criterion,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub max_features: usize,
}

#[derive(Clone, Copy, Default)]
struct Acc {
    a: f64,
    b: f64,
    c: f64,
}

impl Acc {
    fn add(&mut self, stats: &RowStats, r: usize) {
        self.a += stats.a[r];
        self.b += stats.b[r];
        self.c += stats.c[r];
    }

    fn minus(self, o: Acc) -> Acc {
        Acc {
            a: self.a - o.a,
            b: self.b - o.b,
            c: self.c - o.c,
        }
    }
}

struct Grower<'a> {
    data: &'a BinnedDataset,
    stats: &'a RowStats,
    cfg: &'a GrowConfig,
    rng: &'a mut ChaCha8Rng,
    nodes: Vec<TreeNode>,
}

/// Grow one depth-first tree on `rows`.
pub(crate) fn grow_tree(
    data: &BinnedDataset,
    rows: Vec<usize>,
    stats: &RowStats,
    cfg: &GrowConfig,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let mut g = Grower {
        data,
        stats,
        cfg,
        rng,
        nodes: Vec::new(),
    };
    g.build(rows, 0);
    Tree { nodes: g.nodes }
}

impl Grower<'_> {
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let mut total = Acc::default();
        for &r in &rows {
            total.add(self.stats, r);
        }
        let crit = self.cfg.criterion;
        let id = self.nodes.len();
        self.nodes
            .push(TreeNode::leaf(crit.leaf_value(total.a, total.b), total.c));

        if depth >= self.cfg.max_depth
            || total.c < 2.0 * self.cfg.min_samples_leaf.max(1) as f64
            || (matches!(crit, Criterion::Gini) && crit.impurity(total.a, total.b) <= 0.0)
        {
            return id;
        }
        let Some((feature, bin, gain)) = self.best_split(&rows, total) else {
            return id;
        };
        let col = self.data.bins(feature);
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| col[r] != UNKNOWN_BIN && col[r] <= bin);
        let l = self.build(left, depth + 1);
        let r = self.build(right, depth + 1);
        let node = &mut self.nodes[id];
        node.split_feature = Some(feature);
        node.split_bin = bin;
        node.left = Some(l);
        node.right = Some(r);
        node.gain = gain;
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let m = self.data.n_features();
        let k = self.cfg.max_features.clamp(1, m.max(1));
        if k >= m {
            return (0..m).collect();
        }
        let mut picked = sample(self.rng, m, k).into_vec();
        picked.sort_unstable();
        picked
    }

    fn best_split(&mut self, rows: &[usize], total: Acc) -> Option<(usize, u16, f64)> {
        let crit = self.cfg.criterion;
        let parent = crit.impurity(total.a, total.b);
        let min_leaf = self.cfg.min_samples_leaf.max(1) as f64;
        let min_hess = match crit {
            Criterion::Newton {
                min_child_weight, ..
            } => min_child_weight,
            Criterion::Gini => f64::NEG_INFINITY,
        };
        let threshold = 1e-12 * total.b.abs().max(1e-300);
        let mut best: Option<(usize, u16, f64)> = None;
        for f in self.candidate_features() {
            let n_bins = self.data.n_bins(f);
            if n_bins < 2 {
                continue;
            }
            let col = self.data.bins(f);
            let mut hist = vec![Acc::default(); n_bins];
            for &r in rows {
                let b = col[r];
                if b != UNKNOWN_BIN {
                    hist[b as usize].add(self.stats, r);
                }
            }
            let mut left = Acc::default();
            for (t, h) in hist.iter().enumerate().take(n_bins - 1) {
                left.a += h.a;
                left.b += h.b;
                left.c += h.c;
                if h.c == 0.0 && t > 0 {
                    // same partition as the previous threshold
                    continue;
                }
                let right = total.minus(left);
                if left.c < min_leaf
                    || right.c < min_leaf
                    || left.b < min_hess
                    || right.b < min_hess
                {
                    continue;
                }
                let gain = parent - crit.impurity(left.a, left.b) - crit.impurity(right.a, right.b);
                if gain > threshold && best.is_none_or(|(_, _, g)| gain > g) {
                    best = Some((f, t as u16, gain));
                }
            }
        }
        best
    }
}
