use serde::{Deserialize, Serialize};

use super::model::AdditiveModel;
use crate::data::BinnedDataset;

/// A model term. Ordering puts mains before pairs, then ascending feature ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    Main(usize),
    Pair(usize, usize),
}

impl Term {
    pub fn is_pair(&self) -> bool {
        matches!(self, Term::Pair(..))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermImportance {
    pub term: Term,
    /// `feature` for mains, `a x b` for pairs.
    pub name: String,
    /// Names of the one or two features the term is built on.
    pub features: Vec<String>,
    pub importance: f64,
    pub rank: usize,
}

/// Assign joint ranks in place: descending importance, ties by term order.
pub(crate) fn assign_ranks(list: &mut [TermImportance]) {
    let mut order: Vec<usize> = (0..list.len()).collect();
    order.sort_by(|&a, &b| {
        list[b]
            .importance
            .total_cmp(&list[a].importance)
            .then(list[a].term.cmp(&list[b].term))
    });
    for (rank, &k) in order.iter().enumerate() {
        list[k].rank = rank + 1;
    }
}

/// Mean absolute contribution of every term over the rows of `data`, ranked jointly.
/// Output order is mains then pairs, as stored in the model.
pub fn term_importance(model: &AdditiveModel, data: &BinnedDataset) -> Vec<TermImportance> {
    let n = data.n_rows().max(1) as f64;
    let names = model.feature_names();
    let mut out = Vec::new();
    for t in &model.main_terms {
        let total: f64 = data
            .bins(t.feature)
            .iter()
            .map(|&b| model.main_contribution(t, b).abs())
            .sum();
        out.push(TermImportance {
            term: Term::Main(t.feature),
            name: names[t.feature].clone(),
            features: vec![names[t.feature].clone()],
            importance: total / n,
            rank: 0,
        });
    }
    for p in &model.pair_terms {
        let (a, b) = p.features;
        let total: f64 = data
            .bins(a)
            .iter()
            .zip(data.bins(b))
            .map(|(&x, &y)| model.pair_contribution(p, x, y).abs())
            .sum();
        out.push(TermImportance {
            term: Term::Pair(a, b),
            name: format!("{} x {}", names[a], names[b]),
            features: vec![names[a].clone(), names[b].clone()],
            importance: total / n,
            rank: 0,
        });
    }
    assign_ranks(&mut out);
    out
}

/// Importances rescaled to sum to one (unchanged when all are zero).
pub fn normalized(list: &[TermImportance]) -> Vec<TermImportance> {
    let total: f64 = list.iter().map(|t| t.importance).sum();
    list.iter()
        .cloned()
        .map(|mut t| {
            if total > 0.0 {
                t.importance /= total;
            }
            t
        })
        .collect()
}
