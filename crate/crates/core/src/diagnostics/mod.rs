//! Audits over term-importance lists: single-feature dominance among the top
//! interactions and spurious pairs built on a low-importance feature.

mod import;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ebm::{Term, TermImportance};
use crate::{Error, Result};

pub use import::{load_importances, ExternalTerm, ExternalTermKind};

/// Number of interaction terms examined for dominance.
pub const TOP_PAIRS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPair {
    pub name: String,
    pub features: (String, String),
    pub importance: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    pub feature: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub top_pairs: Vec<RankedPair>,
    /// Sorted by count descending, then by first appearance.
    pub occurrences: Vec<Occurrence>,
    pub flagged: Vec<String>,
    pub summary: String,
}

impl DominanceReport {
    pub fn max_occurrence(&self) -> usize {
        self.occurrences.iter().map(|o| o.count).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpuriousFlag {
    pub pair: String,
    pub noisy_feature: String,
    pub importance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpuriousReport {
    pub noisy_set: Vec<String>,
    /// Importance at or above which a term is in the top decile.
    pub top_decile_threshold: f64,
    pub flags: Vec<SpuriousFlag>,
    pub count: usize,
}

/// Order terms by descending importance, ties by term identity.
fn by_importance<'a>(terms: impl Iterator<Item = &'a TermImportance>) -> Vec<&'a TermImportance> {
    let mut v: Vec<&TermImportance> = terms.collect();
    v.sort_by(|a, b| {
        b.importance
            .total_cmp(&a.importance)
            .then(a.term.cmp(&b.term))
    });
    v
}

fn pair_names(t: &TermImportance) -> (String, String) {
    match t.features.as_slice() {
        [a, b] => (a.clone(), b.clone()),
        _ => match t.name.split_once(" x ") {
            Some((a, b)) => (a.to_string(), b.to_string()),
            None => (t.name.clone(), String::new()),
        },
    }
}

/// Count how often each feature appears among the five most important pairs.
/// Pairs with zero importance carry no signal and are skipped.
pub fn dominance_report(importance: &[TermImportance]) -> DominanceReport {
    let top: Vec<RankedPair> = by_importance(
        importance
            .iter()
            .filter(|t| t.term.is_pair() && t.importance > 0.0),
    )
    .into_iter()
    .take(TOP_PAIRS)
    .map(|t| RankedPair {
        name: t.name.clone(),
        features: pair_names(t),
        importance: t.importance,
    })
    .collect();

    let mut occurrences: Vec<Occurrence> = Vec::new();
    for p in &top {
        for f in [&p.features.0, &p.features.1] {
            match occurrences.iter_mut().find(|o| &o.feature == f) {
                Some(o) => o.count += 1,
                None => occurrences.push(Occurrence {
                    feature: f.clone(),
                    count: 1,
                }),
            }
        }
    }
    // stable: first appearance breaks ties
    occurrences.sort_by_key(|o| std::cmp::Reverse(o.count));
    let flagged: Vec<String> = occurrences
        .iter()
        .filter(|o| o.count > 1)
        .map(|o| o.feature.clone())
        .collect();

    let mut groups: BTreeMap<std::cmp::Reverse<usize>, usize> = BTreeMap::new();
    for o in occurrences.iter().filter(|o| o.count > 1) {
        *groups.entry(std::cmp::Reverse(o.count)).or_default() += 1;
    }
    let summary = groups
        .iter()
        .map(|(c, n)| format!("{n} feature x {} Occurrence", c.0))
        .collect::<Vec<_>>()
        .join(", ");

    DominanceReport {
        top_pairs: top,
        occurrences,
        flagged,
        summary,
    }
}

/// 1-based nearest-rank position of the `q` quantile among `n` sorted values.
pub fn nearest_rank(q: f64, n: usize) -> usize {
    ((q * n as f64).ceil() as usize).clamp(1, n.max(1))
}

/// Flag top-decile pairs that contain a bottom-decile main effect.
///
/// The noisy set is the `max(1, ceil(0.1 n))` weakest mains (ties by term
/// order). The top decile spans all terms and starts at the nearest-rank 90th
/// percentile.
pub fn spurious_report(importance: &[TermImportance]) -> Result<SpuriousReport> {
    let mut mains: Vec<&TermImportance> = importance
        .iter()
        .filter(|t| matches!(t.term, Term::Main(_)))
        .collect();
    let main_names: Vec<&str> = mains.iter().map(|t| main_name(t)).collect();
    for t in importance.iter().filter(|t| t.term.is_pair()) {
        let (a, b) = pair_names(t);
        for f in [a, b] {
            if !main_names.contains(&f.as_str()) {
                return Err(Error::UnhousedMainEffect(f));
            }
        }
    }

    mains.sort_by(|a, b| {
        a.importance
            .total_cmp(&b.importance)
            .then(a.term.cmp(&b.term))
    });
    let k = if mains.is_empty() {
        0
    } else {
        nearest_rank(0.1, mains.len())
    };
    let noisy_set: Vec<String> = mains[..k]
        .iter()
        .map(|t| main_name(t).to_string())
        .collect();

    let mut all: Vec<f64> = importance.iter().map(|t| t.importance).collect();
    all.sort_by(f64::total_cmp);
    let threshold = if all.is_empty() {
        f64::INFINITY
    } else {
        all[nearest_rank(0.9, all.len()) - 1]
    };

    let mut flags = Vec::new();
    for t in by_importance(importance.iter().filter(|t| t.term.is_pair())) {
        if t.importance < threshold || t.importance <= 0.0 {
            continue;
        }
        let (a, b) = pair_names(t);
        for f in [a, b] {
            if noisy_set.contains(&f) {
                flags.push(SpuriousFlag {
                    pair: t.name.clone(),
                    noisy_feature: f,
                    importance: t.importance,
                });
            }
        }
    }
    Ok(SpuriousReport {
        noisy_set,
        top_decile_threshold: threshold,
        count: flags.len(),
        flags,
    })
}

fn main_name(t: &TermImportance) -> &str {
    t.features.first().map(String::as_str).unwrap_or(&t.name)
}
