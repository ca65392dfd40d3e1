use serde::{Deserialize, Serialize};

use super::Term;
use crate::data::{BinSchema, BinnedDataset, Dataset, UNKNOWN_BIN};
use crate::{logistic, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    #[default]
    Logit,
}

/// Shape function of one feature: one additive value per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainTerm {
    pub feature: usize,
    pub values: Vec<f64>,
}

/// Pairwise grid over the interaction bins of two features, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTerm {
    pub features: (usize, usize),
    pub shape: (usize, usize),
    pub values: Vec<f64>,
}

impl PairTerm {
    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.shape.1 + b]
    }
}

/// Fitted additive model. Feature indices inside terms refer to `schema`; the
/// `feature_ids` map them back to the columns of the table the pipeline started from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveModel {
    pub intercept: f64,
    pub link: Link,
    pub schema: BinSchema,
    pub feature_ids: Vec<usize>,
    /// Per feature, main bin -> interaction bin.
    pub interaction_bins: Vec<Vec<u16>>,
    pub main_terms: Vec<MainTerm>,
    pub pair_terms: Vec<PairTerm>,
}

/// Per-term decomposition of one row's raw score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub intercept: f64,
    pub contributions: Vec<(Term, f64)>,
}

impl Explanation {
    pub fn raw_score(&self) -> f64 {
        self.intercept + self.contributions.iter().map(|(_, c)| c).sum::<f64>()
    }
}

impl AdditiveModel {
    pub fn intercept_only(intercept: f64, schema: BinSchema) -> Self {
        let n = schema.n_features();
        AdditiveModel {
            intercept,
            link: Link::Logit,
            interaction_bins: schema
                .features
                .iter()
                .map(|f| (0..f.n_bins as u16).collect())
                .collect(),
            schema,
            feature_ids: (0..n).collect(),
            main_terms: Vec::new(),
            pair_terms: Vec::new(),
        }
    }

    pub fn with_feature_ids(mut self, ids: Vec<usize>) -> Self {
        assert_eq!(ids.len(), self.schema.n_features());
        self.feature_ids = ids;
        self
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.schema.names().map(str::to_string).collect()
    }

    pub fn terms(&self) -> Vec<Term> {
        self.main_terms
            .iter()
            .map(|t| Term::Main(t.feature))
            .chain(
                self.pair_terms
                    .iter()
                    .map(|p| Term::Pair(p.features.0, p.features.1)),
            )
            .collect()
    }

    pub fn term_name(&self, term: Term) -> String {
        let names = &self.schema.features;
        match term {
            Term::Main(f) => names[f].name.clone(),
            Term::Pair(a, b) => format!("{} x {}", names[a].name, names[b].name),
        }
    }

    pub(crate) fn main_contribution(&self, term: &MainTerm, bin: u16) -> f64 {
        if bin == UNKNOWN_BIN {
            0.0
        } else {
            term.values[bin as usize]
        }
    }

    pub(crate) fn pair_contribution(&self, term: &PairTerm, a: u16, b: u16) -> f64 {
        if a == UNKNOWN_BIN || b == UNKNOWN_BIN {
            return 0.0;
        }
        let (fa, fb) = term.features;
        let ia = self.interaction_bins[fa][a as usize] as usize;
        let ib = self.interaction_bins[fb][b as usize] as usize;
        term.at(ia, ib)
    }

    /// Contribution of every term for one row, given that row's bins.
    pub fn explain_bins(&self, bins: &[u16]) -> Explanation {
        let mut contributions = Vec::with_capacity(self.main_terms.len() + self.pair_terms.len());
        for t in &self.main_terms {
            contributions.push((
                Term::Main(t.feature),
                self.main_contribution(t, bins[t.feature]),
            ));
        }
        for p in &self.pair_terms {
            let (a, b) = p.features;
            contributions.push((
                Term::Pair(a, b),
                self.pair_contribution(p, bins[a], bins[b]),
            ));
        }
        Explanation {
            intercept: self.intercept,
            contributions,
        }
    }

    /// Raw (logit) scores for binned rows.
    pub fn predict_raw_binned(&self, data: &BinnedDataset) -> Vec<f64> {
        let mut raw = vec![self.intercept; data.n_rows()];
        for t in &self.main_terms {
            for (r, &b) in raw.iter_mut().zip(data.bins(t.feature)) {
                *r += self.main_contribution(t, b);
            }
        }
        for p in &self.pair_terms {
            let (fa, fb) = p.features;
            for ((r, &a), &b) in raw.iter_mut().zip(data.bins(fa)).zip(data.bins(fb)) {
                *r += self.pair_contribution(p, a, b);
            }
        }
        raw
    }

    pub fn predict_proba_binned(&self, data: &BinnedDataset) -> Vec<f64> {
        self.predict_raw_binned(data)
            .into_iter()
            .map(logistic)
            .collect()
    }

    /// Bin a table with this model's schema (columns matched by name).
    pub fn bin(&self, rows: &Dataset) -> Result<BinnedDataset> {
        self.schema.transform(rows)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Probabilities for the rows of `rows`.
pub fn predict(model: &AdditiveModel, rows: &Dataset) -> Result<Vec<f64>> {
    Ok(model.predict_proba_binned(&model.bin(rows)?))
}

/// Intercept plus one signed contribution per term for row `row` of `rows`.
pub fn explain_row(model: &AdditiveModel, rows: &BinnedDataset, row: usize) -> Explanation {
    model.explain_bins(&rows.row(row))
}
