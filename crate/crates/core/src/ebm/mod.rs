//! Explainable boosting machine: a logit-link additive model with per-feature
//! lookup tables and pairwise grids, fitted by cyclic one-term-at-a-time boosting.

mod boost;
mod fit;
mod importance;
mod interactions;
mod model;

pub use fit::{fit_ebm, fit_ebm_with, EbmParams};
pub(crate) use importance::assign_ranks;
pub use importance::{normalized, term_importance, Term, TermImportance};
pub use interactions::{detect_interactions, PairScore};
pub use model::{explain_row, predict, AdditiveModel, Explanation, Link, MainTerm, PairTerm};
