//! Explainable boosting machines with cross-feature selection front-ends.
//!
//! The crate is organised bottom-up:
//!
//! * [`data`] loads CSV files, preprocesses them, splits and bins them.
//! * [`trees`] grows random forests, gradient-boosted trees and boosted stumps and
//!   derives MDI, gain, TreeSHAP and permutation importances from them.
//! * [`ebm`] fits additive models with pairwise interactions by cyclic boosting.
//! * [`selectors`] puts the nine first-stage feature selectors behind one trait and a
//!   name-keyed registry.
//! * [`ensemble`] chains selectors and the additive model into the three pipelines.
//! * [`diagnostics`] audits term importances for single-feature dominance and
//!   spurious interactions.
//! * [`bench`] evaluates models, runs the benchmark matrix and renders reports.

pub mod bench;
pub mod data;
pub mod diagnostics;
pub mod ebm;
pub mod ensemble;
mod error;
pub mod selectors;
pub mod trees;

pub use error::{Error, Result};

/// Numerically safe logistic function.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
