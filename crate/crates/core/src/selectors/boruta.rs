use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Binomial, DiscreteCDF};

use super::{Selection, Selector, SelectorConfig};
use crate::data::{bin, Dataset, FeatureBins};
use crate::trees::{fit_ensemble, impurity_importance, EnsembleMode, FeatureScore, ImportanceKind};
use crate::{Error, Result};

/// Two-sided binomial test of `hits` successes in `trials` at probability 1/2.
pub fn binomial_two_sided_p(hits: usize, trials: usize) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    let dist = Binomial::new(0.5, trials as u64).expect("p = 0.5 is valid");
    let lower = dist.cdf(hits as u64);
    let upper = if hits == 0 {
        1.0
    } else {
        dist.sf(hits as u64 - 1)
    };
    (2.0 * lower.min(upper)).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Tentative,
    Confirmed,
    Rejected,
}

/// Shadow-feature wrapper around the random forest.
///
/// Every iteration appends a shuffled copy of each still-open feature, fits a
/// forest and counts a hit when the real feature's MDI beats the best shadow.
/// Features are settled by a two-sided binomial test; rejected ones leave the
/// forest. The loop ends once nothing is tentative or the budget runs out.
pub struct BorutaSelector;

impl Selector for BorutaSelector {
    fn name(&self) -> &str {
        "boruta"
    }

    fn select(&self, train: &Dataset, config: &SelectorConfig) -> Result<Selection> {
        let budget = config.boruta.max_iterations;
        if budget == 0 {
            return Err(Error::NoIterations);
        }
        let data = bin(train, config.max_bins)?;
        let m = data.n_features();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut status = vec![Status::Tentative; m];
        let mut hits = vec![0usize; m];
        let mut trials = vec![0usize; m];
        let params = config
            .random_forest
            .clone()
            .with_trees(config.boruta.n_trees);
        let mut done = 0;
        for iter in 0..budget {
            let live: Vec<usize> = (0..m).filter(|&f| status[f] != Status::Rejected).collect();
            let base = data.select_features(&live);
            let shadows: Vec<(FeatureBins, Vec<u16>)> = live
                .iter()
                .map(|&f| {
                    let mut fb = data.schema().features[f].clone();
                    fb.name = format!("shadow_{}", fb.name);
                    let mut col = data.bins(f).to_vec();
                    col.shuffle(&mut rng);
                    (fb, col)
                })
                .collect();
            let augmented = base.with_appended(shadows);
            let ens = fit_ensemble(
                &augmented,
                EnsembleMode::RandomForest,
                &params
                    .clone()
                    .with_seed(config.seed.wrapping_add(iter as u64)),
            )?;
            let mdi = impurity_importance(&ens, ImportanceKind::Mdi);
            let k = live.len();
            let best_shadow = mdi[k..].iter().map(|s| s.score).fold(0.0, f64::max);
            for (pos, &f) in live.iter().enumerate() {
                trials[f] += 1;
                if mdi[pos].score > best_shadow {
                    hits[f] += 1;
                }
            }
            done = iter + 1;
            for f in 0..m {
                if status[f] != Status::Tentative {
                    continue;
                }
                let p = binomial_two_sided_p(hits[f], trials[f]);
                if p < config.boruta.p_value {
                    status[f] = if 2 * hits[f] > trials[f] {
                        Status::Confirmed
                    } else {
                        Status::Rejected
                    };
                }
            }
            if status.iter().all(|&s| s != Status::Tentative) {
                break;
            }
        }
        log::debug!(
            "boruta settled after {done} iterations: {} confirmed, {} rejected",
            status.iter().filter(|&&s| s == Status::Confirmed).count(),
            status.iter().filter(|&&s| s == Status::Rejected).count()
        );
        // a rejected feature stops accruing trials, so its fraction uses its own count
        let raw: Vec<f64> = (0..m).map(|f| hits[f] as f64 / trials[f] as f64).collect();
        let scores: Vec<FeatureScore> = crate::trees::rank_scores(&raw);
        let keep = (0..m).filter(|&f| status[f] != Status::Rejected).collect();
        Ok(Selection::ordered(scores, keep))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom_pmf(k: usize, n: usize) -> f64 {
        let mut c = 1.0f64;
        for i in 0..k {
            c = c * (n - i) as f64 / (i + 1) as f64;
        }
        c * 0.5f64.powi(n as i32)
    }

    #[test]
    fn p_value_matches_direct_sum() {
        for n in [1usize, 5, 12, 30] {
            for h in 0..=n {
                let lo: f64 = (0..=h).map(|k| binom_pmf(k, n)).sum();
                let hi: f64 = (h..=n).map(|k| binom_pmf(k, n)).sum();
                let want = (2.0 * lo.min(hi)).min(1.0);
                assert!(
                    (binomial_two_sided_p(h, n) - want).abs() < 1e-10,
                    "n={n} h={h}"
                );
            }
        }
    }

    #[test]
    fn five_straight_hits_are_not_significant() {
        // 2 * 0.5^5 = 0.0625
        assert!((binomial_two_sided_p(5, 5) - 0.0625).abs() < 1e-12);
        assert!(binomial_two_sided_p(6, 6) < 0.05);
    }
}
