//! Planted synthetic benchmark: a few informative features, correlated or exact
//! copies of them, pure noise, and a configurable class imbalance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub rows: usize,
    pub informative: usize,
    /// Correlated copies of the informative features, assigned round-robin.
    pub redundant: usize,
    /// Correlation of each redundant copy with its source.
    pub rho: f64,
    /// Exact duplicates of informative features.
    pub exact: usize,
    pub noise: usize,
    /// Negatives per positive (9 gives a 1:9 class ratio).
    pub imbalance: f64,
    /// Standard deviation of Gaussian noise added to the latent score before ranking.
    pub latent_noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            rows: 5000,
            informative: 2,
            redundant: 3,
            rho: 0.97,
            exact: 0,
            noise: 5,
            imbalance: 9.0,
            latent_noise: 0.3,
            seed: 7,
        }
    }
}

/// Role of a generated column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantedRole {
    Informative,
    Redundant { source: usize },
    Exact { source: usize },
    Noise,
}

#[derive(Debug, Clone)]
pub struct Planted {
    pub dataset: Dataset,
    pub roles: Vec<PlantedRole>,
}

impl Planted {
    pub fn features_with(&self, pred: impl Fn(PlantedRole) -> bool) -> Vec<usize> {
        (0..self.roles.len())
            .filter(|&j| pred(self.roles[j]))
            .collect()
    }

    pub fn noise_features(&self) -> Vec<usize> {
        self.features_with(|r| r == PlantedRole::Noise)
    }

    pub fn informative_features(&self) -> Vec<usize> {
        self.features_with(|r| r == PlantedRole::Informative)
    }
}

impl SynthConfig {
    /// The planted benchmark used by the acceptance suite: three copies at
    /// correlation 1 and a nearly deterministic latent ranking.
    pub fn benchmark() -> Self {
        SynthConfig {
            rho: 1.0,
            latent_noise: 0.1,
            seed: 1,
            ..SynthConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.informative == 0 {
            return Err(Error::invalid("need at least one informative feature"));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::invalid("rho must lie in [0, 1]"));
        }
        if self.imbalance <= 0.0 {
            return Err(Error::invalid("imbalance must be positive"));
        }
        if !(self.latent_noise >= 0.0 && self.latent_noise.is_finite()) {
            return Err(Error::invalid(
                "latent_noise must be finite and non-negative",
            ));
        }
        let positives = self.positive_count();
        if positives == 0 || positives >= self.rows {
            return Err(Error::invalid("rows too few for the requested imbalance"));
        }
        Ok(())
    }

    fn positive_count(&self) -> usize {
        (self.rows as f64 / (1.0 + self.imbalance)).round() as usize
    }

    pub fn generate(&self) -> Result<Planted> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = self.rows;
        let gauss = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..n).map(|_| StandardNormal.sample(rng)).collect()
        };

        let informative: Vec<Vec<f64>> = (0..self.informative).map(|_| gauss(&mut rng)).collect();
        let mut names = Vec::new();
        let mut columns = Vec::new();
        let mut roles = Vec::new();
        for (k, col) in informative.iter().enumerate() {
            names.push(format!("inf_{}", k + 1));
            columns.push(col.clone());
            roles.push(PlantedRole::Informative);
        }
        let spread = (1.0 - self.rho * self.rho).sqrt();
        for r in 0..self.redundant {
            let source = r % self.informative;
            let e = gauss(&mut rng);
            names.push(format!("red_{}", r + 1));
            columns.push(
                informative[source]
                    .iter()
                    .zip(&e)
                    .map(|(x, e)| self.rho * x + spread * e)
                    .collect(),
            );
            roles.push(PlantedRole::Redundant { source });
        }
        for r in 0..self.exact {
            let source = r % self.informative;
            names.push(format!("dup_{}", r + 1));
            columns.push(informative[source].clone());
            roles.push(PlantedRole::Exact { source });
        }
        for r in 0..self.noise {
            names.push(format!("noise_{}", r + 1));
            columns.push(gauss(&mut rng));
            roles.push(PlantedRole::Noise);
        }

        let score: Vec<f64> = (0..n)
            .map(|i| {
                let x: Vec<f64> = informative.iter().map(|c| c[i]).collect();
                let e: f64 = StandardNormal.sample(&mut rng);
                latent_score(&x) + self.latent_noise * e
            })
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
        let mut target = vec![0u8; n];
        for &i in &order[..self.positive_count()] {
            target[i] = 1;
        }
        Ok(Planted {
            dataset: Dataset::from_numeric(names, columns, target)?,
            roles,
        })
    }
}

/// Latent ranking score; the top `rows / (1 + imbalance)` rows are positive.
fn latent_score(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(k, v)| v / (1.0 + k as f64 * 0.5))
        .sum()
}
