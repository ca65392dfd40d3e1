use nalgebra::DMatrix;

use super::{Selection, Selector, SelectorConfig};
use crate::data::Dataset;
use crate::trees::{rank_scores, FeatureScore};
use crate::Result;

const R2_CEILING: f64 = 1.0 - 1e-12;

fn numeric_columns(train: &Dataset) -> Result<Vec<&[f64]>> {
    (0..train.n_features()).map(|j| train.numeric(j)).collect()
}

fn centered(x: &[f64]) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let ss = c.iter().map(|v| v * v).sum::<f64>();
    (c, ss)
}

/// Pearson correlation; 0 when either side has no variance.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (cx, sx) = centered(x);
    let (cy, sy) = centered(y);
    if sx <= 0.0 || sy <= 0.0 {
        return 0.0;
    }
    let r = cx.iter().zip(&cy).map(|(a, b)| a * b).sum::<f64>() / (sx * sy).sqrt();
    r.clamp(-1.0, 1.0)
}

/// Pairwise Pearson correlations of the given columns (zero-variance rows and
/// columns are 0 off the diagonal).
pub fn correlation_matrix(columns: &[&[f64]]) -> DMatrix<f64> {
    let m = columns.len();
    let parts: Vec<(Vec<f64>, f64)> = columns.iter().map(|c| centered(c)).collect();
    let mut r = DMatrix::identity(m, m);
    for i in 0..m {
        for j in i + 1..m {
            let (ci, si) = &parts[i];
            let (cj, sj) = &parts[j];
            let v = if *si > 0.0 && *sj > 0.0 {
                let dot: f64 = ci.iter().zip(cj).map(|(a, b)| a * b).sum();
                (dot / (si * sj).sqrt()).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    r
}

/// Rank by |correlation with the target|, then drop the weaker member of every
/// feature pair correlated above the cutoff.
pub struct CorrelationSelector;

impl Selector for CorrelationSelector {
    fn name(&self) -> &str {
        "correlation"
    }

    fn select(&self, train: &Dataset, config: &SelectorConfig) -> Result<Selection> {
        let cols = numeric_columns(train)?;
        let y: Vec<f64> = train.target().iter().map(|&t| t as f64).collect();
        let target_corr: Vec<f64> = cols.iter().map(|c| pearson(c, &y).abs()).collect();
        let scores = rank_scores(&target_corr);
        let r = correlation_matrix(&cols);
        let m = cols.len();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                let v = r[(i, j)].abs();
                if v > config.correlation_cutoff {
                    pairs.push((v, i, j));
                }
            }
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let mut alive = vec![true; m];
        for (_, i, j) in pairs {
            if !(alive[i] && alive[j]) {
                continue;
            }
            // lower target correlation goes; on a tie the higher id goes
            let drop = if target_corr[j] <= target_corr[i] {
                j
            } else {
                i
            };
            alive[drop] = false;
        }
        let keep = (0..m).filter(|&f| alive[f]).collect();
        Ok(Selection::ordered(scores, keep))
    }
}

/// VIF of every column against the others.
///
/// Uses the diagonal of the inverse correlation matrix; when that matrix is
/// singular each R² comes from a pseudo-inverse regression instead. Columns
/// without variance get an infinite VIF.
pub fn vif_values(columns: &[&[f64]]) -> Vec<f64> {
    let m = columns.len();
    if m == 1 {
        let (_, ss) = centered(columns[0]);
        return vec![if ss > 0.0 { 1.0 } else { f64::INFINITY }];
    }
    let constant: Vec<bool> = columns.iter().map(|c| centered(c).1 <= 0.0).collect();
    let r = correlation_matrix(columns);
    let from_r2 = |r2: f64| {
        if r2 >= R2_CEILING {
            f64::INFINITY
        } else {
            1.0 / (1.0 - r2.max(0.0))
        }
    };
    let mut out = vec![0.0; m];
    if let Some(chol) = r.clone().cholesky() {
        let inv = chol.inverse();
        for j in 0..m {
            // (R⁻¹)_jj = 1 / (1 - R²_j)
            out[j] = from_r2(1.0 - 1.0 / inv[(j, j)]);
        }
    } else {
        for j in 0..m {
            let others: Vec<usize> = (0..m).filter(|&k| k != j).collect();
            let sub = r.select_rows(&others).select_columns(&others);
            let rj = DMatrix::from_fn(others.len(), 1, |a, _| r[(others[a], j)]);
            let r2 = match sub.pseudo_inverse(1e-12) {
                Ok(pinv) => (rj.transpose() * pinv * &rj)[(0, 0)],
                Err(_) => 1.0,
            };
            out[j] = from_r2(r2);
        }
    }
    for j in 0..m {
        if constant[j] {
            out[j] = f64::INFINITY;
        }
    }
    out
}

/// Repeatedly drop the feature with the largest VIF until all are within the threshold.
pub struct VifSelector;

impl Selector for VifSelector {
    fn name(&self) -> &str {
        "vif"
    }

    fn select(&self, train: &Dataset, config: &SelectorConfig) -> Result<Selection> {
        let cols = numeric_columns(train)?;
        let m = cols.len();
        let mut alive: Vec<usize> = (0..m).collect();
        let mut raw = vec![0.0; m];
        loop {
            let sub: Vec<&[f64]> = alive.iter().map(|&f| cols[f]).collect();
            let vif = vif_values(&sub);
            for (k, &f) in alive.iter().enumerate() {
                raw[f] = 1.0 / vif[k];
            }
            // largest VIF, ties to the higher id
            let (worst, max_vif) =
                vif.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| {
                        if v >= acc.1 {
                            (k, v)
                        } else {
                            acc
                        }
                    });
            if alive.len() <= 1 || max_vif <= config.vif_threshold {
                break;
            }
            alive.remove(worst);
        }
        let scores: Vec<FeatureScore> = rank_scores(&raw);
        Ok(Selection::ordered(scores, alive))
    }
}

/// Sample variance of the unscaled values.
pub fn sample_variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let (_, ss) = centered(x);
    ss / (x.len() - 1) as f64
}

/// Keep features whose unscaled sample variance exceeds the threshold.
pub struct VarianceSelector;

impl Selector for VarianceSelector {
    fn name(&self) -> &str {
        "variance_threshold"
    }

    fn select(&self, train: &Dataset, config: &SelectorConfig) -> Result<Selection> {
        let raw = (0..train.n_features())
            .map(|j| train.unscaled(j).map(|v| sample_variance(&v)))
            .collect::<Result<Vec<f64>>>()?;
        let keep = (0..raw.len())
            .filter(|&j| raw[j] > config.variance_threshold)
            .collect();
        if raw.iter().all(|&v| v <= config.variance_threshold) {
            log::warn!(
                "variance threshold {} removes every feature",
                config.variance_threshold
            );
        }
        Ok(Selection::ordered(rank_scores(&raw), keep))
    }
}
