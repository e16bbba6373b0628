//! Seeded simulator of gap-aware subset selection versus uniform random
//! selection, operating on per-item squared Mahalanobis distances.
//!
//! Gap-weighted mode draws without replacement with per-item weight
//! exp(−m²/(2τ)): items closer to the reference are picked more often, and
//! the temperature τ controls how much the far items are still admitted.
//! Uniform mode draws without replacement with equal weights. Both modes are
//! fully determined by the configured seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::PerSampleGap;
use crate::math::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    GapWeighted,
    UniformRandom,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub count: usize,
    pub mode: SelectionMode,
    /// Temperature τ of the gap-weighted mode; ignored by uniform mode but
    /// must always be positive.
    pub temperature: f64,
    pub seed: u64,
}

/// Aggregate of [`selection_bias_report`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SelectionBias {
    pub mean_selected_gap: f64,
    pub mean_pool_gap: f64,
}

/// Draws `config.count` distinct ids from the pool. Identical inputs and
/// seed give identical output, byte for byte.
pub fn select(per_item: &[PerSampleGap], config: &SelectionConfig) -> Result<Vec<String>> {
    Ok(select_indices(per_item, config)?
        .into_iter()
        .map(|i| per_item[i].id.clone())
        .collect())
}

fn select_indices(per_item: &[PerSampleGap], config: &SelectionConfig) -> Result<Vec<usize>> {
    validate(per_item, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    Ok(match config.mode {
        SelectionMode::GapWeighted => weighted_without_replacement(per_item, config, &mut rng),
        SelectionMode::UniformRandom => {
            uniform_without_replacement(per_item.len(), config.count, &mut rng)
        }
    })
}

/// Sequential weighted draws with renormalization. Weights are shifted by
/// the smallest remaining m² before exponentiation; the shift multiplies
/// every weight by the same constant, so selection probabilities are
/// unchanged while the largest weight stays at 1 and the total can never
/// underflow to zero.
fn weighted_without_replacement(
    per_item: &[PerSampleGap],
    config: &SelectionConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let inv_2tau = 1.0 / (2.0 * config.temperature);
    let mut remaining: Vec<usize> = (0..per_item.len()).collect();
    let mut out = Vec::with_capacity(config.count);
    for _ in 0..config.count {
        let min_m2 = remaining
            .iter()
            .map(|&i| per_item[i].mahalanobis_sq)
            .fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = remaining
            .iter()
            .map(|&i| (-(per_item[i].mahalanobis_sq - min_m2) * inv_2tau).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = remaining.len() - 1;
        for (slot, &w) in weights.iter().enumerate() {
            u -= w;
            if u < 0.0 {
                pick = slot;
                break;
            }
        }
        out.push(remaining.remove(pick));
    }
    out
}

/// Partial Fisher-Yates shuffle; the first `count` slots are the selection.
fn uniform_without_replacement(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.random_range(i..n);
        indices.swap(i, j);
    }
    indices.truncate(count);
    indices
}

/// Runs `trials` independent selections with per-trial seeds derived from
/// `config.seed` via [`mix_seed`], and reports the mean selected m² next to
/// the pool-wide mean.
pub fn selection_bias_report(
    per_item: &[PerSampleGap],
    config: &SelectionConfig,
    trials: usize,
) -> Result<SelectionBias> {
    if trials == 0 {
        return Err(Error::InvalidArgument {
            msg: "trials must be at least 1".into(),
        });
    }
    validate(per_item, config)?;

    let trial_means: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let cfg = SelectionConfig {
                seed: mix_seed(config.seed, t),
                ..config.clone()
            };
            let gaps: Vec<f64> = select_indices(per_item, &cfg)?
                .into_iter()
                .map(|i| per_item[i].mahalanobis_sq)
                .collect();
            Ok(pairwise_sum(&gaps) / gaps.len() as f64)
        })
        .collect::<Result<_>>()?;

    let all: Vec<f64> = per_item.iter().map(|p| p.mahalanobis_sq).collect();
    Ok(SelectionBias {
        mean_selected_gap: pairwise_sum(&trial_means) / trial_means.len() as f64,
        mean_pool_gap: pairwise_sum(&all) / all.len() as f64,
    })
}

/// Deterministic public mixing of a base seed with a trial index
/// (splitmix64 finalizer over a golden-ratio stream).
pub fn mix_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed.wrapping_add(trial.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn validate(per_item: &[PerSampleGap], config: &SelectionConfig) -> Result<()> {
    if per_item.is_empty() {
        return Err(Error::EmptyInput { what: "per-item list" });
    }
    if config.count == 0 {
        return Err(Error::InvalidArgument {
            msg: "selection count must be at least 1".into(),
        });
    }
    if config.count > per_item.len() {
        return Err(Error::CountExceedsPool {
            count: config.count,
            pool: per_item.len(),
        });
    }
    if !config.temperature.is_finite() || config.temperature <= 0.0 {
        return Err(Error::InvalidArgument {
            msg: format!("temperature must be positive, got {}", config.temperature),
        });
    }
    for item in per_item {
        if !item.mahalanobis_sq.is_finite() {
            return Err(Error::NonFiniteDistance {
                id: item.id.clone(),
            });
        }
    }
    Ok(())
}
