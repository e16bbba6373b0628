//! Distribution-gap analysis of a test set against a Gaussian reference
//! model: per-sample squared Mahalanobis distances, the aggregate gap (half
//! their mean), the corresponding cross-entropy, percentile-filtered gaps,
//! and plot-ready histogram / scatter tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianModel;
use crate::math::pairwise_sum;
use crate::store::FeatureSet;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerSampleGap {
    pub id: String,
    pub mahalanobis_sq: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilteredGap {
    pub fraction: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Equal-width histogram over Mahalanobis distances (square roots of the
/// per-sample values). Out-of-range values are clamped into the edge bins
/// and counted in `clamped_low` / `clamped_high` rather than dropped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
    pub clamped_low: usize,
    pub clamped_high: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub score: f64,
    pub distance: f64,
}

/// Full analysis bundle; see [`build_report`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapReport {
    pub per_sample: Vec<PerSampleGap>,
    pub gap_all: f64,
    pub gap_filtered: Vec<FilteredGap>,
    pub cross_entropy: f64,
    pub constant_term: f64,
    pub histogram: Histogram,
    pub scatter: Option<Vec<ScatterPoint>>,
}

/// Squared Mahalanobis distance of every test row, in row order. Rows are
/// evaluated in parallel; the output order never depends on scheduling.
pub fn per_sample_gaps(model: &GaussianModel, test: &FeatureSet) -> Result<Vec<PerSampleGap>> {
    let values = raw_gaps(model, test)?;
    Ok(test
        .ids()
        .iter()
        .zip(values)
        .map(|(id, mahalanobis_sq)| PerSampleGap {
            id: id.clone(),
            mahalanobis_sq,
        })
        .collect())
}

/// Half the mean squared Mahalanobis distance of the test set.
pub fn distribution_gap(model: &GaussianModel, test: &FeatureSet) -> Result<f64> {
    let values = raw_gaps(model, test)?;
    Ok(half_mean(&values))
}

/// Cross-entropy of the test set against the model: the distribution gap
/// plus the model's normalization constant. Equal to minus the mean
/// log-density of the test rows.
pub fn cross_entropy(model: &GaussianModel, test: &FeatureSet) -> Result<f64> {
    Ok(distribution_gap(model, test)? + model.constant_term())
}

/// Gap recomputed over the `max(1, floor(fraction·n))` samples with the
/// smallest squared distances. Ties break by ascending id; the retained
/// samples are then summed in their original row order, so `fraction = 1`
/// reproduces [`distribution_gap`] bit for bit.
pub fn filtered_gap(model: &GaussianModel, test: &FeatureSet, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::BadFraction { value: fraction });
    }
    let values = raw_gaps(model, test)?;
    Ok(filtered_from_values(&values, test, fraction))
}

fn filtered_from_values(values: &[f64], test: &FeatureSet, fraction: f64) -> f64 {
    let n = values.len();
    let keep = ((fraction * n as f64).floor() as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .total_cmp(&values[b])
            .then_with(|| test.id(a).cmp(test.id(b)))
    });
    let mut kept: Vec<usize> = order[..keep].to_vec();
    kept.sort_unstable();
    let selected: Vec<f64> = kept.into_iter().map(|i| values[i]).collect();
    half_mean(&selected)
}

/// Equal-width histogram of distances. `range` defaults to [0, max]; when
/// that default collapses (every sample at distance zero) a single
/// zero-width bin holds all counts.
pub fn histogram(
    per_sample: &[PerSampleGap],
    bins: usize,
    range: Option<(f64, f64)>,
) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument {
            msg: "histogram needs at least one bin".into(),
        });
    }
    if per_sample.is_empty() {
        return Err(Error::EmptyInput { what: "per-sample list" });
    }
    let distances: Vec<f64> = per_sample.iter().map(|p| p.mahalanobis_sq.sqrt()).collect();
    let (lo, hi) = match range {
        Some((lo, hi)) => {
            if lo.is_nan() || hi.is_nan() || hi <= lo {
                return Err(Error::BadHistogramRange { lo, hi });
            }
            (lo, hi)
        }
        None => {
            let max = distances.iter().fold(0.0f64, |m, &v| m.max(v));
            if max <= 0.0 {
                return Ok(Histogram {
                    bins: vec![HistogramBin {
                        lo: 0.0,
                        hi: 0.0,
                        count: distances.len(),
                    }],
                    clamped_low: 0,
                    clamped_high: 0,
                });
            }
            (0.0, max)
        }
    };

    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut clamped_low = 0;
    let mut clamped_high = 0;
    for &v in &distances {
        let idx = if v < lo {
            clamped_low += 1;
            0
        } else if v > hi {
            clamped_high += 1;
            bins - 1
        } else {
            (((v - lo) / width) as usize).min(bins - 1)
        };
        counts[idx] += 1;
    }
    Ok(Histogram {
        bins: counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| HistogramBin {
                lo: lo + width * i as f64,
                hi: if i + 1 == bins { hi } else { lo + width * (i + 1) as f64 },
                count,
            })
            .collect(),
        clamped_low,
        clamped_high,
    })
}

/// One (detection score, Mahalanobis distance) row per sample, input order.
pub fn scatter_export(model: &GaussianModel, test: &FeatureSet) -> Result<Vec<ScatterPoint>> {
    let scores = test.scores().ok_or(Error::ScoresAbsent)?;
    let values = raw_gaps(model, test)?;
    Ok(scores
        .iter()
        .zip(values)
        .map(|(&score, m2)| ScatterPoint {
            score,
            distance: m2.sqrt(),
        })
        .collect())
}

/// Computes the whole report in one pass over the per-sample distances.
/// `fractions` are deduplicated and sorted; each must lie in (0, 1].
pub fn build_report(
    model: &GaussianModel,
    test: &FeatureSet,
    fractions: &[f64],
    bins: usize,
    range: Option<(f64, f64)>,
) -> Result<GapReport> {
    let values = raw_gaps(model, test)?;
    let per_sample: Vec<PerSampleGap> = test
        .ids()
        .iter()
        .zip(&values)
        .map(|(id, &mahalanobis_sq)| PerSampleGap {
            id: id.clone(),
            mahalanobis_sq,
        })
        .collect();

    let gap_all = half_mean(&values);
    let constant_term = model.constant_term();

    let mut fracs: Vec<f64> = Vec::new();
    for &f in fractions {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::BadFraction { value: f });
        }
        if !fracs.contains(&f) {
            fracs.push(f);
        }
    }
    fracs.sort_by(f64::total_cmp);
    let gap_filtered = fracs
        .into_iter()
        .map(|fraction| FilteredGap {
            fraction,
            gap: filtered_from_values(&values, test, fraction),
        })
        .collect();

    let histogram = histogram(&per_sample, bins, range)?;
    let scatter = if test.scores().is_some() {
        Some(scatter_export(model, test)?)
    } else {
        None
    };

    Ok(GapReport {
        per_sample,
        gap_all,
        gap_filtered,
        cross_entropy: gap_all + constant_term,
        constant_term,
        histogram,
        scatter,
    })
}

fn raw_gaps(model: &GaussianModel, test: &FeatureSet) -> Result<Vec<f64>> {
    if test.is_empty() {
        return Err(Error::EmptyInput { what: "test set" });
    }
    if test.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: test.dim(),
        });
    }
    (0..test.len())
        .into_par_iter()
        .map(|i| model.mahalanobis_sq(test.row(i)))
        .collect()
}

fn half_mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / (2.0 * values.len() as f64)
}
