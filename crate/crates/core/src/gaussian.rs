//! Multivariate Gaussian reference models: maximum-likelihood fit over a
//! feature set, Mahalanobis distances and log-densities against the fitted
//! model.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::FeatureSet;

/// Multiples of the mean covariance-diagonal scale tried, in order, when the
/// base factorization fails. The first entry stands for the caller's
/// requested ridge.
const RIDGE_SCHEDULE: [f64; 4] = [1e-10, 1e-8, 1e-6, 1e-4];

/// A fitted multivariate Gaussian: mean, covariance, its lower-triangular
/// Cholesky factor, and the diagonal ridge that was actually applied.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol_l: DMatrix<f64>,
    dim: usize,
    ridge: f64,
    rank_deficient: bool,
}

impl GaussianModel {
    /// Fits mean and covariance by maximum likelihood (1/n denominator) and
    /// factorizes the covariance, escalating the diagonal ridge through a
    /// fixed schedule until the factorization succeeds.
    ///
    /// The schedule tries the requested ridge first, then
    /// `{1e-10, 1e-8, 1e-6, 1e-4} · t̄` with `t̄ = trace(cov)/d` (falling back
    /// to `t̄ = 1` when the trace vanishes, e.g. all rows identical). The
    /// ridge that succeeded is recorded on the model.
    pub fn fit(reference: &FeatureSet, ridge: f64) -> Result<Self> {
        let n = reference.len();
        let d = reference.dim();
        if n < 2 {
            return Err(Error::TooFewRows { n });
        }
        if ridge.is_nan() || ridge < 0.0 {
            return Err(Error::InvalidArgument {
                msg: format!("ridge must be nonnegative, got {ridge}"),
            });
        }

        let mean = column_means(reference);
        let base_cov = ml_covariance(reference, &mean);

        let trace: f64 = base_cov.diagonal().iter().sum();
        let scale = if trace > 0.0 { trace / d as f64 } else { 1.0 };
        let mut candidates = vec![ridge];
        candidates.extend(RIDGE_SCHEDULE.iter().map(|m| m * scale));

        for &candidate in &candidates {
            let mut cov = base_cov.clone();
            for i in 0..d {
                cov[(i, i)] += candidate;
            }
            if let Some(chol) = nalgebra::Cholesky::new(cov.clone()) {
                let chol_l = chol.unpack();
                return Ok(GaussianModel {
                    mean,
                    cov,
                    chol_l,
                    dim: d,
                    ridge: candidate,
                    rank_deficient: n <= d,
                });
            }
        }

        let diag = base_cov.diagonal();
        let (min_diag, max_diag) = diag
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        Err(Error::FactorizationFailed {
            diagnostics: format!(
                "covariance not positive definite after ridges {candidates:?}; \
                 trace {trace:.3e}, diagonal range [{min_diag:.3e}, {max_diag:.3e}], \
                 n={n}, d={d}"
            ),
        })
    }

    /// Builds a model directly from a mean and covariance. The covariance
    /// must be symmetric (1e-12 relative) and factorizable as given; no
    /// ridge escalation is applied. `ridge` only records what was already
    /// baked into `cov`.
    pub fn from_parts(mean: Vec<f64>, cov_row_major: Vec<f64>, ridge: f64) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::EmptyDimension);
        }
        if cov_row_major.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: cov_row_major.len(),
            });
        }
        let cov = DMatrix::from_row_slice(d, d, &cov_row_major);
        let max_abs = cov.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-12 * max_abs.max(1.0);
        for i in 0..d {
            for j in (i + 1)..d {
                if (cov[(i, j)] - cov[(j, i)]).abs() > tol {
                    return Err(Error::FactorizationFailed {
                        diagnostics: format!(
                            "covariance asymmetric at ({i},{j}): {} vs {}",
                            cov[(i, j)],
                            cov[(j, i)]
                        ),
                    });
                }
            }
        }
        // force exact symmetry so serialization round-trips bitwise
        let cov = (&cov + cov.transpose()) * 0.5;
        let chol = nalgebra::Cholesky::new(cov.clone()).ok_or_else(|| {
            Error::FactorizationFailed {
                diagnostics: "covariance not positive definite".into(),
            }
        })?;
        Ok(GaussianModel {
            mean: DVector::from_vec(mean),
            cov,
            chol_l: chol.unpack(),
            dim: d,
            ridge,
            rank_deficient: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Lower-triangular factor L with L·Lᵀ = cov.
    pub fn chol_l(&self) -> &DMatrix<f64> {
        &self.chol_l
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// True when the fit had n ≤ d rows, i.e. the unridged covariance was
    /// necessarily rank-deficient.
    pub fn rank_deficient(&self) -> bool {
        self.rank_deficient
    }

    /// Squared Mahalanobis distance (x−μ)ᵀ Σ⁻¹ (x−μ), evaluated as
    /// ‖L⁻¹(x−μ)‖² by forward substitution.
    pub fn mahalanobis_sq(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let diff = DVector::from_iterator(self.dim, x.iter().zip(self.mean.iter()).map(|(a, b)| a - b));
        let z = self
            .chol_l
            .solve_lower_triangular(&diff)
            .ok_or_else(|| Error::FactorizationFailed {
                diagnostics: "triangular solve failed".into(),
            })?;
        Ok(z.norm_squared())
    }

    /// ln det(cov), computed from the Cholesky factor as 2·Σ ln Lᵢᵢ.
    pub fn log_det(&self) -> f64 {
        2.0 * self.chol_l.diagonal().iter().map(|v| v.ln()).sum::<f64>()
    }

    /// Log-density of the Gaussian at x:
    /// −½‖L⁻¹(x−μ)‖² − ½ ln((2π)^d det(cov)).
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        let m2 = self.mahalanobis_sq(x)?;
        Ok(-0.5 * m2 - 0.5 * (self.dim as f64) * (2.0 * std::f64::consts::PI).ln()
            - 0.5 * self.log_det())
    }

    /// Normalization constant ln((2π)^{d/2} det(cov)^{1/2}); the part of the
    /// cross-entropy that does not depend on the evaluated set.
    pub fn constant_term(&self) -> f64 {
        0.5 * (self.dim as f64) * (2.0 * std::f64::consts::PI).ln() + 0.5 * self.log_det()
    }

    pub fn to_json(&self) -> ModelJson {
        ModelJson {
            dim: self.dim,
            mean: self.mean.iter().copied().collect(),
            cov: self.cov.transpose().iter().copied().collect(),
            ridge: self.ridge,
            rank_deficient: self.rank_deficient,
        }
    }

    pub fn from_json(doc: &ModelJson) -> Result<Self> {
        if doc.mean.len() != doc.dim {
            return Err(Error::DimensionMismatch {
                expected: doc.dim,
                got: doc.mean.len(),
            });
        }
        let mut model = Self::from_parts(doc.mean.clone(), doc.cov.clone(), doc.ridge)?;
        model.rank_deficient = doc.rank_deficient;
        Ok(model)
    }
}

/// JSON document for a fitted model: mean, covariance row-major, recorded
/// ridge and dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelJson {
    pub dim: usize,
    pub mean: Vec<f64>,
    pub cov: Vec<f64>,
    pub ridge: f64,
    #[serde(default)]
    pub rank_deficient: bool,
}

/// Arithmetic column means, summed per fixed-size row chunk and combined in
/// chunk order so the result does not depend on the worker count.
pub(crate) fn column_means(set: &FeatureSet) -> DVector<f64> {
    use rayon::prelude::*;

    let d = set.dim();
    let n = set.len();
    let chunks: Vec<Vec<f64>> = (0..n)
        .collect::<Vec<_>>()
        .par_chunks(1024)
        .map(|rows| {
            let mut acc = vec![0.0; d];
            for &r in rows {
                for (a, v) in acc.iter_mut().zip(set.row(r)) {
                    *a += v;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; d];
    for chunk in &chunks {
        for (t, v) in total.iter_mut().zip(chunk) {
            *t += v;
        }
    }
    DVector::from_iterator(d, total.into_iter().map(|s| s / n as f64))
}

/// Maximum-likelihood covariance (1/n)·Σ (x−μ)(x−μ)ᵀ with the same
/// chunk-then-combine order as the mean.
fn ml_covariance(set: &FeatureSet, mean: &DVector<f64>) -> DMatrix<f64> {
    use rayon::prelude::*;

    let d = set.dim();
    let n = set.len();
    let chunks: Vec<DMatrix<f64>> = (0..n)
        .collect::<Vec<_>>()
        .par_chunks(1024)
        .map(|rows| {
            let mut acc = DMatrix::zeros(d, d);
            let mut diff = vec![0.0; d];
            for &r in rows {
                for (v, (x, m)) in diff.iter_mut().zip(set.row(r).iter().zip(mean.iter())) {
                    *v = x - m;
                }
                for i in 0..d {
                    for j in i..d {
                        acc[(i, j)] += diff[i] * diff[j];
                    }
                }
            }
            acc
        })
        .collect();
    let mut upper = DMatrix::zeros(d, d);
    for chunk in &chunks {
        upper += chunk;
    }
    let mut cov = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = upper[(i, j)] / n as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov
}
