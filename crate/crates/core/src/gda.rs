//! Shared-covariance Gaussian discriminant analysis and its equivalent
//! sigmoid linear classifier.
//!
//! For two classes with Gaussian class-conditionals N(μ0, Σ) and N(μ1, Σ)
//! and unnormalized priors β0, β1, the posterior P(y=1|x) is exactly a
//! logistic function of a linear score. [`lda_to_sigmoid`] builds that
//! classifier:
//!
//! ```text
//! w = Σ⁻¹ (μ1 − μ0)
//! b = −½ μ1ᵀ Σ⁻¹ μ1 + ½ μ0ᵀ Σ⁻¹ μ0 + ln(β1/β0)
//! ```
//!
//! [`posterior_gda`] evaluates the same posterior from the density ratio in
//! log space; agreement between the two routes is the module's defining
//! property and is checked by [`equivalence_max_deviation`].

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::math::stable_sigmoid;

/// Parameters of a two-class shared-covariance discriminant model.
#[derive(Debug, Clone)]
pub struct LdaParams {
    mu0: DVector<f64>,
    mu1: DVector<f64>,
    cov: DMatrix<f64>,
    chol_l: DMatrix<f64>,
    beta0: f64,
    beta1: f64,
}

impl LdaParams {
    pub fn new(
        mu0: Vec<f64>,
        mu1: Vec<f64>,
        cov_row_major: Vec<f64>,
        beta0: f64,
        beta1: f64,
    ) -> Result<Self> {
        let d = mu0.len();
        if mu1.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: mu1.len(),
            });
        }
        if cov_row_major.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: cov_row_major.len(),
            });
        }
        if beta0.is_nan() || beta1.is_nan() || beta0 <= 0.0 || beta1 <= 0.0 {
            return Err(Error::InvalidArgument {
                msg: format!("priors must be positive, got beta0={beta0}, beta1={beta1}"),
            });
        }
        let cov = DMatrix::from_row_slice(d, d, &cov_row_major);
        let max_abs = cov.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-12 * max_abs.max(1.0);
        for i in 0..d {
            for j in (i + 1)..d {
                if (cov[(i, j)] - cov[(j, i)]).abs() > tol {
                    return Err(Error::FactorizationFailed {
                        diagnostics: format!("shared covariance asymmetric at ({i},{j})"),
                    });
                }
            }
        }
        let chol = nalgebra::Cholesky::new(cov.clone()).ok_or_else(|| {
            Error::FactorizationFailed {
                diagnostics: "shared covariance not positive definite".into(),
            }
        })?;
        Ok(LdaParams {
            mu0: DVector::from_vec(mu0),
            mu1: DVector::from_vec(mu1),
            cov,
            chol_l: chol.unpack(),
            beta0,
            beta1,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu0.len()
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Σ⁻¹ v via the stored Cholesky factor.
    fn solve(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let y = self
            .chol_l
            .solve_lower_triangular(v)
            .ok_or_else(|| Error::FactorizationFailed {
                diagnostics: "triangular solve failed".into(),
            })?;
        self.chol_l
            .transpose()
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::FactorizationFailed {
                diagnostics: "triangular solve failed".into(),
            })
    }

    /// log N(x | μ, Σ) up to the shared normalizer, i.e. −½‖L⁻¹(x−μ)‖².
    /// The normalizer cancels in the posterior ratio.
    fn half_quad(&self, x: &DVector<f64>, mu: &DVector<f64>) -> Result<f64> {
        let z = self
            .chol_l
            .solve_lower_triangular(&(x - mu))
            .ok_or_else(|| Error::FactorizationFailed {
                diagnostics: "triangular solve failed".into(),
            })?;
        Ok(-0.5 * z.norm_squared())
    }
}

/// The linear classifier equivalent to a shared-covariance GDA posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmoidClassifier {
    pub w: Vec<f64>,
    pub b: f64,
}

/// Builds the sigmoid classifier with w = Σ⁻¹(μ1−μ0) and
/// b = −½μ1ᵀΣ⁻¹μ1 + ½μ0ᵀΣ⁻¹μ0 + ln(β1/β0).
pub fn lda_to_sigmoid(lda: &LdaParams) -> Result<SigmoidClassifier> {
    let w = lda.solve(&(&lda.mu1 - &lda.mu0))?;
    let q1 = lda.mu1.dot(&lda.solve(&lda.mu1)?);
    let q0 = lda.mu0.dot(&lda.solve(&lda.mu0)?);
    let b = -0.5 * q1 + 0.5 * q0 + (lda.beta1 / lda.beta0).ln();
    if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
        return Err(Error::FactorizationFailed {
            diagnostics: "classifier coefficients are not finite".into(),
        });
    }
    Ok(SigmoidClassifier {
        w: w.iter().copied().collect(),
        b,
    })
}

/// 1 / (1 + exp(−w·x − b)), strictly inside (0, 1).
pub fn posterior_sigmoid(clf: &SigmoidClassifier, x: &[f64]) -> Result<f64> {
    if x.len() != clf.w.len() {
        return Err(Error::DimensionMismatch {
            expected: clf.w.len(),
            got: x.len(),
        });
    }
    let logit = clf.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + clf.b;
    Ok(stable_sigmoid(logit))
}

/// Posterior β1·N(x|μ1,Σ) / (β0·N(x|μ0,Σ) + β1·N(x|μ1,Σ)), evaluated in log
/// space so the two densities can underflow independently without breaking
/// the ratio.
pub fn posterior_gda(lda: &LdaParams, x: &[f64]) -> Result<f64> {
    if x.len() != lda.dim() {
        return Err(Error::DimensionMismatch {
            expected: lda.dim(),
            got: x.len(),
        });
    }
    let x = DVector::from_column_slice(x);
    let log1 = lda.beta1.ln() + lda.half_quad(&x, &lda.mu1)?;
    let log0 = lda.beta0.ln() + lda.half_quad(&x, &lda.mu0)?;
    Ok(stable_sigmoid(log1 - log0))
}

/// Runs `trials` randomized shared-covariance instances with dimensions in
/// 1..=dim_max and returns the largest absolute deviation between the GDA
/// posterior and the sigmoid route. Deterministic for a fixed seed.
pub fn equivalence_max_deviation(trials: usize, dim_max: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument {
            msg: "trials must be at least 1".into(),
        });
    }
    if dim_max == 0 {
        return Err(Error::InvalidArgument {
            msg: "dim-max must be at least 1".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev = 0.0f64;
    for _ in 0..trials {
        let d = rng.random_range(1..=dim_max);
        let lda = random_lda(&mut rng, d)?;
        let clf = lda_to_sigmoid(&lda)?;
        let x: Vec<f64> = (0..d).map(|_| 3.0 * normal(&mut rng)).collect();
        let p_gda = posterior_gda(&lda, &x)?;
        let p_sig = posterior_sigmoid(&clf, &x)?;
        max_dev = max_dev.max((p_gda - p_sig).abs());
    }
    Ok(max_dev)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_lda(rng: &mut ChaCha8Rng, d: usize) -> Result<LdaParams> {
    let a: Vec<f64> = (0..d * d).map(|_| normal(rng)).collect();
    let a = DMatrix::from_row_slice(d, d, &a);
    let cov = (&a * a.transpose()) / d as f64 + DMatrix::identity(d, d) * 0.3;
    let mu0: Vec<f64> = (0..d).map(|_| 2.0 * normal(rng)).collect();
    let mu1: Vec<f64> = (0..d).map(|_| 2.0 * normal(rng)).collect();
    let beta0 = rng.random_range(-2.0..2.0f64).exp();
    let beta1 = rng.random_range(-2.0..2.0f64).exp();
    let cov_rows: Vec<f64> = cov.transpose().iter().copied().collect();
    LdaParams::new(mu0, mu1, cov_rows, beta0, beta1)
}
