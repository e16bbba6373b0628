//! Synthetic-pool metrics over a rendering-parameter grid: density (mean
//! inner product across parameter-adjacent renders), diversity (mean k-th
//! power of centered embedding norms), the pool-to-reference domain gap, the
//! Fréchet distance between two Gaussian models, and sub-pool sampling.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::distribution_gap;
use crate::gaussian::{column_means, GaussianModel};
use crate::math::pairwise_sum;
use crate::store::{FeatureSet, GridManifest, GridParameter};

/// Unordered id pairs whose parameter combinations differ in exactly one
/// parameter, by one position in that parameter's declared value order.
#[derive(Debug, Clone)]
pub struct AdjacencyPairs {
    pairs: Vec<(String, String)>,
}

impl AdjacencyPairs {
    /// Builds a pair list directly, e.g. for density over a custom
    /// neighborhood. Self-pairs and repeats (in either orientation) are
    /// rejected.
    pub fn from_pairs(pairs: Vec<(String, String)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(pairs.len());
        for (a, b) in &pairs {
            if a == b {
                return Err(Error::InvalidArgument {
                    msg: format!("self-pair {a:?}"),
                });
            }
            if !seen.insert((a.clone(), b.clone())) || seen.contains(&(b.clone(), a.clone())) {
                return Err(Error::InvalidArgument {
                    msg: format!("pair ({a:?}, {b:?}) repeats"),
                });
            }
        }
        Ok(AdjacencyPairs { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }
}

/// Exponent k of the diversity metric. Defaults to 10.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversityConfig {
    pub exponent: f64,
}

impl Default for DiversityConfig {
    fn default() -> Self {
        DiversityConfig { exponent: 10.0 }
    }
}

/// A named sub-pool: for each restricted parameter, the values to keep.
/// Parameters not listed keep all their values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsetScheme {
    pub name: String,
    pub keep: BTreeMap<String, Vec<String>>,
}

/// Enumerates all adjacent-render pairs of the grid: for every parameter,
/// consecutive positions of its value list (wrapping around for parameters
/// flagged angular with more than two values) while all other parameters are
/// held fixed. Generation order is deterministic.
pub fn adjacency_pairs(grid: &GridManifest) -> AdjacencyPairs {
    let params = grid.parameters();
    let mut pairs = Vec::new();
    for (p, param) in params.iter().enumerate() {
        let len = param.values.len();
        let mut position_pairs: Vec<(usize, usize)> =
            (0..len.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if param.angular && len > 2 {
            position_pairs.push((len - 1, 0));
        }
        let others: Vec<usize> = (0..params.len()).filter(|&q| q != p).collect();
        let other_sizes: Vec<usize> = others.iter().map(|&q| params[q].values.len()).collect();
        for &(pos_a, pos_b) in &position_pairs {
            let mut odometer = vec![0usize; others.len()];
            loop {
                let mut positions = vec![0usize; params.len()];
                for (slot, &q) in others.iter().enumerate() {
                    positions[q] = odometer[slot];
                }
                positions[p] = pos_a;
                let id_a = grid.id_at(&positions).to_string();
                positions[p] = pos_b;
                let id_b = grid.id_at(&positions).to_string();
                pairs.push((id_a, id_b));
                if !advance(&mut odometer, &other_sizes) {
                    break;
                }
            }
        }
    }
    AdjacencyPairs { pairs }
}

/// Advances a mixed-radix counter (last digit fastest); false on wrap.
fn advance(odometer: &mut [usize], sizes: &[usize]) -> bool {
    for k in (0..odometer.len()).rev() {
        odometer[k] += 1;
        if odometer[k] < sizes[k] {
            return true;
        }
        odometer[k] = 0;
    }
    false
}

/// Mean raw inner product f(p)ᵀf(q) over the adjacency pairs.
pub fn density(pool: &FeatureSet, pairs: &AdjacencyPairs) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput { what: "adjacency pairs" });
    }
    let resolved: Vec<(usize, usize)> = pairs
        .pairs
        .iter()
        .map(|(a, b)| {
            let ia = pool.row_of(a).ok_or_else(|| Error::UnknownId { id: a.clone() })?;
            let ib = pool.row_of(b).ok_or_else(|| Error::UnknownId { id: b.clone() })?;
            Ok((ia, ib))
        })
        .collect::<Result<_>>()?;
    let products: Vec<f64> = resolved
        .par_iter()
        .map(|&(ia, ib)| {
            pool.row(ia)
                .iter()
                .zip(pool.row(ib))
                .map(|(x, y)| x * y)
                .sum::<f64>()
        })
        .collect();
    Ok(pairwise_sum(&products) / products.len() as f64)
}

/// Mean ‖f(x) − μ‖₂^k over the pool, with μ the mean feature. Each term is
/// evaluated as exp(k·ln r) so large exponents neither overflow nor lose
/// accuracy for tiny radii; r = 0 contributes 0.
pub fn diversity(pool: &FeatureSet, config: &DiversityConfig) -> Result<f64> {
    if pool.is_empty() {
        return Err(Error::EmptyInput { what: "pool" });
    }
    if !config.exponent.is_finite() || config.exponent <= 0.0 {
        return Err(Error::InvalidArgument {
            msg: format!("diversity exponent must be positive, got {}", config.exponent),
        });
    }
    let mean = column_means(pool);
    let k = config.exponent;
    let terms: Vec<f64> = (0..pool.len())
        .into_par_iter()
        .map(|i| {
            let r2: f64 = pool
                .row(i)
                .iter()
                .zip(mean.iter())
                .map(|(x, m)| (x - m) * (x - m))
                .sum();
            let r = r2.sqrt();
            if r > 0.0 {
                (k * r.ln()).exp()
            } else {
                0.0
            }
        })
        .collect();
    Ok(pairwise_sum(&terms) / terms.len() as f64)
}

/// Distribution gap from the reference model to the pool; same formula as
/// the test-set gap, delegated so the two are bitwise identical.
pub fn pool_domain_gap(reference: &GaussianModel, pool: &FeatureSet) -> Result<f64> {
    distribution_gap(reference, pool)
}

/// Fréchet distance between two Gaussians:
/// ‖μa−μb‖² + tr(Σa + Σb − 2(Σa·Σb)^{1/2}), with the matrix square root
/// taken through the symmetric product Σa^{1/2}·Σb·Σa^{1/2}.
pub fn frechet_gaussian(a: &GaussianModel, b: &GaussianModel) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let sqrt_a = symmetric_sqrt(a.cov())?;
    let inner = &sqrt_a * b.cov() * &sqrt_a;
    let inner = symmetrized(&inner);
    let eigen = nalgebra::SymmetricEigen::new(inner);
    let mut trace_sqrt = 0.0;
    for &v in eigen.eigenvalues.iter() {
        if !v.is_finite() {
            return Err(Error::EigenFailed {
                msg: "non-finite eigenvalue in cross term".into(),
            });
        }
        trace_sqrt += v.max(0.0).sqrt();
    }
    let mean_sq = (a.mean() - b.mean()).norm_squared();
    let dist = mean_sq + a.cov().trace() + b.cov().trace() - 2.0 * trace_sqrt;
    Ok(dist.max(0.0))
}

fn symmetric_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eigen = nalgebra::SymmetricEigen::new(symmetrized(m));
    if eigen.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailed {
            msg: "non-finite eigenvalue in covariance".into(),
        });
    }
    let sqrt_vals = eigen.eigenvalues.map(|v| v.max(0.0).sqrt());
    let scaled = &eigen.eigenvectors * DMatrix::from_diagonal(&sqrt_vals);
    Ok(&scaled * eigen.eigenvectors.transpose())
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Ids of exactly the combinations whose every parameter value is kept by
/// the scheme, in grid assignment order.
pub fn sample_subset(grid: &GridManifest, scheme: &SubsetScheme) -> Result<Vec<String>> {
    // per-parameter allow sets, None = keep everything
    let mut allowed: Vec<Option<HashSet<usize>>> = vec![None; grid.parameters().len()];
    for (name, kept) in &scheme.keep {
        let (p, param) = grid
            .parameters()
            .iter()
            .enumerate()
            .find(|(_, q)| &q.name == name)
            .ok_or_else(|| Error::UnknownParameter { name: name.clone() })?;
        if kept.is_empty() {
            return Err(Error::InvalidArgument {
                msg: format!("scheme keeps no values for parameter {name:?}"),
            });
        }
        let mut set = HashSet::with_capacity(kept.len());
        for value in kept {
            let pos = param.values.iter().position(|v| v == value).ok_or_else(|| {
                Error::UnknownValue {
                    parameter: name.clone(),
                    value: value.clone(),
                }
            })?;
            set.insert(pos);
        }
        allowed[p] = Some(set);
    }
    let ids = grid
        .combos()
        .filter(|(positions, _)| {
            positions
                .iter()
                .zip(&allowed)
                .all(|(pos, allow)| allow.as_ref().is_none_or(|s| s.contains(pos)))
        })
        .map(|(_, id)| id.to_string())
        .collect();
    Ok(ids)
}

/// The sub-pool schemes shipped with the toolkit, addressing the canonical
/// grid of [`archangel_grid`]: sparser altitudes (SAlt), radii (SRad),
/// viewing angles (SAng), characters (SCha) and poses (SPos), plus the
/// biased far-camera (BSAlt, BSRad) and front-view (BSAng) samplings.
pub fn builtin_schemes() -> Vec<SubsetScheme> {
    fn scheme(name: &str, parameter: &str, values: &[&str]) -> SubsetScheme {
        let mut keep = BTreeMap::new();
        keep.insert(
            parameter.to_string(),
            values.iter().map(|v| v.to_string()).collect(),
        );
        SubsetScheme {
            name: name.to_string(),
            keep,
        }
    }
    vec![
        scheme("SAlt", "altitude", &["10", "20", "30", "40", "50"]),
        scheme("SRad", "radius", &["10", "20", "30"]),
        scheme("SAng", "angle", &["0", "60", "120", "180", "240", "300"]),
        scheme("SCha", "character", &["Juliet", "Kelly", "Romeo", "Scott"]),
        scheme("SPos", "pose", &["stand"]),
        scheme("BSAlt", "altitude", &["30", "35", "40", "45", "50"]),
        scheme("BSRad", "radius", &["20", "25", "30"]),
        scheme("BSAng", "angle", &["300", "330", "0", "30", "60"]),
    ]
}

/// Looks up a builtin scheme by name.
pub fn builtin_scheme(name: &str) -> Option<SubsetScheme> {
    builtin_schemes().into_iter().find(|s| s.name == name)
}

/// Loads a scheme from a JSON file of the form
/// `{"name": "...", "keep": {"parameter": ["value", ...]}}`.
pub fn read_scheme<P: AsRef<Path>>(path: P) -> Result<SubsetScheme> {
    let text = std::fs::read_to_string(path.as_ref())?;
    Ok(serde_json::from_str(&text)?)
}

/// The canonical 10×6×12×8×3 rendering grid the builtin schemes address:
/// altitudes 5–50 m, radii 5–30 m, angles 0°–330° (angular), eight human
/// characters and three poses. Ids are generated deterministically from the
/// parameter values.
pub fn archangel_grid() -> GridManifest {
    let altitudes: Vec<String> = (1..=10).map(|i| (i * 5).to_string()).collect();
    let radii: Vec<String> = (1..=6).map(|i| (i * 5).to_string()).collect();
    let angles: Vec<String> = (0..12).map(|i| (i * 30).to_string()).collect();
    let characters = ["Juliet", "Kelly", "Lucy", "Mary", "Romeo", "Scott", "Troy", "Victor"];
    let poses = ["stand", "prone", "squat"];

    let mut assignment =
        Vec::with_capacity(altitudes.len() * radii.len() * angles.len() * characters.len() * poses.len());
    for alt in &altitudes {
        for rad in &radii {
            for ang in &angles {
                for ch in characters {
                    for pose in poses {
                        assignment.push(format!("alt{alt}_rad{rad}_ang{ang}_{ch}_{pose}"));
                    }
                }
            }
        }
    }
    let parameters = vec![
        GridParameter {
            name: "altitude".into(),
            values: altitudes,
            angular: false,
        },
        GridParameter {
            name: "radius".into(),
            values: radii,
            angular: false,
        },
        GridParameter {
            name: "angle".into(),
            values: angles,
            angular: true,
        },
        GridParameter {
            name: "character".into(),
            values: characters.iter().map(|s| s.to_string()).collect(),
            angular: false,
        },
        GridParameter {
            name: "pose".into(),
            values: poses.iter().map(|s| s.to_string()).collect(),
            angular: false,
        },
    ];
    GridManifest::new(parameters, assignment).expect("canonical grid is well-formed")
}
