//! Shared generators and independent oracles for the integration suites.
//! Everything here deliberately avoids the library's linear-algebra paths:
//! inverses are explicit Gauss-Jordan, pair enumeration is brute force.
#![allow(dead_code)]

use embedgap::{FeatureSet, GridManifest, GridParameter};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random symmetric positive-definite matrix, row-major: A·Aᵀ/d + boost·I.
pub fn random_spd(rng: &mut ChaCha8Rng, d: usize, boost: f64) -> Vec<f64> {
    let a: Vec<f64> = (0..d * d).map(|_| normal(rng)).collect();
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += a[i * d + k] * a[j * d + k];
            }
            m[i * d + j] = s / d as f64;
        }
    }
    for i in 0..d {
        m[i * d + i] += boost;
    }
    m
}

/// Explicit Gauss-Jordan inverse with partial pivoting; row-major in and out.
pub fn gauss_jordan_inverse(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        inv[i * d + i] = 1.0;
    }
    for col in 0..d {
        let mut pivot = col;
        for row in (col + 1)..d {
            if m[row * d + col].abs() > m[pivot * d + col].abs() {
                pivot = row;
            }
        }
        if m[pivot * d + col] == 0.0 {
            return None;
        }
        if pivot != col {
            for k in 0..d {
                m.swap(col * d + k, pivot * d + k);
                inv.swap(col * d + k, pivot * d + k);
            }
        }
        let p = m[col * d + col];
        for k in 0..d {
            m[col * d + k] /= p;
            inv[col * d + k] /= p;
        }
        for row in 0..d {
            if row == col {
                continue;
            }
            let factor = m[row * d + col];
            if factor == 0.0 {
                continue;
            }
            for k in 0..d {
                m[row * d + k] -= factor * m[col * d + k];
                inv[row * d + k] -= factor * inv[col * d + k];
            }
        }
    }
    Some(inv)
}

/// vᵀ·M·v for a row-major d×d matrix.
pub fn quad_form(m: &[f64], d: usize, v: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            total += v[i] * m[i * d + j] * v[j];
        }
    }
    total
}

pub fn random_feature_set(rng: &mut ChaCha8Rng, n: usize, d: usize, scale: f64) -> FeatureSet {
    let ids = (0..n).map(|i| format!("s{i}")).collect();
    let data = (0..n * d).map(|_| scale * normal(rng)).collect();
    FeatureSet::new(ids, d, data, None).unwrap()
}

/// Random grid with up to `max_params` parameters of up to `max_values`
/// values each, total combination count capped so brute-force enumeration
/// stays cheap. `angular_allowed` lets parameters carry the wrap-around flag.
pub fn random_grid(
    rng: &mut ChaCha8Rng,
    max_params: usize,
    max_values: usize,
    max_combos: usize,
    angular_allowed: bool,
) -> GridManifest {
    loop {
        let n_params = rng.random_range(1..=max_params);
        let sizes: Vec<usize> = (0..n_params)
            .map(|_| rng.random_range(1..=max_values))
            .collect();
        let combos: usize = sizes.iter().product();
        if combos > max_combos {
            continue;
        }
        let parameters: Vec<GridParameter> = sizes
            .iter()
            .enumerate()
            .map(|(p, &s)| GridParameter {
                name: format!("p{p}"),
                values: (0..s).map(|v| format!("v{v}")).collect(),
                angular: angular_allowed && rng.random_range(0..3) == 0,
            })
            .collect();
        let assignment = (0..combos).map(|i| format!("g{i}")).collect();
        return GridManifest::new(parameters, assignment).unwrap();
    }
}

/// Brute-force adjacency enumeration: every unordered combination pair that
/// differs in exactly one parameter by one position (or by the wrap step for
/// angular parameters with more than two values).
pub fn enumerate_adjacent_pairs(grid: &GridManifest) -> Vec<(String, String)> {
    let combos: Vec<(Vec<usize>, String)> = grid
        .combos()
        .map(|(pos, id)| (pos, id.to_string()))
        .collect();
    let params = grid.parameters();
    let mut pairs = Vec::new();
    for i in 0..combos.len() {
        for j in (i + 1)..combos.len() {
            let (pa, ia) = &combos[i];
            let (pb, ib) = &combos[j];
            let mut diff = None;
            let mut extra = false;
            for k in 0..params.len() {
                if pa[k] != pb[k] {
                    if diff.is_some() {
                        extra = true;
                        break;
                    }
                    diff = Some(k);
                }
            }
            if extra {
                continue;
            }
            let Some(k) = diff else { continue };
            let len = params[k].values.len();
            let (lo, hi) = (pa[k].min(pb[k]), pa[k].max(pb[k]));
            let neighbor = hi - lo == 1
                || (params[k].angular && len > 2 && lo == 0 && hi == len - 1);
            if neighbor {
                pairs.push((ia.clone(), ib.clone()));
            }
        }
    }
    pairs
}

/// Closed-form adjacency count: per parameter, the number of neighbor steps
/// times the product of the other parameters' sizes.
pub fn closed_form_pair_count(grid: &GridManifest) -> usize {
    let sizes: Vec<usize> = grid.parameters().iter().map(|p| p.values.len()).collect();
    grid.parameters()
        .iter()
        .enumerate()
        .map(|(p, param)| {
            let len = param.values.len();
            let steps = if param.angular && len > 2 { len } else { len.saturating_sub(1) };
            let rest: usize = sizes
                .iter()
                .enumerate()
                .filter(|&(q, _)| q != p)
                .map(|(_, &s)| s)
                .product();
            steps * rest
        })
        .sum()
}

/// Normalizes a pair list into a canonical sorted set for comparison.
pub fn pair_set(pairs: &[(String, String)]) -> std::collections::BTreeSet<(String, String)> {
    pairs
        .iter()
        .map(|(a, b)| {
            if a <= b {
                (a.clone(), b.clone())
            } else {
                (b.clone(), a.clone())
            }
        })
        .collect()
}
