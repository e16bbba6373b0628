//! Small numeric helpers shared across modules.

/// Deterministic pairwise summation.
///
/// The reduction tree depends only on the slice length, never on thread
/// count, so every aggregate in the toolkit is reproducible bit-for-bit
/// across runs and `--threads` settings.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Numerically stable logistic function, clamped into the open interval
/// (0, 1) so saturated logits never round to an exact endpoint.
pub fn stable_sigmoid(t: f64) -> f64 {
    let p = if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}
