//! Base-2 entropy primitives. Every quantity in this crate is in bits and
//! uses the convention `0 log 0 = 0`.

/// `x log2 x`, zero at `x = 0`.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy `H_b(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// Entropy of a normalized probability vector.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().map(|&p| xlog2x(p)).sum::<f64>()
}

/// Entropy of the distribution proportional to `weights`.
pub fn entropy_of_weights(weights: impl IntoIterator<Item = f64>) -> f64 {
    let (total, sum_xlogx) = weights
        .into_iter()
        .fold((0.0, 0.0), |(t, s), w| (t + w, s + xlog2x(w)));
    if total <= 0.0 {
        0.0
    } else {
        total.log2() - sum_xlogx / total
    }
}
