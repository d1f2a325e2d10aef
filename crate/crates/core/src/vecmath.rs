//! Small dense-vector helpers shared by the competence measures, the split
//! objectives, and the grounding classifiers.

use alloc::vec;
use alloc::vec::Vec;

use crate::mathf;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    mathf::sqrt(dot(a, a))
}

/// Cosine similarity in `[-1, 1]`. Returns `None` when either vector has
/// zero norm.
pub(crate) fn cosine_similarity(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some(dot(a, b) / (na * nb))
}

/// Arithmetic mean of a non-empty set of equal-length vectors.
pub(crate) fn centroid(vectors: &[&[f64]]) -> Vec<f64> {
    debug_assert!(!vectors.is_empty());
    let dim = vectors[0].len();
    let mut out = vec![0.0; dim];
    for v in vectors {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += x;
        }
    }
    let n = vectors.len() as f64;
    for o in out.iter_mut() {
        *o /= n;
    }
    out
}

/// Population mean and variance (divisor `n`).
pub(crate) fn mean_variance(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}
