use crate::error::{Error, Result};
use crate::ranking::TopKSet;

/// Set F1: `2|a∩b| / (|a|+|b|)`.
pub fn f1_at_k(a: &TopKSet, b: &TopKSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("top-k set"));
    }
    let inter = a.intersection_len(b) as f64;
    Ok(2.0 * inter / (a.len() + b.len()) as f64)
}

/// Jaccard similarity: `|a∩b| / |a∪b|`.
pub fn jaccard_at_k(a: &TopKSet, b: &TopKSet) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        return Err(Error::Empty("top-k sets"));
    }
    Ok(a.intersection_len(b) as f64 / a.union_len(b) as f64)
}
