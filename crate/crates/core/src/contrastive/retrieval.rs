use super::loss::cosine_similarity;
use crate::error::{Error, Result};

/// Fraction of rows whose nearest other row by cosine similarity carries the
/// same label. Ties go to the lower index.
pub fn retrieval_accuracy<R: AsRef<[f64]>>(rows: &[R], labels: &[usize]) -> Result<f64> {
    if rows.len() != labels.len() {
        return Err(Error::invalid(format!("{} rows but {} labels", rows.len(), labels.len())));
    }
    let first = labels.first().ok_or_else(|| Error::invalid("no rows"))?;
    if labels.iter().all(|l| l == first) {
        return Err(Error::invalid("retrieval needs at least two distinct labels"));
    }
    let mut hits = 0usize;
    for (a, ra) in rows.iter().enumerate() {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for (b, rb) in rows.iter().enumerate() {
            if a == b {
                continue;
            }
            let s = cosine_similarity(ra.as_ref(), rb.as_ref())?;
            if s > best.0 {
                best = (s, b);
            }
        }
        if labels[best.1] == labels[a] {
            hits += 1;
        }
    }
    Ok(hits as f64 / rows.len() as f64)
}
