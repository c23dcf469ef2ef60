//! k-nearest-neighbour majority vote.

use super::data::Example;
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 7;

/// Majority label among the `k` nearest examples by Euclidean distance.
/// Distance ties go to the smaller item id, vote ties to the smaller label.
pub fn knn_classify(sample: &[&Example], query: [f64; 2], k: usize) -> Result<u32> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    let k = k.min(sample.len());
    // Small sorted buffer of (distance^2, id, label).
    let mut best: Vec<(f64, u64, u32)> = Vec::with_capacity(k + 1);
    for e in sample {
        let d = (e.x[0] - query[0]).powi(2) + (e.x[1] - query[1]).powi(2);
        let key = (d, e.id, e.label);
        if best.len() == k {
            let worst = best[k - 1];
            if (d, e.id) >= (worst.0, worst.1) {
                continue;
            }
        }
        let pos = best.partition_point(|b| (b.0, b.1) < (d, e.id));
        best.insert(pos, key);
        best.truncate(k);
    }
    let mut votes: Vec<(u32, usize)> = Vec::with_capacity(k);
    for &(_, _, label) in &best {
        match votes.iter_mut().find(|v| v.0 == label) {
            Some(v) => v.1 += 1,
            None => votes.push((label, 1)),
        }
    }
    Ok(votes
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|v| v.0)
        .expect("at least one neighbour"))
}

/// Percentage of `batch` misclassified by kNN trained on `sample`.
pub fn miss_rate(sample: &[&Example], batch: &[Example], k: usize) -> Result<f64> {
    if batch.is_empty() {
        return Ok(0.0);
    }
    let mut wrong = 0usize;
    for e in batch {
        if knn_classify(sample, e.x, k)? != e.label {
            wrong += 1;
        }
    }
    Ok(100.0 * wrong as f64 / batch.len() as f64)
}
