use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub roc_auc: f64,
    pub accuracy: f64,
}

/// Rank-based AUC of `pos` against `neg`; tied pairs count one half.
pub fn binary_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut all: Vec<(f64, bool)> = pos.iter().map(|&s| (s, true)).chain(neg.iter().map(|&s| (s, false))).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        // Midrank of the tie group (ranks are 1-based).
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * all[i..=j].iter().filter(|e| e.1).count() as f64;
        i = j + 1;
    }
    let (np, nn) = (pos.len() as f64, neg.len() as f64);
    (rank_sum - np * (np + 1.0) / 2.0) / (np * nn)
}

/// ROC AUC. With two score columns this is the AUC of column 1; with more,
/// the mean over unordered pairs of present classes of the two one-vs-one
/// AUCs (class i scored by column i against class j, and the reverse).
pub fn roc_auc(scores: &Array2<f64>, labels: &[usize]) -> Result<f64, ModelError> {
    if scores.nrows() != labels.len() {
        return Err(ModelError::DimensionMismatch(format!(
            "{} score rows for {} labels",
            scores.nrows(),
            labels.len()
        )));
    }
    let k = scores.ncols();
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(ModelError::DimensionMismatch(format!("label {bad} outside {k} score columns")));
    }
    let present: Vec<usize> = (0..k).filter(|c| labels.contains(c)).collect();
    if present.len() < 2 {
        return Err(ModelError::UndefinedMetric(format!(
            "ROC AUC needs at least two classes, found {}",
            present.len()
        )));
    }
    let col_for = |class: usize, col: usize| -> Vec<f64> {
        labels.iter().enumerate().filter(|(_, &l)| l == class).map(|(i, _)| scores[[i, col]]).collect()
    };
    if k == 2 {
        return Ok(binary_auc(&col_for(1, 1), &col_for(0, 1)));
    }
    let mut total = 0.0;
    let mut pairs = 0;
    for (a, &i) in present.iter().enumerate() {
        for &j in &present[a + 1..] {
            let ij = binary_auc(&col_for(i, i), &col_for(j, i));
            let ji = binary_auc(&col_for(j, j), &col_for(i, j));
            total += (ij + ji) / 2.0;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(row: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in row.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

pub fn accuracy(scores: &Array2<f64>, labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = scores.rows().into_iter().zip(labels).filter(|(r, &l)| argmax(r.iter().copied()) == l).count();
    hits as f64 / labels.len() as f64
}
