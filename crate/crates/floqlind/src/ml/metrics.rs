//! Binary classification metrics with label 1 as the positive class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold metrics plus the threshold-free AUC. `confusion[actual][predicted]`
/// counts outcomes, so `confusion[1][1]` holds the true positives. `auc` is
/// absent when only one class appears, where the ROC curve is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub f1: f64,
    pub auc: Option<f64>,
    pub confusion: [[usize; 2]; 2],
    pub threshold: f64,
}

/// Scores a prediction at the conventional 0.5 threshold.
pub fn metrics(labels: &[u8], scores: &[f64]) -> Result<MetricsReport> {
    metrics_at(labels, scores, 0.5)
}

/// Scores a prediction at an explicit threshold: `score >= threshold` reads
/// as class 1. AUC uses the rank-sum convention, so tied scores each count
/// half a step.
pub fn metrics_at(labels: &[u8], scores: &[f64], threshold: f64) -> Result<MetricsReport> {
    if labels.len() != scores.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels against {} scores",
            labels.len(),
            scores.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::InvalidParameter("metrics need at least one sample".into()));
    }
    for (i, &s) in scores.iter().enumerate() {
        if !s.is_finite() {
            return Err(Error::NonFiniteFeature { row: i, col: 0 });
        }
    }
    if labels.iter().any(|&y| y > 1) {
        return Err(Error::InvalidParameter("labels must be 0 or 1".into()));
    }

    let mut confusion = [[0usize; 2]; 2];
    for (&y, &s) in labels.iter().zip(scores) {
        let predicted = (s >= threshold) as usize;
        confusion[y as usize][predicted] += 1;
    }
    let tp = confusion[1][1] as f64;
    let fp = confusion[0][1] as f64;
    let fn_ = confusion[1][0] as f64;
    let tn = confusion[0][0] as f64;
    let accuracy = (tp + tn) / labels.len() as f64;
    let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
    let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };

    Ok(MetricsReport { accuracy, f1, auc: auc(labels, scores), confusion, threshold })
}

fn auc(labels: &[u8], scores: &[f64]) -> Option<f64> {
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores").then(a.cmp(&b)));

    // Mann-Whitney statistic walked over tie groups of the sorted scores.
    let mut u = 0.0;
    let mut negatives_below = 0.0;
    let mut at = 0;
    while at < order.len() {
        let mut end = at;
        while end < order.len() && scores[order[end]] == scores[order[at]] {
            end += 1;
        }
        let group = &order[at..end];
        let pos_here = group.iter().filter(|&&i| labels[i] == 1).count() as f64;
        let neg_here = group.len() as f64 - pos_here;
        u += pos_here * (negatives_below + 0.5 * neg_here);
        negatives_below += neg_here;
        at = end;
    }
    Some(u / (positives as f64 * negatives as f64))
}
