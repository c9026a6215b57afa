//! Rank-based ROC AUC, ROC curves and fold aggregation.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("both classes must be present")]
    SingleClass,
    #[error("{scores} scores but {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("no values")]
    Empty,
    #[error("label {0} is not 0 or 1")]
    InvalidLabel(u8),
    #[error("non-finite score at index {0}")]
    NonFiniteScore(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores `>= threshold` are called positive; the first point uses +inf.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub per_fold_auc: Vec<f64>,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

fn validate(scores: &[f64], labels: &[u8]) -> Result<(usize, usize), MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore(i));
    }
    let mut pos = 0;
    for &l in labels {
        match l {
            0 => {}
            1 => pos += 1,
            other => return Err(MetricsError::InvalidLabel(other)),
        }
    }
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    Ok((pos, neg))
}

/// Mann–Whitney AUC with tied scores sharing their average rank.
pub fn auc_roc(scores: &[f64], labels: &[u8]) -> Result<f64, MetricsError> {
    let (pos, neg) = validate(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1
        let avg = (i + j + 2) as f64 / 2.0;
        let tied_pos = order[i..=j].iter().filter(|&&k| labels[k] == 1).count();
        rank_sum += avg * tied_pos as f64;
        i = j + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// ROC curve over unique score thresholds, highest first.
pub fn roc_points(scores: &[f64], labels: &[u8]) -> Result<RocCurve, MetricsError> {
    let (pos, neg) = validate(scores, labels)?;
    let auc = auc_roc(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold: t,
        });
    }
    Ok(RocCurve { points, auc })
}

/// Trapezoidal area under a sequence of ROC points.
pub fn trapezoid_area(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

impl RocCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "fpr,tpr,threshold")?;
        for p in &self.points {
            writeln!(w, "{},{},{}", p.fpr, p.tpr, p.threshold)?;
        }
        Ok(())
    }
}

pub fn aggregate_folds(per_fold: &[f64]) -> Result<FoldMetrics, MetricsError> {
    if per_fold.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut sorted = per_fold.to_vec();
    sorted.sort_by(f64::total_cmp);
    // Summing in sorted order makes the mean independent of input order.
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    Ok(FoldMetrics {
        per_fold_auc: per_fold.to_vec(),
        mean,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
    })
}
