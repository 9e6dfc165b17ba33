//! Evaluation metrics.
//!
//! Confusion-matrix statistics for multiclass classifiers: the generalized
//! multiclass Matthews correlation coefficient, per-class precision,
//! recall, F1 and accuracy with unweighted macro averages, and one-vs-rest
//! ROC AUC computed through the rank statistic. Degenerate 0/0 ratios are
//! defined as 0 so every report is total.

mod predictions;

pub use predictions::{
    read_predictions, write_predictions, LabelMap, PredictionError, PredictionRow, Predictions,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Counts of (true class, predicted class) pairs. Rows are truth, columns
/// are prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {left} truth labels vs {right} entries")]
    LengthMismatch { left: usize, right: usize },
    #[error("label {label} at position {index} is outside 0..{k}")]
    LabelOutOfRange {
        index: usize,
        label: usize,
        k: usize,
    },
    #[error("the confusion matrix has no observations")]
    EmptyMatrix,
    #[error("score for sample {index}, class {class} is not finite")]
    NonFiniteScore { index: usize, class: usize },
}

impl ConfusionMatrix {
    pub fn new(k: usize) -> Self {
        ConfusionMatrix {
            k,
            counts: vec![0; k * k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn count(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.k + pred]
    }

    pub fn add(&mut self, truth: usize, pred: usize) {
        self.counts[truth * self.k + pred] += 1;
    }

    /// Total observations.
    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Correct predictions, the diagonal sum.
    pub fn correct(&self) -> u64 {
        (0..self.k).map(|i| self.count(i, i)).sum()
    }

    /// Per-class true totals, the row sums.
    pub fn truth_totals(&self) -> Vec<u64> {
        (0..self.k)
            .map(|t| (0..self.k).map(|p| self.count(t, p)).sum())
            .collect()
    }

    /// Per-class predicted totals, the column sums.
    pub fn pred_totals(&self) -> Vec<u64> {
        (0..self.k)
            .map(|p| (0..self.k).map(|t| self.count(t, p)).sum())
            .collect()
    }

    pub fn from_counts(rows: &[Vec<u64>]) -> Self {
        let k = rows.len();
        let mut cm = ConfusionMatrix::new(k);
        for (t, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), k, "confusion matrix rows must be square");
            for (p, &count) in row.iter().enumerate() {
                cm.counts[t * k + p] = count;
            }
        }
        cm
    }
}

/// Tally truth/prediction label pairs into a k-class confusion matrix.
pub fn confusion_matrix(
    truth: &[usize],
    pred: &[usize],
    k: usize,
) -> Result<ConfusionMatrix, MetricsError> {
    if truth.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            left: truth.len(),
            right: pred.len(),
        });
    }
    let mut cm = ConfusionMatrix::new(k);
    for (index, (&t, &p)) in truth.iter().zip(pred).enumerate() {
        for label in [t, p] {
            if label >= k {
                return Err(MetricsError::LabelOutOfRange { index, label, k });
            }
        }
        cm.add(t, p);
    }
    Ok(cm)
}

/// Generalized multiclass Matthews correlation coefficient.
///
/// MCC = (c·n − Σ t_k·p_k) / sqrt((n² − Σ p_k²)(n² − Σ t_k²)) with c the
/// diagonal sum, t row sums, p column sums. Either factor being zero means
/// truth or prediction is all one class; the coefficient is defined as 0
/// there.
pub fn mcc_multiclass(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    let n = cm.n();
    if n == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    let t = cm.truth_totals();
    let p = cm.pred_totals();
    let n2 = (n as i128) * (n as i128);
    let cross: i128 = t.iter().zip(&p).map(|(&a, &b)| a as i128 * b as i128).sum();
    let numerator = cm.correct() as i128 * n as i128 - cross;
    let dt = n2 - t.iter().map(|&a| (a as i128) * (a as i128)).sum::<i128>();
    let dp = n2 - p.iter().map(|&a| (a as i128) * (a as i128)).sum::<i128>();
    if dt == 0 || dp == 0 {
        return Ok(0.0);
    }
    // Cauchy-Schwarz bounds the true value by 1; the clamp removes the
    // one-ulp excursions of the floating-point square root
    let mcc = numerator as f64 / ((dt as f64) * (dp as f64)).sqrt();
    Ok(mcc.clamp(-1.0, 1.0))
}

/// Metrics for a single class in one-vs-rest terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// One-vs-rest accuracy (TP + TN) / n.
    pub accuracy: f64,
}

/// Full metric suite for one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mcc: f64,
    /// Overall accuracy, correct over total.
    pub accuracy: f64,
    /// Unweighted mean of the per-class one-vs-rest accuracies. Reported
    /// alongside `accuracy` because published tables rarely say which of
    /// the two they mean.
    pub average_accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// One-vs-rest AUC per class, absent without scores; a class with no
    /// positives or no negatives has no AUC.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc_per_class: Option<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub macro_auc: Option<f64>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class precision, recall, F1 and accuracy with macro averages, plus
/// the MCC. AUC fields stay empty; see [`roc_auc_ovr`].
pub fn classwise_metrics(cm: &ConfusionMatrix) -> Result<MetricReport, MetricsError> {
    let n = cm.n();
    if n == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    let t = cm.truth_totals();
    let p = cm.pred_totals();
    let mut per_class = Vec::with_capacity(cm.k());
    for i in 0..cm.k() {
        let tp = cm.count(i, i);
        let fp = p[i] - tp;
        let fn_ = t[i] - tp;
        let tn = n - tp - fp - fn_;
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            accuracy: (tp + tn) as f64 / n as f64,
        });
    }
    let mean = |f: fn(&ClassMetrics) -> f64| -> f64 {
        per_class.iter().map(f).sum::<f64>() / per_class.len() as f64
    };
    let average_accuracy = mean(|c| c.accuracy);
    let macro_precision = mean(|c| c.precision);
    let macro_recall = mean(|c| c.recall);
    let macro_f1 = mean(|c| c.f1);
    Ok(MetricReport {
        mcc: mcc_multiclass(cm)?,
        accuracy: cm.correct() as f64 / n as f64,
        average_accuracy,
        per_class,
        macro_precision,
        macro_recall,
        macro_f1,
        auc_per_class: None,
        macro_auc: None,
    })
}

/// One-vs-rest AUC per class plus the macro average over defined classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucReport {
    pub per_class: Vec<Option<f64>>,
    pub macro_auc: Option<f64>,
}

/// One-vs-rest ROC AUC from per-sample score vectors.
///
/// Computed as the rank statistic (R_pos − n_pos(n_pos+1)/2) / (n_pos·n_neg)
/// with average ranks on ties, which equals pair counting with ties worth
/// one half. Classes without both a positive and a negative sample get no
/// AUC and do not enter the macro average.
pub fn roc_auc_ovr(
    truth: &[usize],
    scores: &[Vec<f64>],
    k: usize,
) -> Result<AucReport, MetricsError> {
    if truth.len() != scores.len() {
        return Err(MetricsError::LengthMismatch {
            left: truth.len(),
            right: scores.len(),
        });
    }
    for (index, (row, &t)) in scores.iter().zip(truth).enumerate() {
        if row.len() != k {
            return Err(MetricsError::LengthMismatch {
                left: k,
                right: row.len(),
            });
        }
        if t >= k {
            return Err(MetricsError::LabelOutOfRange {
                index,
                label: t,
                k,
            });
        }
        for (class, s) in row.iter().enumerate() {
            if !s.is_finite() {
                return Err(MetricsError::NonFiniteScore { index, class });
            }
        }
    }

    let mut per_class = Vec::with_capacity(k);
    for class in 0..k {
        let mut column: Vec<(f64, bool)> = truth
            .iter()
            .zip(scores)
            .map(|(&t, row)| (row[class], t == class))
            .collect();
        let n_pos = column.iter().filter(|(_, pos)| *pos).count() as f64;
        let n_neg = column.len() as f64 - n_pos;
        if n_pos == 0.0 || n_neg == 0.0 {
            per_class.push(None);
            continue;
        }
        column.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("scores are finite"));
        let mut rank_sum_pos = 0.0;
        let mut i = 0;
        while i < column.len() {
            let mut j = i;
            while j < column.len() && column[j].0 == column[i].0 {
                j += 1;
            }
            // ranks are 1-based; tied scores share the average rank
            let avg_rank = (i + 1 + j) as f64 / 2.0;
            rank_sum_pos += avg_rank * column[i..j].iter().filter(|(_, pos)| *pos).count() as f64;
            i = j;
        }
        per_class.push(Some(
            (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg),
        ));
    }
    let defined: Vec<f64> = per_class.iter().flatten().copied().collect();
    let macro_auc = if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    };
    Ok(AucReport {
        per_class,
        macro_auc,
    })
}

/// Full evaluation from labels and optional scores.
pub fn evaluate(
    truth: &[usize],
    pred: &[usize],
    scores: Option<&[Vec<f64>]>,
    k: usize,
) -> Result<MetricReport, MetricsError> {
    let cm = confusion_matrix(truth, pred, k)?;
    let mut report = classwise_metrics(&cm)?;
    if let Some(scores) = scores {
        let auc = roc_auc_ovr(truth, scores, k)?;
        report.macro_auc = auc.macro_auc;
        report.auc_per_class = Some(auc.per_class);
    }
    Ok(report)
}
