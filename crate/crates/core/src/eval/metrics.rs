//! Confusion matrix and classification metrics.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// `K x K` table of prediction counts, indexed `(true class, predicted
/// class)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    num_classes: usize,
    /// Row-major; entry `t * K + p` counts true `t` predicted as `p`.
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn from_labels(
        truth: &[usize],
        predicted: &[usize],
        num_classes: usize,
    ) -> Result<Self, EvalError> {
        if truth.len() != predicted.len() {
            return Err(EvalError::LengthMismatch {
                truth: truth.len(),
                predicted: predicted.len(),
            });
        }
        if truth.is_empty() {
            return Err(EvalError::EmptyInput);
        }
        let mut counts = vec![0u64; num_classes * num_classes];
        for (&t, &p) in truth.iter().zip(predicted) {
            for label in [t, p] {
                if label >= num_classes {
                    return Err(EvalError::InvalidLabel { label, num_classes });
                }
            }
            counts[t * num_classes + p] += 1;
        }
        Ok(Self {
            num_classes,
            counts,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn count(&self, true_class: usize, predicted_class: usize) -> u64 {
        self.counts[true_class * self.num_classes + predicted_class]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let correct: u64 = (0..self.num_classes).map(|k| self.count(k, k)).sum();
        correct as f64 / self.total() as f64
    }

    fn true_positives(&self, class: usize) -> u64 {
        self.count(class, class)
    }

    fn false_positives(&self, class: usize) -> u64 {
        (0..self.num_classes)
            .filter(|&t| t != class)
            .map(|t| self.count(t, class))
            .sum()
    }

    fn false_negatives(&self, class: usize) -> u64 {
        (0..self.num_classes)
            .filter(|&p| p != class)
            .map(|p| self.count(class, p))
            .sum()
    }
}

/// Metrics for one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of evaluated samples whose true label is this class.
    pub support: u64,
}

/// Per-class and macro-averaged classification metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub sample_count: u64,
    /// Classes where a zero denominator forced the 0-by-convention value
    /// (class missing from predictions and/or from the true labels).
    pub zero_denominator_classes: Vec<usize>,
}

/// Precision `TP/(TP+FP)`, recall `TP/(TP+FN)`, and `F1 = 2PR/(P+R)` per
/// class, plus unweighted macro averages and plain accuracy. A class whose
/// denominator is zero gets metric 0 and is listed in
/// `zero_denominator_classes`.
pub fn compute_metrics(
    truth: &[usize],
    predicted: &[usize],
    num_classes: usize,
) -> Result<MetricsReport, EvalError> {
    let matrix = ConfusionMatrix::from_labels(truth, predicted, num_classes)?;
    Ok(report_from_matrix(&matrix))
}

/// Same as [`compute_metrics`] but starting from an existing matrix.
pub fn report_from_matrix(matrix: &ConfusionMatrix) -> MetricsReport {
    let k = matrix.num_classes();
    let mut per_class = Vec::with_capacity(k);
    let mut flagged = Vec::new();
    for class in 0..k {
        let tp = matrix.true_positives(class) as f64;
        let fp = matrix.false_positives(class) as f64;
        let fn_ = matrix.false_negatives(class) as f64;
        let mut degenerate = false;
        let precision = if tp + fp > 0.0 {
            tp / (tp + fp)
        } else {
            degenerate = true;
            0.0
        };
        let recall = if tp + fn_ > 0.0 {
            tp / (tp + fn_)
        } else {
            degenerate = true;
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        if degenerate {
            flagged.push(class);
        }
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support: matrix.true_positives(class) + matrix.false_negatives(class),
        });
    }

    let kf = k as f64;
    MetricsReport {
        macro_precision: per_class.iter().map(|c| c.precision).sum::<f64>() / kf,
        macro_recall: per_class.iter().map(|c| c.recall).sum::<f64>() / kf,
        macro_f1: per_class.iter().map(|c| c.f1).sum::<f64>() / kf,
        accuracy: matrix.accuracy(),
        sample_count: matrix.total(),
        zero_denominator_classes: flagged,
        per_class,
    }
}
