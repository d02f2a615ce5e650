//! Per-row comparison classifiers: CART decision tree, random forest, and
//! a fully connected network, plus the window-level vote that makes their
//! per-row predictions comparable to the sequence model's per-window ones.

mod fcnn;
mod forest;
mod tree;
mod vote;

pub use fcnn::{fcnn_backward, train_fcnn, DenseLayer, Fcnn, FcnnGrads};
pub use forest::{train_forest, ForestConfig, RandomForest};
pub use tree::{gini_impurity, train_tree, DecisionTree, TreeConfig, TreeNode};
pub use vote::window_vote;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("validation set is empty")]
    EmptyValidationSet,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("row has {got} features but the model expects {expected}")]
    FeatureMismatch { expected: usize, got: usize },
    #[error("label {label} out of range for {num_classes} classes")]
    InvalidLabel { label: usize, num_classes: usize },
    #[error("labels and rows differ in length: {rows} rows vs {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    Divergence { epoch: usize },
}

/// Validates a rows-plus-labels training set and returns the feature count.
pub(crate) fn check_rows(
    rows: &[Vec<f64>],
    labels: &[usize],
    num_classes: usize,
) -> Result<usize, BaselineError> {
    if rows.is_empty() {
        return Err(BaselineError::EmptyTrainingSet);
    }
    if rows.len() != labels.len() {
        return Err(BaselineError::LengthMismatch {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    let d = rows[0].len();
    for row in rows {
        if row.len() != d {
            return Err(BaselineError::FeatureMismatch {
                expected: d,
                got: row.len(),
            });
        }
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(BaselineError::InvalidLabel { label, num_classes });
    }
    Ok(d)
}
