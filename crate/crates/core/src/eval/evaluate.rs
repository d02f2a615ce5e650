//! Applies any trained classifier to a window set and scores it.
//!
//! The sequence model predicts one label per window directly. Per-row
//! models (tree, forest, per-row network) classify each row of the window
//! and the row votes are fused by majority with a summed-probability
//! tie-break.

use rayon::prelude::*;

use crate::baselines::window_vote;
use crate::data::WindowSet;
use crate::eval::{compute_metrics, ConfusionMatrix, EvalError, MetricsReport};
use crate::model::{predict, ModelPayload};

/// Scores from one model on one window set.
#[derive(Clone, Debug)]
pub struct EvalOutcome {
    pub report: MetricsReport,
    pub confusion: ConfusionMatrix,
}

fn model_classes(model: &ModelPayload) -> usize {
    match model {
        ModelPayload::Lstm(m) => m.config.num_classes,
        ModelPayload::DecisionTree(t) => t.num_classes,
        ModelPayload::RandomForest(f) => f.num_classes,
        ModelPayload::Fcnn(n) => n.config.num_classes,
    }
}

/// One predicted label per window, in window order.
///
/// Windows are scored in parallel; the output order never depends on the
/// thread count.
pub fn predict_windows(
    model: &ModelPayload,
    windows: &WindowSet,
) -> Result<Vec<usize>, EvalError> {
    match model {
        ModelPayload::Lstm(m) => windows
            .windows
            .par_iter()
            .map(|w| Ok(predict(&w.data, m)?.0))
            .collect(),
        _ => windows
            .windows
            .par_iter()
            .map(|w| {
                let mut per_row = Vec::with_capacity(w.data.rows());
                for t in 0..w.data.rows() {
                    let row = w.data.row(t);
                    let vote = match model {
                        ModelPayload::DecisionTree(tree) => tree.predict_row(row)?,
                        ModelPayload::RandomForest(forest) => forest.predict_row(row)?,
                        ModelPayload::Fcnn(net) => net.predict_row(row)?,
                        ModelPayload::Lstm(_) => unreachable!("handled above"),
                    };
                    per_row.push(vote);
                }
                Ok(window_vote(&per_row))
            })
            .collect(),
    }
}

/// Full metrics plus the confusion matrix for `model` on `windows`.
pub fn evaluate(model: &ModelPayload, windows: &WindowSet) -> Result<EvalOutcome, EvalError> {
    if windows.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let predicted = predict_windows(model, windows)?;
    let truth = windows.labels();
    let num_classes = windows.class_count().max(model_classes(model));
    let confusion = ConfusionMatrix::from_labels(&truth, &predicted, num_classes)?;
    let report = compute_metrics(&truth, &predicted, num_classes)?;
    Ok(EvalOutcome { report, confusion })
}

/// Number of correctly classified windows; the cheap core of sweeps.
pub fn correct_count(model: &ModelPayload, windows: &WindowSet) -> Result<u64, EvalError> {
    let predicted = predict_windows(model, windows)?;
    Ok(windows
        .labels()
        .iter()
        .zip(&predicted)
        .filter(|(t, p)| t == p)
        .count() as u64)
}
