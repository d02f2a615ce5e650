//! Evaluation: confusion matrices and precision/recall/F1, robustness
//! sweeps under injected corruption, corrupted-data training comparisons,
//! architecture grid search, and report emission.

pub(crate) mod evaluate;
mod metrics;
mod report;
mod search;
mod suite;
mod sweep;

pub use evaluate::{correct_count, evaluate, predict_windows, EvalOutcome};
pub use metrics::{compute_metrics, ClassMetrics, ConfusionMatrix, MetricsReport};
pub use report::emit_report;
pub use search::{grid_search, GridSearchRow, DEFAULT_GRID_EPOCH_BUDGET, DEFAULT_WINDOW_GRID};
pub use suite::{
    train_on_corrupted, train_suite, windows_to_rows, CorruptedTrainingRow, SuiteConfig,
};
pub use sweep::{
    sweep_anomaly, sweep_noise, sweep_noise_level, SweepPoint, SweepResult, DEFAULT_ANOMALY_GRID,
    DEFAULT_NOISE_GRID, DEFAULT_REPEATS,
};

use thiserror::Error;

use crate::baselines::BaselineError;
use crate::corruption::CorruptionError;
use crate::data::DataError;
use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("label sequences differ in length: {truth} true vs {predicted} predicted")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("cannot compute metrics over zero predictions")]
    EmptyInput,
    #[error("label {label} out of range for {num_classes} classes")]
    InvalidLabel { label: usize, num_classes: usize },
    #[error("grid of evaluation points is empty")]
    EmptyGrid,
    #[error("no models given to evaluate")]
    NoModels,
    #[error("sweep needs at least one repeat")]
    NoRepeats,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Corruption(#[from] CorruptionError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}
