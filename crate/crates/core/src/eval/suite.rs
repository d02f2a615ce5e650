//! Trains the full comparison suite — sequence model plus the three
//! per-row baselines — on one dataset, optionally after corrupting the
//! training data itself.

use serde::Serialize;

use crate::baselines::{train_fcnn, train_forest, train_tree, ForestConfig, TreeConfig};
use crate::corruption::NoiseSpec;
use crate::data::{FeatureStats, WindowSet};
use crate::eval::{evaluate, EvalError};
use crate::model::{train, ModelConfig, ModelKind, ModelPayload};

/// Hyperparameters for every model kind trained side by side.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub lstm: ModelConfig,
    pub fcnn: ModelConfig,
    pub tree: TreeConfig,
    pub forest: ForestConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            lstm: ModelConfig::default(),
            fcnn: ModelConfig::default(),
            tree: TreeConfig::default(),
            forest: ForestConfig::default(),
        }
    }
}

/// Flattens windows into one (row, window label) pair per timestep, the
/// training form for the per-row baselines.
pub fn windows_to_rows(windows: &WindowSet) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rows = Vec::with_capacity(windows.len() * windows.window_length);
    let mut labels = Vec::with_capacity(rows.capacity());
    for w in &windows.windows {
        for t in 0..w.data.rows() {
            rows.push(w.data.row(t).to_vec());
            labels.push(w.label);
        }
    }
    (rows, labels)
}

/// Trains all four model kinds on the same split and returns them in a
/// fixed order: lstm, decision_tree, random_forest, fcnn.
///
/// `num_classes` and `window_length` are taken from the training windows,
/// overriding whatever the configs carry, so one `SuiteConfig` works for
/// any dataset.
pub fn train_suite(
    train_windows: &WindowSet,
    val_windows: &WindowSet,
    cfg: &SuiteConfig,
    seed: u64,
) -> Result<Vec<(String, ModelPayload)>, EvalError> {
    let num_classes = train_windows.class_count();

    let mut lstm_cfg = cfg.lstm.clone();
    lstm_cfg.num_classes = num_classes;
    lstm_cfg.window_length = train_windows.window_length;
    let (lstm, _) = train(train_windows, val_windows, lstm_cfg, seed)?;

    let (train_rows, train_labels) = windows_to_rows(train_windows);
    let (val_rows, val_labels) = windows_to_rows(val_windows);

    let tree = train_tree(&train_rows, &train_labels, num_classes, cfg.tree)?;
    let forest = train_forest(
        &train_rows,
        &train_labels,
        num_classes,
        cfg.forest.clone(),
        seed,
    )?;

    let mut fcnn_cfg = cfg.fcnn.clone();
    fcnn_cfg.num_classes = num_classes;
    fcnn_cfg.window_length = train_windows.window_length;
    let (fcnn, _) = train_fcnn(
        &train_rows,
        &train_labels,
        &val_rows,
        &val_labels,
        fcnn_cfg,
        seed,
    )?;

    Ok(vec![
        (ModelKind::Lstm.as_str().to_string(), ModelPayload::Lstm(lstm)),
        (
            ModelKind::DecisionTree.as_str().to_string(),
            ModelPayload::DecisionTree(tree),
        ),
        (
            ModelKind::RandomForest.as_str().to_string(),
            ModelPayload::RandomForest(forest),
        ),
        (ModelKind::Fcnn.as_str().to_string(), ModelPayload::Fcnn(fcnn)),
    ])
}

/// One line of the corrupted-training comparison: a model kind and its
/// scores on the corrupted test set.
#[derive(Clone, Debug, Serialize)]
pub struct CorruptedTrainingRow {
    pub model: String,
    pub accuracy: f64,
    pub macro_f1: f64,
}

/// Trains the whole suite on noise-corrupted data and scores it on an
/// equally corrupted test set.
///
/// Each split gets its own corruption stream: train uses `noise.seed`,
/// validation `noise.seed + 1`, test `noise.seed + 2`. A zero-level or
/// zero-severity spec reduces to the standard clean training path.
pub fn train_on_corrupted(
    train_windows: &WindowSet,
    val_windows: &WindowSet,
    test_windows: &WindowSet,
    noise: &NoiseSpec,
    stats: &FeatureStats,
    cfg: &SuiteConfig,
    seed: u64,
) -> Result<(Vec<(String, ModelPayload)>, Vec<CorruptedTrainingRow>), EvalError> {
    let part = |windows: &WindowSet, offset: u64| {
        let spec = NoiseSpec {
            seed: noise.seed + offset,
            ..*noise
        };
        crate::corruption::inject_noise_windows(windows, &spec, stats)
    };
    let stressed_train = part(train_windows, 0)?;
    let stressed_val = part(val_windows, 1)?;
    let stressed_test = part(test_windows, 2)?;

    let models = train_suite(&stressed_train, &stressed_val, cfg, seed)?;
    let mut report = Vec::with_capacity(models.len());
    for (name, model) in &models {
        let outcome = evaluate(model, &stressed_test)?;
        report.push(CorruptedTrainingRow {
            model: name.clone(),
            accuracy: outcome.report.accuracy,
            macro_f1: outcome.report.macro_f1,
        });
    }
    Ok((models, report))
}
