//! Mini-batch training with validation-based snapshot selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::WindowSet;
use crate::eval::compute_metrics;
use crate::numerics::{AdamParams, AdamState, Matrix, SeededRng};

use super::backward::batch_gradients;
use super::network::{argmax, forward};
use super::{LstmModel, ModelConfig, ModelError};

/// One epoch's record: mean training loss and validation macro-F1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_macro_f1: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochRecord>,
}

fn validation_macro_f1(model: &LstmModel, val: &WindowSet) -> Result<f64, ModelError> {
    let predicted: Vec<usize> = val
        .windows
        .par_iter()
        .map(|w| forward(&w.data, model).map(|p| argmax(&p)))
        .collect::<Result<Vec<_>, _>>()?;
    let truth = val.labels();
    // Shapes were validated up front, so metric errors cannot occur here.
    let report = compute_metrics(&truth, &predicted, val.class_count())
        .expect("validation labels are in range by construction");
    Ok(report.macro_f1)
}

/// Trains a fresh seeded model with mini-batch Adam.
///
/// Each epoch shuffles the training windows, steps through batches of
/// `config.batch_size`, then scores macro-F1 on the validation set. The
/// best-scoring snapshot is kept and returned; training stops at
/// `max_epochs` or after `early_stop_patience` consecutive epochs without
/// a validation improvement. A non-finite batch loss aborts with
/// [`ModelError::Divergence`] naming the epoch.
pub fn train(
    train_windows: &WindowSet,
    val_windows: &WindowSet,
    config: ModelConfig,
    seed: u64,
) -> Result<(LstmModel, TrainingHistory), ModelError> {
    config.validate()?;
    if train_windows.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    if val_windows.is_empty() {
        return Err(ModelError::EmptyValidationSet);
    }
    for set in [train_windows, val_windows] {
        if set.window_length != config.window_length {
            return Err(ModelError::WindowLengthMismatch {
                expected: config.window_length,
                got: set.window_length,
            });
        }
        if set.feature_count != train_windows.feature_count {
            return Err(ModelError::FeatureMismatch {
                expected: train_windows.feature_count,
                got: set.feature_count,
            });
        }
    }
    if train_windows.class_count() != config.num_classes {
        return Err(ModelError::InvalidConfig(
            "num_classes differs from the window label set",
        ));
    }

    let mut rng = SeededRng::new(seed);
    let mut model = LstmModel::init(config.clone(), train_windows.feature_count, &mut rng)?;
    let mut adam = AdamState::new(
        &model.block_lens(),
        AdamParams {
            learning_rate: config.learning_rate,
            ..AdamParams::default()
        },
    );

    let mut history = TrainingHistory::default();
    let mut best_model = model.clone();
    let mut best_f1 = f64::NEG_INFINITY;
    let mut epochs_without_improvement = 0usize;

    let mut order: Vec<usize> = (0..train_windows.len()).collect();
    for epoch in 0..config.max_epochs {
        rng.shuffle(&mut order);

        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let samples: Vec<(&Matrix, usize)> = batch
                .iter()
                .map(|&i| {
                    let w = &train_windows.windows[i];
                    (&w.data, w.label)
                })
                .collect();
            let (loss, mut grads) = batch_gradients(&samples, &model)?;
            if !loss.is_finite() {
                return Err(ModelError::Divergence { epoch });
            }
            if let Some(clip) = config.clip_norm {
                let norm = grads.global_norm();
                if norm > clip {
                    grads.scale(clip / norm);
                }
            }
            let mut params = model.param_blocks_mut();
            adam.update(&mut params, &grads.blocks())?;
            loss_sum += loss * batch.len() as f64;
        }
        let train_loss = loss_sum / train_windows.len() as f64;

        let val_macro_f1 = validation_macro_f1(&model, val_windows)?;
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_macro_f1,
        });

        if val_macro_f1 > best_f1 {
            best_f1 = val_macro_f1;
            best_model = model.clone();
            epochs_without_improvement = 0;
        } else {
            epochs_without_improvement += 1;
            if epochs_without_improvement >= config.early_stop_patience {
                break;
            }
        }
    }

    if history.epochs.is_empty() {
        // max_epochs == 0: hand back the freshly initialized model.
        best_model = model;
    }
    Ok((best_model, history))
}
