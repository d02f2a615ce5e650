//! Per-row fully connected classifier with ReLU hidden layers.
//!
//! Architecturally the hidden widths mirror the sequence model's
//! (`ModelConfig::hidden_sizes`), but the input is a single time step's
//! feature row — this baseline sees no temporal context at all.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eval::compute_metrics;
use crate::model::{argmax, matvec, matvec_transpose_add, softmax};
use crate::model::{EpochRecord, ModelConfig, TrainingHistory};
use crate::numerics::{AdamParams, AdamState, Matrix, SeededRng};

use super::{check_rows, BaselineError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// `fan_out x fan_in`.
    pub w: Matrix,
    pub b: Vec<f64>,
}

/// Feedforward network: ReLU hidden layers, softmax output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fcnn {
    pub config: ModelConfig,
    pub feature_count: usize,
    /// Hidden layers in order, then the output layer last.
    pub layers: Vec<DenseLayer>,
}

impl Fcnn {
    pub fn init(
        config: ModelConfig,
        feature_count: usize,
        rng: &mut SeededRng,
    ) -> Result<Self, BaselineError> {
        config
            .validate()
            .map_err(|_| BaselineError::InvalidConfig("invalid network configuration"))?;
        if feature_count == 0 {
            return Err(BaselineError::InvalidConfig("feature_count must be positive"));
        }
        let mut layers = Vec::new();
        let mut fan_in = feature_count;
        for &h in &config.hidden_sizes {
            layers.push(DenseLayer {
                w: Matrix::glorot(h, fan_in, rng)
                    .map_err(|_| BaselineError::InvalidConfig("zero-sized layer"))?,
                b: vec![0.0; h],
            });
            fan_in = h;
        }
        layers.push(DenseLayer {
            w: Matrix::glorot(config.num_classes, fan_in, rng)
                .map_err(|_| BaselineError::InvalidConfig("zero-sized layer"))?,
            b: vec![0.0; config.num_classes],
        });
        Ok(Self {
            config,
            feature_count,
            layers,
        })
    }

    /// Pre-activations and post-activations per layer, ending in logits.
    fn trace(&self, row: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut activations: Vec<Vec<f64>> = vec![row.to_vec()];
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; layer.b.len()];
            matvec(&layer.w, activations.last().unwrap(), &mut z);
            for (zk, bk) in z.iter_mut().zip(&layer.b) {
                *zk += bk;
            }
            if l < last {
                for zk in &mut z {
                    // ReLU; written so NaN propagates instead of being
                    // swallowed by f64::max, letting training detect
                    // divergence at the loss.
                    if !(*zk > 0.0) && !zk.is_nan() {
                        *zk = 0.0;
                    }
                }
                activations.push(z);
            } else {
                return (activations, z);
            }
        }
        unreachable!("network always has an output layer");
    }

    pub fn forward(&self, row: &[f64]) -> Result<Vec<f64>, BaselineError> {
        if row.len() != self.feature_count {
            return Err(BaselineError::FeatureMismatch {
                expected: self.feature_count,
                got: row.len(),
            });
        }
        let (_, logits) = self.trace(row);
        Ok(softmax(&logits))
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<(usize, Vec<f64>), BaselineError> {
        let probs = self.forward(row)?;
        Ok((argmax(&probs), probs))
    }

    fn block_lens(&self) -> Vec<usize> {
        let mut lens = Vec::new();
        for layer in &self.layers {
            lens.push(layer.w.rows() * layer.w.cols());
            lens.push(layer.b.len());
        }
        lens
    }

    fn param_blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut blocks: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.layers {
            blocks.push(layer.w.as_mut_slice());
            blocks.push(&mut layer.b);
        }
        blocks
    }
}

/// Same layout as the parameters; one entry per layer.
#[derive(Clone, Debug)]
pub struct FcnnGrads {
    pub layers: Vec<DenseLayer>,
}

impl FcnnGrads {
    fn zeros_like(net: &Fcnn) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| DenseLayer {
                    w: Matrix::zeros(l.w.rows(), l.w.cols()),
                    b: vec![0.0; l.b.len()],
                })
                .collect(),
        }
    }

    fn blocks(&self) -> Vec<&[f64]> {
        let mut blocks: Vec<&[f64]> = Vec::new();
        for layer in &self.layers {
            blocks.push(layer.w.as_slice());
            blocks.push(&layer.b);
        }
        blocks
    }

    fn add_assign(&mut self, other: &FcnnGrads) {
        for (mine, theirs) in self.layers.iter_mut().zip(&other.layers) {
            for (a, b) in mine.w.as_mut_slice().iter_mut().zip(theirs.w.as_slice()) {
                *a += b;
            }
            for (a, b) in mine.b.iter_mut().zip(&theirs.b) {
                *a += b;
            }
        }
    }

    fn scale(&mut self, factor: f64) {
        for layer in &mut self.layers {
            for g in layer.w.as_mut_slice() {
                *g *= factor;
            }
            for g in &mut layer.b {
                *g *= factor;
            }
        }
    }
}

/// Cross-entropy loss and exact gradients for one row.
pub fn fcnn_backward(
    net: &Fcnn,
    row: &[f64],
    label: usize,
) -> Result<(f64, FcnnGrads), BaselineError> {
    if label >= net.config.num_classes {
        return Err(BaselineError::InvalidLabel {
            label,
            num_classes: net.config.num_classes,
        });
    }
    let (activations, logits) = net.trace(row);
    let probs = softmax(&logits);
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    let loss = lse - logits[label];

    let mut grads = FcnnGrads::zeros_like(net);
    let mut delta = probs;
    delta[label] -= 1.0;

    for l in (0..net.layers.len()).rev() {
        let input = &activations[l];
        let lg = &mut grads.layers[l];
        for (r, &d) in delta.iter().enumerate() {
            lg.b[r] += d;
            for (slot, &a) in lg.w.row_mut(r).iter_mut().zip(input) {
                *slot += d * a;
            }
        }
        if l > 0 {
            let mut upstream = vec![0.0; input.len()];
            matvec_transpose_add(&net.layers[l].w, &delta, &mut upstream);
            // ReLU gate: activations are already rectified, so a positive
            // activation marks a positive pre-activation.
            for (u, &a) in upstream.iter_mut().zip(input.iter()) {
                if a <= 0.0 {
                    *u = 0.0;
                }
            }
            delta = upstream;
        }
    }
    Ok((loss, grads))
}

fn batch_fcnn_gradients(
    net: &Fcnn,
    rows: &[Vec<f64>],
    labels: &[usize],
    batch: &[usize],
) -> Result<(f64, FcnnGrads), BaselineError> {
    const CHUNK: usize = 256;
    let chunk_results: Vec<Result<(f64, FcnnGrads), BaselineError>> = batch
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut loss_sum = 0.0;
            let mut grad_sum = FcnnGrads::zeros_like(net);
            for &i in chunk {
                let (loss, grads) = fcnn_backward(net, &rows[i], labels[i])?;
                loss_sum += loss;
                grad_sum.add_assign(&grads);
            }
            Ok((loss_sum, grad_sum))
        })
        .collect();
    let mut total_loss = 0.0;
    let mut total = FcnnGrads::zeros_like(net);
    for result in chunk_results {
        let (loss, grads) = result?;
        total_loss += loss;
        total.add_assign(&grads);
    }
    let n = batch.len() as f64;
    total.scale(1.0 / n);
    Ok((total_loss / n, total))
}

fn fcnn_val_macro_f1(net: &Fcnn, rows: &[Vec<f64>], labels: &[usize]) -> Result<f64, BaselineError> {
    let predicted: Vec<usize> = rows
        .par_iter()
        .map(|r| net.predict_row(r).map(|(c, _)| c))
        .collect::<Result<Vec<_>, _>>()?;
    let report = compute_metrics(labels, &predicted, net.config.num_classes)
        .expect("validated labels cannot fail metrics");
    Ok(report.macro_f1)
}

/// Trains the per-row network with mini-batch Adam and the same
/// validation-snapshot early stopping as the sequence model.
pub fn train_fcnn(
    train_rows: &[Vec<f64>],
    train_labels: &[usize],
    val_rows: &[Vec<f64>],
    val_labels: &[usize],
    config: ModelConfig,
    seed: u64,
) -> Result<(Fcnn, TrainingHistory), BaselineError> {
    let d = check_rows(train_rows, train_labels, config.num_classes)?;
    if val_rows.is_empty() {
        return Err(BaselineError::EmptyValidationSet);
    }
    check_rows(val_rows, val_labels, config.num_classes).map_err(|e| match e {
        BaselineError::EmptyTrainingSet => BaselineError::EmptyValidationSet,
        other => other,
    })?;

    let mut rng = SeededRng::new(seed);
    let mut net = Fcnn::init(config.clone(), d, &mut rng)?;
    let mut adam = AdamState::new(
        &net.block_lens(),
        AdamParams {
            learning_rate: config.learning_rate,
            ..AdamParams::default()
        },
    );

    let mut history = TrainingHistory::default();
    let mut best_net = net.clone();
    let mut best_f1 = f64::NEG_INFINITY;
    let mut epochs_without_improvement = 0usize;

    let mut order: Vec<usize> = (0..train_rows.len()).collect();
    for epoch in 0..config.max_epochs {
        rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let (loss, mut grads) = batch_fcnn_gradients(&net, train_rows, train_labels, batch)?;
            if !loss.is_finite() {
                return Err(BaselineError::Divergence { epoch });
            }
            if let Some(clip) = config.clip_norm {
                let norm: f64 = grads
                    .blocks()
                    .iter()
                    .flat_map(|b| b.iter())
                    .map(|g| g * g)
                    .sum::<f64>()
                    .sqrt();
                if norm > clip {
                    grads.scale(clip / norm);
                }
            }
            let mut params = net.param_blocks_mut();
            adam.update(&mut params, &grads.blocks())
                .expect("gradient blocks mirror parameter blocks");
            loss_sum += loss * batch.len() as f64;
        }
        let train_loss = loss_sum / train_rows.len() as f64;

        let val_macro_f1 = fcnn_val_macro_f1(&net, val_rows, val_labels)?;
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_macro_f1,
        });

        if val_macro_f1 > best_f1 {
            best_f1 = val_macro_f1;
            best_net = net.clone();
            epochs_without_improvement = 0;
        } else {
            epochs_without_improvement += 1;
            if epochs_without_improvement >= config.early_stop_patience {
                break;
            }
        }
    }

    if history.epochs.is_empty() {
        best_net = net;
    }
    Ok((best_net, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(hidden: Vec<usize>, classes: usize) -> ModelConfig {
        ModelConfig {
            hidden_sizes: hidden,
            num_classes: classes,
            learning_rate: 1e-2,
            batch_size: 16,
            max_epochs: 40,
            early_stop_patience: 40,
            ..ModelConfig::default()
        }
    }

    fn blob_data(n_per: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = SeededRng::new(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2usize {
            let center = if class == 0 { 0.2 } else { 0.8 };
            for _ in 0..n_per {
                rows.push(vec![
                    center + rng.next_range(-0.1, 0.1),
                    center + rng.next_range(-0.1, 0.1),
                ]);
                labels.push(class);
            }
        }
        (rows, labels)
    }

    #[test]
    fn zero_output_layer_gives_uniform_probabilities() {
        let mut rng = SeededRng::new(1);
        let mut net = Fcnn::init(tiny_config(vec![4], 3), 2, &mut rng).unwrap();
        let last = net.layers.len() - 1;
        net.layers[last] = DenseLayer {
            w: Matrix::zeros(3, 4),
            b: vec![0.0; 3],
        };
        let probs = net.forward(&[0.3, -0.8]).unwrap();
        for p in probs {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gradients_match_central_finite_differences() {
        let mut rng = SeededRng::new(17);
        let mut net = Fcnn::init(tiny_config(vec![4, 3], 2), 3, &mut rng).unwrap();
        let row = vec![0.4, -0.2, 0.9];
        let label = 1;

        let (_, grads) = fcnn_backward(&net, &row, label).unwrap();
        let analytic: Vec<f64> = grads
            .blocks()
            .iter()
            .flat_map(|b| b.iter().copied())
            .collect();

        let eps = 1e-5;
        let lens = net.block_lens();
        let mut numeric = Vec::with_capacity(analytic.len());
        for bi in 0..lens.len() {
            for j in 0..lens[bi] {
                let orig = net.param_blocks_mut()[bi][j];
                net.param_blocks_mut()[bi][j] = orig + eps;
                let up = -net.forward(&row).unwrap()[label].ln();
                net.param_blocks_mut()[bi][j] = orig - eps;
                let down = -net.forward(&row).unwrap()[label].ln();
                net.param_blocks_mut()[bi][j] = orig;
                numeric.push((up - down) / (2.0 * eps));
            }
        }

        let mut worst = 0.0f64;
        for (&a, &n) in analytic.iter().zip(&numeric) {
            let rel = (a - n).abs() / (a.abs() + n.abs()).max(1e-8);
            worst = worst.max(rel);
        }
        assert!(worst < 1e-4, "worst relative gradient error {worst}");
    }

    #[test]
    fn separable_blobs_reach_high_training_accuracy() {
        let (rows, labels) = blob_data(60, 3);
        let (val_rows, val_labels) = blob_data(20, 4);
        let (net, _) = train_fcnn(
            &rows,
            &labels,
            &val_rows,
            &val_labels,
            tiny_config(vec![8], 2),
            5,
        )
        .unwrap();
        let correct = rows
            .iter()
            .zip(&labels)
            .filter(|(r, &l)| net.predict_row(r).unwrap().0 == l)
            .count();
        let acc = correct as f64 / rows.len() as f64;
        assert!(acc >= 0.95, "train accuracy {acc}");
    }

    #[test]
    fn training_is_reproducible_per_seed() {
        let (rows, labels) = blob_data(20, 8);
        let (val_rows, val_labels) = blob_data(8, 9);
        let config = ModelConfig {
            max_epochs: 3,
            ..tiny_config(vec![4], 2)
        };
        let (n1, h1) = train_fcnn(&rows, &labels, &val_rows, &val_labels, config.clone(), 2).unwrap();
        let (n2, h2) = train_fcnn(&rows, &labels, &val_rows, &val_labels, config, 2).unwrap();
        assert_eq!(n1, n2);
        assert_eq!(h1, h2);
    }

    #[test]
    fn non_finite_input_reports_divergence() {
        let (mut rows, labels) = blob_data(10, 11);
        rows[0][0] = f64::NAN;
        let (val_rows, val_labels) = blob_data(4, 12);
        assert!(matches!(
            train_fcnn(&rows, &labels, &val_rows, &val_labels, tiny_config(vec![4], 2), 1),
            Err(BaselineError::Divergence { epoch: 0 })
        ));
    }

    #[test]
    fn empty_sets_are_distinct_errors() {
        let (rows, labels) = blob_data(4, 13);
        assert!(matches!(
            train_fcnn(&[], &[], &rows, &labels, tiny_config(vec![4], 2), 0),
            Err(BaselineError::EmptyTrainingSet)
        ));
        assert!(matches!(
            train_fcnn(&rows, &labels, &[], &[], tiny_config(vec![4], 2), 0),
            Err(BaselineError::EmptyValidationSet)
        ));
    }
}
