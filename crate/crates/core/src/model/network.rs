//! Whole-network forward pass, softmax head, loss, and prediction.

use crate::numerics::Matrix;

use super::cell::{matvec, step_with_trace, StepTrace};
use super::{LstmModel, ModelError};

/// Full record of one forward pass, consumed by the backward pass.
pub(crate) struct ForwardTrace {
    /// `traces[layer][time]`.
    pub traces: Vec<Vec<StepTrace>>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Numerically stable softmax: shifts by the max logit before
/// exponentiating.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p /= sum;
    }
    out
}

/// `-ln(softmax(logits)[label])` via log-sum-exp, avoiding the underflow of
/// materializing tiny probabilities first.
pub(crate) fn nll_from_logits(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max
        + logits
            .iter()
            .map(|&z| (z - max).exp())
            .sum::<f64>()
            .ln();
    lse - logits[label]
}

/// Cross-entropy of an already-normalized probability vector against the
/// true class.
pub fn cross_entropy(probs: &[f64], label: usize) -> Result<f64, ModelError> {
    if label >= probs.len() {
        return Err(ModelError::InvalidLabel {
            label,
            num_classes: probs.len(),
        });
    }
    Ok(-probs[label].ln())
}

pub(crate) fn forward_trace(window: &Matrix, model: &LstmModel) -> ForwardTrace {
    let steps = window.rows();
    let mut traces: Vec<Vec<StepTrace>> = Vec::with_capacity(model.layers.len());

    for (l, layer) in model.layers.iter().enumerate() {
        let hidden = layer.hidden();
        let mut layer_traces = Vec::with_capacity(steps);
        let mut h = vec![0.0; hidden];
        let mut c = vec![0.0; hidden];
        for t in 0..steps {
            let trace = if l == 0 {
                step_with_trace(window.row(t), &h, &c, layer)
            } else {
                step_with_trace(&traces[l - 1][t].h, &h, &c, layer)
            };
            h.copy_from_slice(&trace.h);
            c.copy_from_slice(&trace.c);
            layer_traces.push(trace);
        }
        traces.push(layer_traces);
    }

    let last_h = &traces.last().unwrap().last().unwrap().h;
    let mut logits = model.head.b_out.clone();
    let mut wh = vec![0.0; logits.len()];
    matvec(&model.head.w_out, last_h, &mut wh);
    for (z, w) in logits.iter_mut().zip(&wh) {
        *z += w;
    }
    let probs = softmax(&logits);

    ForwardTrace {
        traces,
        logits,
        probs,
    }
}

/// Runs the stacked recurrence over every time step (layer `l` consuming
/// layer `l-1`'s hidden sequence) and returns class probabilities from the
/// final step of the top layer.
pub fn forward(window: &Matrix, model: &LstmModel) -> Result<Vec<f64>, ModelError> {
    model.check_window(window)?;
    Ok(forward_trace(window, model).probs)
}

/// Class prediction: argmax of [`forward`], ties broken toward the lowest
/// class index.
pub fn predict(window: &Matrix, model: &LstmModel) -> Result<(usize, Vec<f64>), ModelError> {
    let probs = forward(window, model)?;
    Ok((argmax(&probs), probs))
}

/// Index of the largest value; the first of any exact ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ClassifierHead, ModelConfig};
    use crate::numerics::SeededRng;

    fn tiny_model(seed: u64) -> LstmModel {
        let config = ModelConfig {
            hidden_sizes: vec![2],
            window_length: 3,
            num_classes: 2,
            ..ModelConfig::default()
        };
        let mut rng = SeededRng::new(seed);
        LstmModel::init(config, 2, &mut rng).unwrap()
    }

    fn random_window(rng: &mut SeededRng, rows: usize, cols: usize) -> Matrix {
        let data = (0..rows * cols).map(|_| rng.next_range(-1.0, 1.0)).collect();
        Matrix::from_vec(rows, cols, data)
    }

    #[test]
    fn zero_head_gives_uniform_probabilities() {
        let mut model = tiny_model(11);
        model.head = ClassifierHead {
            w_out: Matrix::zeros(2, 2),
            b_out: vec![0.0, 0.0],
        };
        let mut rng = SeededRng::new(5);
        let window = random_window(&mut rng, 3, 2);
        let probs = forward(&window, &model).unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-15);
        assert!((probs[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn probabilities_form_a_simplex() {
        let model = tiny_model(42);
        let mut rng = SeededRng::new(43);
        for _ in 0..20 {
            let window = random_window(&mut rng, 3, 2);
            let probs = forward(&window, &model).unwrap();
            assert!(probs.iter().all(|&p| p >= 0.0));
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn forward_matches_unrolled_scalar_trace() {
        // Re-derive the whole forward pass with scalar arithmetic only --
        // no matrix or cell code -- and compare.
        let model = tiny_model(7);
        let mut rng = SeededRng::new(8);
        let window = random_window(&mut rng, 3, 2);

        let sig = |z: f64| 1.0 / (1.0 + (-z).exp());
        let layer = &model.layers[0];
        let (mut h, mut c) = ([0.0f64; 2], [0.0f64; 2]);
        for t in 0..3 {
            let x = [window.get(t, 0), window.get(t, 1)];
            let concat = [h[0], h[1], x[0], x[1]];
            let mut next_h = [0.0; 2];
            let mut next_c = [0.0; 2];
            for k in 0..2 {
                let dot = |w: &Matrix| -> f64 {
                    (0..4).map(|j| w.get(k, j) * concat[j]).sum()
                };
                let f = sig(dot(&layer.w_f) + layer.b_f[k]);
                let i = sig(dot(&layer.w_i) + layer.b_i[k]);
                let chat = (dot(&layer.w_c) + layer.b_c[k]).tanh();
                let o = sig(dot(&layer.w_o) + layer.b_o[k]);
                next_c[k] = f * c[k] + i * chat;
                next_h[k] = o * next_c[k].tanh();
            }
            h = next_h;
            c = next_c;
        }
        let mut logits = [0.0f64; 2];
        for k in 0..2 {
            logits[k] = model.head.b_out[k]
                + model.head.w_out.get(k, 0) * h[0]
                + model.head.w_out.get(k, 1) * h[1];
        }
        let shift = logits[0].max(logits[1]);
        let e0 = (logits[0] - shift).exp();
        let e1 = (logits[1] - shift).exp();
        let expect = [e0 / (e0 + e1), e1 / (e0 + e1)];

        let got = forward(&window, &model).unwrap();
        assert!((got[0] - expect[0]).abs() < 1e-10);
        assert!((got[1] - expect[1]).abs() < 1e-10);
    }

    #[test]
    fn loss_examples() {
        assert_eq!(cross_entropy(&[1.0, 0.0, 0.0], 0).unwrap(), 0.0);
        let uniform = [0.25; 4];
        for label in 0..4 {
            assert!((cross_entropy(&uniform, label).unwrap() - 4.0_f64.ln()).abs() < 1e-12);
        }
        let mut probs = vec![0.75 / 9.0; 10];
        probs[3] = 0.25;
        let loss = cross_entropy(&probs, 3).unwrap();
        assert!((loss - 1.3863).abs() < 1e-4);
        assert!((loss - (-(0.25_f64.ln()))).abs() < 1e-12);
    }

    #[test]
    fn loss_from_logits_matches_direct_log() {
        let logits = [0.3, -1.2, 2.5, 0.0];
        let probs = softmax(&logits);
        for label in 0..4 {
            let direct = -probs[label].ln();
            assert!((nll_from_logits(&logits, label) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_label_is_an_error() {
        assert!(matches!(
            cross_entropy(&[0.5, 0.5], 2),
            Err(ModelError::InvalidLabel { label: 2, num_classes: 2 })
        ));
    }

    #[test]
    fn predict_is_argmax_with_low_index_ties() {
        assert_eq!(argmax(&[0.1, 0.7, 0.2]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        let model = tiny_model(3);
        let mut rng = SeededRng::new(4);
        let window = random_window(&mut rng, 3, 2);
        let (class, probs) = predict(&window, &model).unwrap();
        assert_eq!(class, argmax(&probs));
        assert_eq!(probs, forward(&window, &model).unwrap());
    }

    #[test]
    fn permuting_head_rows_permutes_probabilities() {
        let model = tiny_model(21);
        let mut swapped = model.clone();
        let w = &model.head.w_out;
        swapped.head.w_out = Matrix::from_rows(&[w.row(1).to_vec(), w.row(0).to_vec()]);
        swapped.head.b_out = vec![model.head.b_out[1], model.head.b_out[0]];
        let mut rng = SeededRng::new(22);
        let window = random_window(&mut rng, 3, 2);
        let p = forward(&window, &model).unwrap();
        let q = forward(&window, &swapped).unwrap();
        assert!((p[0] - q[1]).abs() < 1e-15);
        assert!((p[1] - q[0]).abs() < 1e-15);
    }

    #[test]
    fn wrong_window_shape_is_an_error() {
        let model = tiny_model(1);
        let bad_cols = Matrix::zeros(3, 5);
        assert!(matches!(
            forward(&bad_cols, &model),
            Err(ModelError::FeatureMismatch { expected: 2, got: 5 })
        ));
        let bad_rows = Matrix::zeros(4, 2);
        assert!(matches!(
            forward(&bad_rows, &model),
            Err(ModelError::WindowLengthMismatch { expected: 3, got: 4 })
        ));
    }
}
