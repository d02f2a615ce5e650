//! Parameter containers and initialization for the stacked LSTM.

use serde::{Deserialize, Serialize};

use crate::numerics::{Matrix, SeededRng};

use super::ModelError;

/// Hyperparameters for architecture and training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Hidden width of each stacked recurrent layer, bottom to top.
    pub hidden_sizes: Vec<usize>,
    pub window_length: usize,
    pub num_classes: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop after this many epochs without a validation improvement.
    pub early_stop_patience: usize,
    /// Optional global L2 gradient clipping threshold; `None` disables it.
    pub clip_norm: Option<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden_sizes: vec![160, 200],
            window_length: 16,
            num_classes: 2,
            learning_rate: 1e-3,
            batch_size: 64,
            max_epochs: 200,
            early_stop_patience: 10,
            clip_norm: None,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.hidden_sizes.is_empty() {
            return Err(ModelError::InvalidConfig("hidden_sizes must be non-empty"));
        }
        if self.hidden_sizes.iter().any(|&h| h == 0) {
            return Err(ModelError::InvalidConfig("hidden sizes must be positive"));
        }
        if self.num_classes < 2 {
            return Err(ModelError::InvalidConfig("need at least 2 classes"));
        }
        if self.window_length < 2 {
            return Err(ModelError::InvalidConfig("window_length must be at least 2"));
        }
        if self.batch_size == 0 {
            return Err(ModelError::InvalidConfig("batch_size must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(ModelError::InvalidConfig("learning_rate must be positive"));
        }
        Ok(())
    }
}

/// Weights of the forget, input, candidate, and output gates of one layer.
/// Each matrix is `hidden x (hidden + input)` and acts on the concatenation
/// `[h_prev, x_t]` (hidden part first).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmLayerParams {
    pub w_f: Matrix,
    pub w_i: Matrix,
    pub w_c: Matrix,
    pub w_o: Matrix,
    pub b_f: Vec<f64>,
    pub b_i: Vec<f64>,
    pub b_c: Vec<f64>,
    pub b_o: Vec<f64>,
}

impl LstmLayerParams {
    /// Glorot-uniform weights; zero biases except the forget gate, which
    /// starts at 1 so early training does not erase the cell state.
    pub fn init(input_size: usize, hidden: usize, rng: &mut SeededRng) -> Result<Self, ModelError> {
        let cols = hidden + input_size;
        Ok(Self {
            w_f: Matrix::glorot(hidden, cols, rng)?,
            w_i: Matrix::glorot(hidden, cols, rng)?,
            w_c: Matrix::glorot(hidden, cols, rng)?,
            w_o: Matrix::glorot(hidden, cols, rng)?,
            b_f: vec![1.0; hidden],
            b_i: vec![0.0; hidden],
            b_c: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
        })
    }

    /// All-zero parameters (useful for hand-checkable traces).
    pub fn zeros(input_size: usize, hidden: usize) -> Self {
        let cols = hidden + input_size;
        Self {
            w_f: Matrix::zeros(hidden, cols),
            w_i: Matrix::zeros(hidden, cols),
            w_c: Matrix::zeros(hidden, cols),
            w_o: Matrix::zeros(hidden, cols),
            b_f: vec![0.0; hidden],
            b_i: vec![0.0; hidden],
            b_c: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_f.rows()
    }

    pub fn input_size(&self) -> usize {
        self.w_f.cols() - self.w_f.rows()
    }
}

/// Dense softmax head mapping the top layer's final hidden state to class
/// logits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierHead {
    /// `num_classes x last_hidden`.
    pub w_out: Matrix,
    pub b_out: Vec<f64>,
}

impl ClassifierHead {
    pub fn init(
        last_hidden: usize,
        num_classes: usize,
        rng: &mut SeededRng,
    ) -> Result<Self, ModelError> {
        Ok(Self {
            w_out: Matrix::glorot(num_classes, last_hidden, rng)?,
            b_out: vec![0.0; num_classes],
        })
    }

    pub fn num_classes(&self) -> usize {
        self.w_out.rows()
    }
}

/// A stacked many-to-one LSTM classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmModel {
    pub config: ModelConfig,
    pub feature_count: usize,
    pub layers: Vec<LstmLayerParams>,
    pub head: ClassifierHead,
}

impl LstmModel {
    /// Fresh model with seeded Glorot weights. Layer `l` consumes the
    /// hidden sequence of layer `l - 1`; layer 0 consumes the features.
    pub fn init(
        config: ModelConfig,
        feature_count: usize,
        rng: &mut SeededRng,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        if feature_count == 0 {
            return Err(ModelError::InvalidConfig("feature_count must be positive"));
        }
        let mut layers = Vec::with_capacity(config.hidden_sizes.len());
        let mut input = feature_count;
        for &hidden in &config.hidden_sizes {
            layers.push(LstmLayerParams::init(input, hidden, rng)?);
            input = hidden;
        }
        let head = ClassifierHead::init(input, config.num_classes, rng)?;
        Ok(Self {
            config,
            feature_count,
            layers,
            head,
        })
    }

    /// Lengths of every parameter block in canonical order: per layer
    /// `w_f, w_i, w_c, w_o, b_f, b_i, b_c, b_o`, then `w_out, b_out`.
    /// The optimizer and the gradient container use the same order.
    pub fn block_lens(&self) -> Vec<usize> {
        let mut lens = Vec::new();
        for layer in &self.layers {
            let w = layer.w_f.rows() * layer.w_f.cols();
            let b = layer.b_f.len();
            lens.extend([w, w, w, w, b, b, b, b]);
        }
        lens.push(self.head.w_out.rows() * self.head.w_out.cols());
        lens.push(self.head.b_out.len());
        lens
    }

    /// Mutable views of every parameter block, in [`block_lens`] order.
    ///
    /// [`block_lens`]: LstmModel::block_lens
    pub fn param_blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut blocks: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.layers {
            blocks.push(layer.w_f.as_mut_slice());
            blocks.push(layer.w_i.as_mut_slice());
            blocks.push(layer.w_c.as_mut_slice());
            blocks.push(layer.w_o.as_mut_slice());
            blocks.push(&mut layer.b_f);
            blocks.push(&mut layer.b_i);
            blocks.push(&mut layer.b_c);
            blocks.push(&mut layer.b_o);
        }
        blocks.push(self.head.w_out.as_mut_slice());
        blocks.push(&mut self.head.b_out);
        blocks
    }

    /// Read-only views of every parameter block, in [`block_lens`] order.
    ///
    /// [`block_lens`]: LstmModel::block_lens
    pub fn param_blocks(&self) -> Vec<&[f64]> {
        let mut blocks: Vec<&[f64]> = Vec::new();
        for layer in &self.layers {
            blocks.push(layer.w_f.as_slice());
            blocks.push(layer.w_i.as_slice());
            blocks.push(layer.w_c.as_slice());
            blocks.push(layer.w_o.as_slice());
            blocks.push(&layer.b_f);
            blocks.push(&layer.b_i);
            blocks.push(&layer.b_c);
            blocks.push(&layer.b_o);
        }
        blocks.push(self.head.w_out.as_slice());
        blocks.push(&self.head.b_out);
        blocks
    }

    pub fn check_window(&self, window: &Matrix) -> Result<(), ModelError> {
        if window.cols() != self.feature_count {
            return Err(ModelError::FeatureMismatch {
                expected: self.feature_count,
                got: window.cols(),
            });
        }
        if window.rows() != self.config.window_length {
            return Err(ModelError::WindowLengthMismatch {
                expected: self.config.window_length,
                got: window.rows(),
            });
        }
        Ok(())
    }
}
