//! Stacked many-to-one LSTM classifier: forward pass, cross-entropy loss,
//! backpropagation through time, and the training loop.
//!
//! Windows of scaled sensor readings go in; per-driver class probabilities
//! come out of a softmax head attached to the final step of the top layer.
//! Gradients are computed analytically and are checked against central
//! finite differences in the test suite.

mod backward;
mod cell;
mod io;
mod network;
mod params;
mod train;

pub use backward::{backward, batch_gradients, Gradients, LayerGrads};
pub use cell::{cell_step, LstmState};
pub(crate) use cell::{matvec, matvec_transpose_add};
pub(crate) use network::argmax;
pub use io::{load_bundle, save_bundle, ModelBundle, ModelKind, ModelPayload, FORMAT_VERSION};
pub use network::{cross_entropy, forward, predict, softmax};
pub use params::{ClassifierHead, LstmLayerParams, LstmModel, ModelConfig};
pub use train::{train, EpochRecord, TrainingHistory};

use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("invalid model config: {0}")]
    InvalidConfig(&'static str),
    #[error("input has {got} features but the model expects {expected}")]
    FeatureMismatch { expected: usize, got: usize },
    #[error("window has {got} rows but the model expects {expected}")]
    WindowLengthMismatch { expected: usize, got: usize },
    #[error(
        "cell_step shape mismatch: x has {x_len} values (layer expects {input}), \
         state has h={h_len}/c={c_len} (layer hidden is {hidden})"
    )]
    CellShape {
        x_len: usize,
        input: usize,
        h_len: usize,
        c_len: usize,
        hidden: usize,
    },
    #[error("class label {label} out of range for {num_classes} classes")]
    InvalidLabel { label: usize, num_classes: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("validation set is empty")]
    EmptyValidationSet,
    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("cannot access model file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("model file {path} is corrupted or not a model bundle: {detail}")]
    Corrupted { path: String, detail: String },
    #[error("model file {path} has format version {found}, this build supports {supported}")]
    VersionMismatch {
        path: String,
        found: u32,
        supported: u32,
    },
}
