//! Minimal deterministic dense linear algebra, seeded random numbers and
//! the Adam optimizer. Everything downstream (LSTM, FCNN, forests, noise
//! injection) builds on these primitives.

mod adam;
mod matrix;
mod rng;

pub use adam::{AdamParams, AdamState};
pub use matrix::{sigmoid_scalar, Matrix};
pub use rng::{SeededRng, RNG_ALGORITHM_ID};

use thiserror::Error;

/// Errors raised by the numeric primitives.
#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("shape mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    ShapeMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix dimensions must be nonzero, got {rows}x{cols}")]
    ZeroDimension { rows: usize, cols: usize },
    #[error("{op} produced a non-finite value at ({row}, {col})")]
    NonFinite {
        op: &'static str,
        row: usize,
        col: usize,
    },
    #[error("optimizer state holds {state_blocks} parameter blocks but update got {given_blocks}")]
    BlockCountMismatch {
        state_blocks: usize,
        given_blocks: usize,
    },
    #[error("parameter block {block} has {param_len} entries, gradient has {grad_len}")]
    BlockLenMismatch {
        block: usize,
        param_len: usize,
        grad_len: usize,
    },
}
