//! The single LSTM cell step and its recorded trace.

use serde::{Deserialize, Serialize};

use crate::numerics::{sigmoid_scalar, Matrix};

use super::{LstmLayerParams, ModelError};

/// Recurrent carry of one layer: the hidden output `h` and cell state `c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    /// The initial all-zero state used at the start of every window.
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Everything the backward pass needs about one cell step.
#[derive(Clone, Debug)]
pub(crate) struct StepTrace {
    /// `[h_prev, x_t]`, hidden part first.
    pub concat: Vec<f64>,
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub chat: Vec<f64>,
    pub o: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

/// `out = m * v` for a dense row-major matrix.
pub(crate) fn matvec(m: &Matrix, v: &[f64], out: &mut [f64]) {
    debug_assert_eq!(m.cols(), v.len());
    debug_assert_eq!(m.rows(), out.len());
    for (r, slot) in out.iter_mut().enumerate() {
        let row = m.row(r);
        let mut acc = 0.0;
        for (a, b) in row.iter().zip(v) {
            acc += a * b;
        }
        *slot = acc;
    }
}

/// `out += m^T * v` — scatters a row-space vector back to column space.
pub(crate) fn matvec_transpose_add(m: &Matrix, v: &[f64], out: &mut [f64]) {
    debug_assert_eq!(m.rows(), v.len());
    debug_assert_eq!(m.cols(), out.len());
    for (r, &vr) in v.iter().enumerate() {
        let row = m.row(r);
        for (slot, &mrc) in out.iter_mut().zip(row) {
            *slot += vr * mrc;
        }
    }
}

/// Runs one gated step and keeps every intermediate for backpropagation.
/// Shapes are the caller's responsibility (checked upstream).
pub(crate) fn step_with_trace(
    x: &[f64],
    prev_h: &[f64],
    prev_c: &[f64],
    params: &LstmLayerParams,
) -> StepTrace {
    let hidden = params.hidden();
    let mut concat = Vec::with_capacity(hidden + x.len());
    concat.extend_from_slice(prev_h);
    concat.extend_from_slice(x);

    let mut f = vec![0.0; hidden];
    let mut i = vec![0.0; hidden];
    let mut chat = vec![0.0; hidden];
    let mut o = vec![0.0; hidden];
    matvec(&params.w_f, &concat, &mut f);
    matvec(&params.w_i, &concat, &mut i);
    matvec(&params.w_c, &concat, &mut chat);
    matvec(&params.w_o, &concat, &mut o);
    for k in 0..hidden {
        f[k] = sigmoid_scalar(f[k] + params.b_f[k]);
        i[k] = sigmoid_scalar(i[k] + params.b_i[k]);
        chat[k] = (chat[k] + params.b_c[k]).tanh();
        o[k] = sigmoid_scalar(o[k] + params.b_o[k]);
        // NaN inputs must propagate to the loss, where training reports
        // divergence; the range checks only apply to real activations.
        debug_assert!(f[k].is_nan() || (0.0..=1.0).contains(&f[k]), "forget gate out of range");
        debug_assert!(i[k].is_nan() || (0.0..=1.0).contains(&i[k]), "input gate out of range");
        debug_assert!(o[k].is_nan() || (0.0..=1.0).contains(&o[k]), "output gate out of range");
        debug_assert!(chat[k].is_nan() || (-1.0..=1.0).contains(&chat[k]), "candidate out of range");
    }

    let mut c = vec![0.0; hidden];
    let mut tanh_c = vec![0.0; hidden];
    let mut h = vec![0.0; hidden];
    for k in 0..hidden {
        c[k] = f[k] * prev_c[k] + i[k] * chat[k];
        tanh_c[k] = c[k].tanh();
        h[k] = o[k] * tanh_c[k];
    }

    StepTrace {
        concat,
        f,
        i,
        chat,
        o,
        c_prev: prev_c.to_vec(),
        c,
        tanh_c,
        h,
    }
}

/// One LSTM step: gates from `sigma(W * [h_prev, x_t] + b)`, candidate from
/// `tanh`, cell update `c = f (*) c_prev + i (*) chat`, and output
/// `h = o (*) tanh(c)`.
pub fn cell_step(
    x: &[f64],
    prev: &LstmState,
    params: &LstmLayerParams,
) -> Result<LstmState, ModelError> {
    let hidden = params.hidden();
    let input = params.input_size();
    if x.len() != input || prev.h.len() != hidden || prev.c.len() != hidden {
        return Err(ModelError::CellShape {
            x_len: x.len(),
            input,
            h_len: prev.h.len(),
            c_len: prev.c.len(),
            hidden,
        });
    }
    let trace = step_with_trace(x, &prev.h, &prev.c, params);
    Ok(LstmState {
        h: trace.h,
        c: trace.c,
    })
}
