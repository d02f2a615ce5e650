//! Hand-derived backpropagation through time.
//!
//! Reverse accumulation runs top layer to bottom, last step to first.
//! At each step the incoming hidden gradient combines the external
//! contribution (head, or the layer above's input gradient) with the
//! recurrent carry from the following step; the cell-state gradient carries
//! backward through the forget gate.

use rayon::prelude::*;

use crate::numerics::Matrix;

use super::cell::matvec_transpose_add;
use super::network::{forward_trace, nll_from_logits};
use super::{LstmModel, ModelError};

/// Gradients for one recurrent layer, same shapes as its parameters.
#[derive(Clone, Debug)]
pub struct LayerGrads {
    pub w_f: Matrix,
    pub w_i: Matrix,
    pub w_c: Matrix,
    pub w_o: Matrix,
    pub b_f: Vec<f64>,
    pub b_i: Vec<f64>,
    pub b_c: Vec<f64>,
    pub b_o: Vec<f64>,
}

/// Gradients for every parameter of the model, in the model's canonical
/// block order.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub layers: Vec<LayerGrads>,
    pub w_out: Matrix,
    pub b_out: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(model: &LstmModel) -> Self {
        let layers = model
            .layers
            .iter()
            .map(|l| LayerGrads {
                w_f: Matrix::zeros(l.w_f.rows(), l.w_f.cols()),
                w_i: Matrix::zeros(l.w_i.rows(), l.w_i.cols()),
                w_c: Matrix::zeros(l.w_c.rows(), l.w_c.cols()),
                w_o: Matrix::zeros(l.w_o.rows(), l.w_o.cols()),
                b_f: vec![0.0; l.b_f.len()],
                b_i: vec![0.0; l.b_i.len()],
                b_c: vec![0.0; l.b_c.len()],
                b_o: vec![0.0; l.b_o.len()],
            })
            .collect();
        Self {
            layers,
            w_out: Matrix::zeros(model.head.w_out.rows(), model.head.w_out.cols()),
            b_out: vec![0.0; model.head.b_out.len()],
        }
    }

    /// Read-only parameter blocks in the same order as
    /// [`LstmModel::block_lens`].
    pub fn blocks(&self) -> Vec<&[f64]> {
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
        blocks.push(self.w_out.as_slice());
        blocks.push(&self.b_out);
        blocks
    }

    fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
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
        blocks.push(self.w_out.as_mut_slice());
        blocks.push(&mut self.b_out);
        blocks
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (mine, theirs) in self.blocks_mut().into_iter().zip(other.blocks()) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for block in self.blocks_mut() {
            for g in block {
                *g *= factor;
            }
        }
    }

    /// Global L2 norm over every entry, used for gradient clipping.
    pub fn global_norm(&self) -> f64 {
        self.blocks()
            .iter()
            .flat_map(|b| b.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }
}

/// `m += row_vec (outer) col_vec`.
fn add_outer(m: &mut Matrix, row_vec: &[f64], col_vec: &[f64]) {
    debug_assert_eq!(m.rows(), row_vec.len());
    debug_assert_eq!(m.cols(), col_vec.len());
    for (r, &a) in row_vec.iter().enumerate() {
        for (slot, &b) in m.row_mut(r).iter_mut().zip(col_vec) {
            *slot += a * b;
        }
    }
}

/// Loss and exact gradients for a single labeled window.
pub fn backward(
    window: &Matrix,
    label: usize,
    model: &LstmModel,
) -> Result<(f64, Gradients), ModelError> {
    model.check_window(window)?;
    let num_classes = model.head.num_classes();
    if label >= num_classes {
        return Err(ModelError::InvalidLabel { label, num_classes });
    }

    let ft = forward_trace(window, model);
    let loss = nll_from_logits(&ft.logits, label);
    let steps = window.rows();
    let mut grads = Gradients::zeros_like(model);

    // Softmax + cross-entropy collapse to (probs - one_hot) at the logits.
    let mut dlogits = ft.probs.clone();
    dlogits[label] -= 1.0;

    let top = model.layers.len() - 1;
    let last_h = &ft.traces[top][steps - 1].h;
    add_outer(&mut grads.w_out, &dlogits, last_h);
    for (g, d) in grads.b_out.iter_mut().zip(&dlogits) {
        *g += d;
    }

    // External dh for the current layer at each time step. The top layer
    // only receives head gradient at the final step; lower layers receive
    // the layer above's input gradient at every step.
    let mut external: Vec<Vec<f64>> = vec![vec![0.0; model.layers[top].hidden()]; steps];
    matvec_transpose_add(&model.head.w_out, &dlogits, &mut external[steps - 1]);

    for l in (0..model.layers.len()).rev() {
        let layer = &model.layers[l];
        let hidden = layer.hidden();
        let input = layer.input_size();
        let lg = &mut grads.layers[l];

        let mut below: Vec<Vec<f64>> = if l > 0 {
            vec![vec![0.0; model.layers[l - 1].hidden()]; steps]
        } else {
            Vec::new()
        };

        let mut dh_carry = vec![0.0; hidden];
        let mut dc_carry = vec![0.0; hidden];
        let mut dz_f = vec![0.0; hidden];
        let mut dz_i = vec![0.0; hidden];
        let mut dz_c = vec![0.0; hidden];
        let mut dz_o = vec![0.0; hidden];
        for t in (0..steps).rev() {
            let tr = &ft.traces[l][t];
            for k in 0..hidden {
                let dh = external[t][k] + dh_carry[k];
                let dc = dc_carry[k] + dh * tr.o[k] * (1.0 - tr.tanh_c[k] * tr.tanh_c[k]);
                let do_ = dh * tr.tanh_c[k];
                dz_o[k] = do_ * tr.o[k] * (1.0 - tr.o[k]);
                dz_f[k] = dc * tr.c_prev[k] * tr.f[k] * (1.0 - tr.f[k]);
                dz_i[k] = dc * tr.chat[k] * tr.i[k] * (1.0 - tr.i[k]);
                dz_c[k] = dc * tr.i[k] * (1.0 - tr.chat[k] * tr.chat[k]);
                dc_carry[k] = dc * tr.f[k];
            }

            add_outer(&mut lg.w_f, &dz_f, &tr.concat);
            add_outer(&mut lg.w_i, &dz_i, &tr.concat);
            add_outer(&mut lg.w_c, &dz_c, &tr.concat);
            add_outer(&mut lg.w_o, &dz_o, &tr.concat);
            for k in 0..hidden {
                lg.b_f[k] += dz_f[k];
                lg.b_i[k] += dz_i[k];
                lg.b_c[k] += dz_c[k];
                lg.b_o[k] += dz_o[k];
            }

            let mut dconcat = vec![0.0; hidden + input];
            matvec_transpose_add(&layer.w_f, &dz_f, &mut dconcat);
            matvec_transpose_add(&layer.w_i, &dz_i, &mut dconcat);
            matvec_transpose_add(&layer.w_c, &dz_c, &mut dconcat);
            matvec_transpose_add(&layer.w_o, &dz_o, &mut dconcat);

            dh_carry.copy_from_slice(&dconcat[..hidden]);
            if l > 0 {
                below[t].copy_from_slice(&dconcat[hidden..]);
            }
        }

        if l > 0 {
            external = below;
        }
    }

    Ok((loss, grads))
}

/// Mean loss and mean gradients over a batch.
///
/// Samples are processed in fixed-size chunks that are summed in chunk
/// order, so the result is identical regardless of how many worker threads
/// run the chunks.
pub fn batch_gradients(
    samples: &[(&Matrix, usize)],
    model: &LstmModel,
) -> Result<(f64, Gradients), ModelError> {
    const CHUNK: usize = 8;
    if samples.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }

    let chunk_results: Vec<Result<(f64, Gradients), ModelError>> = samples
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut loss_sum = 0.0;
            let mut grad_sum = Gradients::zeros_like(model);
            for &(window, label) in chunk {
                let (loss, grads) = backward(window, label, model)?;
                loss_sum += loss;
                grad_sum.add_assign(&grads);
            }
            Ok((loss_sum, grad_sum))
        })
        .collect();

    let mut total_loss = 0.0;
    let mut total = Gradients::zeros_like(model);
    for result in chunk_results {
        let (loss, grads) = result?;
        total_loss += loss;
        total.add_assign(&grads);
    }
    let n = samples.len() as f64;
    total.scale(1.0 / n);
    Ok((total_loss / n, total))
}
