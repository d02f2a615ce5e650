use serde::{Deserialize, Serialize};

use super::NumericsError;

/// Adam hyperparameters. Defaults are the universally cited ones.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Per-parameter first/second moment accumulators for bias-corrected Adam.
///
/// Parameters are handled as an ordered list of flat blocks (one per weight
/// matrix or bias vector); the state mirrors that layout exactly and refuses
/// updates whose layout differs.
#[derive(Clone, Debug)]
pub struct AdamState {
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
    step_count: u64,
    params: AdamParams,
}

impl AdamState {
    /// `block_lens` gives the flat length of each parameter block, in the
    /// same order updates will pass them.
    pub fn new(block_lens: &[usize], params: AdamParams) -> Self {
        Self {
            first_moment: block_lens.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: block_lens.iter().map(|&n| vec![0.0; n]).collect(),
            step_count: 0,
            params,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One bias-corrected Adam step applied in place:
    /// `m = b1*m + (1-b1)*g`, `v = b2*v + (1-b2)*g^2`,
    /// `p -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)`.
    pub fn update(
        &mut self,
        params: &mut [&mut [f64]],
        grads: &[&[f64]],
    ) -> Result<(), NumericsError> {
        if params.len() != self.first_moment.len() || grads.len() != self.first_moment.len() {
            return Err(NumericsError::BlockCountMismatch {
                state_blocks: self.first_moment.len(),
                given_blocks: params.len().max(grads.len()),
            });
        }
        for (block, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != self.first_moment[block].len() || g.len() != p.len() {
                return Err(NumericsError::BlockLenMismatch {
                    block,
                    param_len: p.len(),
                    grad_len: g.len(),
                });
            }
        }

        self.step_count += 1;
        let t = self.step_count as i32;
        let AdamParams {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.params;
        let corr1 = 1.0 - beta1.powi(t);
        let corr2 = 1.0 - beta2.powi(t);

        for (block, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let m = &mut self.first_moment[block];
            let v = &mut self.second_moment[block];
            for i in 0..p.len() {
                let grad = g[i];
                m[i] = beta1 * m[i] + (1.0 - beta1) * grad;
                v[i] = beta2 * v[i] + (1.0 - beta2) * grad * grad;
                let m_hat = m[i] / corr1;
                let v_hat = v[i] / corr2;
                p[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}
