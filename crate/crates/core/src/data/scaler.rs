//! Per-feature min-max scaling fitted on the training split.

use serde::{Deserialize, Serialize};

use super::{DataError, FrameTable};

/// Maps each feature into `[0, 1]` via `(x - min) / (max - min)` using the
/// per-feature range observed at fit time.
///
/// Values outside the fitted range scale past the unit interval on purpose:
/// held-out and corrupted data must not be clamped, or out-of-range behavior
/// would be hidden from the models. A feature that was constant at fit time
/// maps to `0.0` everywhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl Scaler {
    pub fn fit(table: &FrameTable) -> Result<Self, DataError> {
        if table.num_rows() == 0 {
            return Err(DataError::EmptyFitSubset);
        }
        let d = table.feature_count();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for row in table.rows() {
            for ((lo, hi), &v) in min.iter_mut().zip(&mut max).zip(&row.values) {
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
        Ok(Self { min, max })
    }

    pub fn feature_count(&self) -> usize {
        self.min.len()
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn transform_value(&self, feature: usize, x: f64) -> f64 {
        let range = self.max[feature] - self.min[feature];
        if range == 0.0 {
            0.0
        } else {
            (x - self.min[feature]) / range
        }
    }

    pub fn inverse_value(&self, feature: usize, scaled: f64) -> f64 {
        let range = self.max[feature] - self.min[feature];
        if range == 0.0 {
            self.min[feature]
        } else {
            self.min[feature] + scaled * range
        }
    }

    pub fn transform_row(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .enumerate()
            .map(|(j, &x)| self.transform_value(j, x))
            .collect()
    }

    pub fn transform(&self, table: &FrameTable) -> Result<FrameTable, DataError> {
        self.check(table)?;
        let values = table
            .rows()
            .iter()
            .map(|r| self.transform_row(&r.values))
            .collect();
        Ok(table.with_values(values))
    }

    pub fn inverse(&self, table: &FrameTable) -> Result<FrameTable, DataError> {
        self.check(table)?;
        let values = table
            .rows()
            .iter()
            .map(|r| {
                r.values
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| self.inverse_value(j, x))
                    .collect()
            })
            .collect();
        Ok(table.with_values(values))
    }

    fn check(&self, table: &FrameTable) -> Result<(), DataError> {
        if table.feature_count() != self.feature_count() {
            return Err(DataError::FeatureCountMismatch {
                fitted: self.feature_count(),
                given: table.feature_count(),
            });
        }
        Ok(())
    }
}
