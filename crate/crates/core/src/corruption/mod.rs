//! Deterministic sensor-corruption injectors for robustness studies.
//!
//! Two stressors: additive white Gaussian noise scaled to each feature's
//! clean-data standard deviation, and multiplicative anomalies that
//! inflate selected readings by a fixed rate. Both are pure functions of
//! (input, spec, seed): inputs are never mutated and equal seeds give
//! bitwise-equal outputs.
//!
//! Cells are visited in a fixed order (window, then row, then feature,
//! row-major) with one uniform draw per cell deciding corruption, so the
//! exact output is reproducible and independently recomputable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{FeatureStats, FrameTable, WindowSet};
use crate::numerics::SeededRng;

#[derive(Debug, Error)]
pub enum CorruptionError {
    #[error("invalid {field}: {value} (must lie in [{lo}, {hi}])")]
    InvalidSpec {
        field: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("feature statistics cover {got} features but the data has {expected}")]
    MissingStats { expected: usize, got: usize },
}

fn check_range(
    field: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
) -> Result<(), CorruptionError> {
    if !value.is_finite() || !(lo..=hi).contains(&value) {
        return Err(CorruptionError::InvalidSpec {
            field,
            value,
            lo,
            hi,
        });
    }
    Ok(())
}

/// Additive Gaussian noise: each cell is independently corrupted with
/// probability `level_n`; a corrupted cell gains a draw from
/// `Gaussian(0, severity_s * sigma_i)` where `sigma_i` is feature `i`'s
/// clean training standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub level_n: f64,
    pub severity_s: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), CorruptionError> {
        check_range("noise level_n", self.level_n, 0.0, 1.0)?;
        check_range("noise severity_s", self.severity_s, 0.0, 2.0)
    }

    fn is_identity(&self) -> bool {
        self.level_n == 0.0 || self.severity_s == 0.0
    }
}

/// Multiplicative anomalies: each cell (or, in per-row mode, each whole
/// row) is independently selected with probability `affected_fraction`;
/// a selected value `X` becomes `X * (1 + rate_r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalySpec {
    pub affected_fraction: f64,
    pub rate_r: f64,
    pub seed: u64,
    /// Select whole rows instead of individual cells.
    pub per_row: bool,
}

impl AnomalySpec {
    pub fn new(affected_fraction: f64, rate_r: f64, seed: u64) -> Self {
        Self {
            affected_fraction,
            rate_r,
            seed,
            per_row: false,
        }
    }

    pub fn validate(&self) -> Result<(), CorruptionError> {
        check_range("anomaly affected_fraction", self.affected_fraction, 0.0, 1.0)?;
        check_range("anomaly rate_r", self.rate_r, 0.0, 1.0)
    }

    fn is_identity(&self) -> bool {
        self.affected_fraction == 0.0 || self.rate_r == 0.0
    }
}

fn check_stats(stats: &FeatureStats, features: usize) -> Result<(), CorruptionError> {
    if stats.std.len() != features {
        return Err(CorruptionError::MissingStats {
            expected: features,
            got: stats.std.len(),
        });
    }
    Ok(())
}

/// Applies the per-cell noise rule to one value, advancing the stream.
#[inline]
fn noise_cell(value: f64, sigma: f64, spec: &NoiseSpec, rng: &mut SeededRng) -> f64 {
    if rng.next_uniform() < spec.level_n {
        value + rng.next_gaussian() * spec.severity_s * sigma
    } else {
        value
    }
}

/// Applies the per-cell anomaly rule to one value, advancing the stream.
#[inline]
fn anomaly_cell(value: f64, spec: &AnomalySpec, rng: &mut SeededRng) -> f64 {
    if rng.next_uniform() < spec.affected_fraction {
        value * (1.0 + spec.rate_r)
    } else {
        value
    }
}

/// Noise-corrupted copy of a table. Zero level or zero severity returns a
/// bitwise-identical clone.
pub fn inject_noise_table(
    table: &FrameTable,
    spec: &NoiseSpec,
    stats: &FeatureStats,
) -> Result<FrameTable, CorruptionError> {
    spec.validate()?;
    check_stats(stats, table.feature_count())?;
    if spec.is_identity() {
        return Ok(table.clone());
    }
    let mut rng = SeededRng::new(spec.seed);
    let values = table
        .rows()
        .iter()
        .map(|row| {
            row.values
                .iter()
                .zip(&stats.std)
                .map(|(&v, &sigma)| noise_cell(v, sigma, spec, &mut rng))
                .collect()
        })
        .collect();
    Ok(table.with_values(values))
}

/// Noise-corrupted copy of a window set (labels and shape untouched).
pub fn inject_noise_windows(
    windows: &WindowSet,
    spec: &NoiseSpec,
    stats: &FeatureStats,
) -> Result<WindowSet, CorruptionError> {
    spec.validate()?;
    check_stats(stats, windows.feature_count)?;
    if spec.is_identity() {
        return Ok(windows.clone());
    }
    let mut rng = SeededRng::new(spec.seed);
    let mut out = windows.clone();
    for window in &mut out.windows {
        for t in 0..window.data.rows() {
            let row = window.data.row_mut(t);
            for (v, &sigma) in row.iter_mut().zip(&stats.std) {
                *v = noise_cell(*v, sigma, spec, &mut rng);
            }
        }
    }
    Ok(out)
}

/// Anomaly-corrupted copy of a table. Zero rate or zero fraction returns a
/// bitwise-identical clone.
pub fn inject_anomaly_table(
    table: &FrameTable,
    spec: &AnomalySpec,
) -> Result<FrameTable, CorruptionError> {
    spec.validate()?;
    if spec.is_identity() {
        return Ok(table.clone());
    }
    let mut rng = SeededRng::new(spec.seed);
    let values = table
        .rows()
        .iter()
        .map(|row| {
            if spec.per_row {
                if rng.next_uniform() < spec.affected_fraction {
                    row.values.iter().map(|&v| v * (1.0 + spec.rate_r)).collect()
                } else {
                    row.values.clone()
                }
            } else {
                row.values
                    .iter()
                    .map(|&v| anomaly_cell(v, spec, &mut rng))
                    .collect()
            }
        })
        .collect();
    Ok(table.with_values(values))
}

/// Anomaly-corrupted copy of a window set (labels and shape untouched).
pub fn inject_anomaly_windows(
    windows: &WindowSet,
    spec: &AnomalySpec,
) -> Result<WindowSet, CorruptionError> {
    spec.validate()?;
    if spec.is_identity() {
        return Ok(windows.clone());
    }
    let mut rng = SeededRng::new(spec.seed);
    let mut out = windows.clone();
    for window in &mut out.windows {
        for t in 0..window.data.rows() {
            let row = window.data.row_mut(t);
            if spec.per_row {
                if rng.next_uniform() < spec.affected_fraction {
                    for v in row {
                        *v *= 1.0 + spec.rate_r;
                    }
                }
            } else {
                for v in row {
                    *v = anomaly_cell(*v, spec, &mut rng);
                }
            }
        }
    }
    Ok(out)
}
