//! Robustness sweeps: re-evaluate trained models over a grid of
//! corruption strengths, repeating each point with fresh seeds.
//!
//! Every repeat corrupts its own copy of the clean test set with
//! `seed = base_seed + repeat_index`, so repeats are paired across grid
//! points and models, and an equal `base_seed` reproduces the sweep
//! bitwise. Accuracies aggregate from integer correct counts, which makes
//! the zero-corruption point equal the clean accuracy exactly.

use rayon::prelude::*;
use serde::Serialize;

use crate::corruption::{
    inject_anomaly_windows, inject_noise_windows, AnomalySpec, CorruptionError, NoiseSpec,
};
use crate::data::{FeatureStats, WindowSet};
use crate::eval::{correct_count, EvalError};
use crate::model::ModelPayload;

/// Default severity grid: 0 to 2 clean standard deviations in 0.25 steps.
pub const DEFAULT_NOISE_GRID: [f64; 9] = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0];

/// Default anomaly-rate grid: 0 to 0.65 in six even steps.
pub const DEFAULT_ANOMALY_GRID: [f64; 6] = [0.0, 0.13, 0.26, 0.39, 0.52, 0.65];

/// Default repeats per grid point.
pub const DEFAULT_REPEATS: usize = 10;

/// Aggregated accuracy for one model at one grid value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub model: String,
    pub value: f64,
    pub mean_acc: f64,
    pub std_acc: f64,
}

/// One full sweep: the corruption axis, its fixed side parameters, and one
/// point per model x grid value in (grid value, model) order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    /// "noise_severity", "noise_level", or "anomaly_rate".
    pub axis: String,
    /// Parameters held constant across the grid, e.g. `level_n`.
    pub fixed: Vec<(String, f64)>,
    pub repeats: usize,
    pub base_seed: u64,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Distinct grid values in sweep order.
    pub fn grid(&self) -> Vec<f64> {
        let mut grid = Vec::new();
        for p in &self.points {
            if !grid.iter().any(|&g: &f64| g.to_bits() == p.value.to_bits()) {
                grid.push(p.value);
            }
        }
        grid
    }

    /// Distinct model names in sweep order.
    pub fn model_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for p in &self.points {
            if !names.contains(&p.model) {
                names.push(p.model.clone());
            }
        }
        names
    }

    /// Points belonging to one model, in grid order.
    pub fn series(&self, model: &str) -> Vec<&SweepPoint> {
        self.points.iter().filter(|p| p.model == model).collect()
    }
}

fn check_sweep_inputs(
    models: &[(String, ModelPayload)],
    test: &WindowSet,
    grid: &[f64],
    repeats: usize,
) -> Result<(), EvalError> {
    if grid.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    if models.is_empty() {
        return Err(EvalError::NoModels);
    }
    if repeats == 0 {
        return Err(EvalError::NoRepeats);
    }
    if test.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    Ok(())
}

/// Core sweep loop shared by the three axes. `corrupt` builds the stressed
/// copy for a (grid value, repeat seed) pair.
fn sweep_impl<F>(
    models: &[(String, ModelPayload)],
    test: &WindowSet,
    grid: &[f64],
    repeats: usize,
    base_seed: u64,
    axis: &str,
    fixed: Vec<(String, f64)>,
    corrupt: F,
) -> Result<SweepResult, EvalError>
where
    F: Fn(&WindowSet, f64, u64) -> Result<WindowSet, CorruptionError> + Sync,
{
    check_sweep_inputs(models, test, grid, repeats)?;
    let total = test.len() as u64;
    let mut points = Vec::with_capacity(grid.len() * models.len());
    for &value in grid {
        // correct[r][m] = correct windows for model m in repeat r. Repeats
        // run in parallel; collect keeps repeat order.
        let correct: Vec<Vec<u64>> = (0..repeats)
            .into_par_iter()
            .map(|r| -> Result<Vec<u64>, EvalError> {
                let stressed = corrupt(test, value, base_seed + r as u64)?;
                models
                    .iter()
                    .map(|(_, model)| correct_count(model, &stressed))
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        for (m, (name, _)) in models.iter().enumerate() {
            let total_correct: u64 = correct.iter().map(|per_repeat| per_repeat[m]).sum();
            // One integer-ratio division, so identical repeats reproduce
            // the single-evaluation accuracy bitwise.
            let mean = total_correct as f64 / (repeats as u64 * total) as f64;
            let var = correct
                .iter()
                .map(|per_repeat| {
                    let acc = per_repeat[m] as f64 / total as f64;
                    (acc - mean) * (acc - mean)
                })
                .sum::<f64>()
                / repeats as f64;
            points.push(SweepPoint {
                model: name.clone(),
                value,
                mean_acc: mean,
                std_acc: var.sqrt(),
            });
        }
    }
    Ok(SweepResult {
        axis: axis.to_string(),
        fixed,
        repeats,
        base_seed,
        points,
    })
}

/// Sweeps additive-noise severity (in clean-sigma units) at a fixed
/// corruption probability `level_n`.
pub fn sweep_noise(
    models: &[(String, ModelPayload)],
    test: &WindowSet,
    severities: &[f64],
    level_n: f64,
    repeats: usize,
    base_seed: u64,
    stats: &FeatureStats,
) -> Result<SweepResult, EvalError> {
    sweep_impl(
        models,
        test,
        severities,
        repeats,
        base_seed,
        "noise_severity",
        vec![("level_n".to_string(), level_n)],
        |ws, severity, seed| {
            inject_noise_windows(
                ws,
                &NoiseSpec {
                    level_n,
                    severity_s: severity,
                    seed,
                },
                stats,
            )
        },
    )
}

/// Sweeps the per-cell corruption probability at a fixed severity.
pub fn sweep_noise_level(
    models: &[(String, ModelPayload)],
    test: &WindowSet,
    levels: &[f64],
    severity_s: f64,
    repeats: usize,
    base_seed: u64,
    stats: &FeatureStats,
) -> Result<SweepResult, EvalError> {
    sweep_impl(
        models,
        test,
        levels,
        repeats,
        base_seed,
        "noise_level",
        vec![("severity_s".to_string(), severity_s)],
        |ws, level, seed| {
            inject_noise_windows(
                ws,
                &NoiseSpec {
                    level_n: level,
                    severity_s,
                    seed,
                },
                stats,
            )
        },
    )
}

/// Sweeps the multiplicative anomaly rate at a fixed affected fraction.
/// With `per_row` the fraction selects whole rows instead of single cells.
pub fn sweep_anomaly(
    models: &[(String, ModelPayload)],
    test: &WindowSet,
    rates: &[f64],
    affected_fraction: f64,
    per_row: bool,
    repeats: usize,
    base_seed: u64,
) -> Result<SweepResult, EvalError> {
    sweep_impl(
        models,
        test,
        rates,
        repeats,
        base_seed,
        "anomaly_rate",
        vec![
            ("affected_fraction".to_string(), affected_fraction),
            ("per_row".to_string(), if per_row { 1.0 } else { 0.0 }),
        ],
        |ws, rate, seed| {
            let mut spec = AnomalySpec::new(affected_fraction, rate, seed);
            spec.per_row = per_row;
            inject_anomaly_windows(ws, &spec)
        },
    )
}
