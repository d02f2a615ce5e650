//! `drivesig sweep-noise` / `sweep-anomaly`: corruption robustness curves
//! for one or more saved models over a shared clean dataset.
//!
//! All bundles must share preprocessing (features, scaler, window
//! geometry, label order) so every model sees the same corrupted windows.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use drivesig::data::{make_windows, WindowSet};
use drivesig::eval::{
    emit_report, sweep_anomaly, sweep_noise, sweep_noise_level, SweepResult, DEFAULT_ANOMALY_GRID,
    DEFAULT_NOISE_GRID,
};
use drivesig::model::{load_bundle, ModelBundle, ModelPayload};

use crate::commands::{digest_entry, insert_flag, load_table};
use crate::util::{
    configure_jobs, model_name_from_path, parse_f64_list, resolve_seed, sha256_file,
    write_run_metadata, AppError, TOOL_VERSION,
};
use crate::CommonOpts;

/// Level grid used when sweeping the corruption probability axis; unlike
/// severities, levels are probabilities and cannot exceed 1.
const DEFAULT_LEVEL_GRID: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

/// The preprocessing fields that must match across swept bundles,
/// serialized for comparison so private scaler internals count too.
fn preprocessing_fingerprint(bundle: &ModelBundle) -> Result<String, AppError> {
    let value = serde_json::json!({
        "feature_names": bundle.feature_names,
        "label_names": bundle.label_names,
        "window_length": bundle.window_length,
        "overlap": bundle.overlap,
        "scaler": bundle.scaler,
    });
    serde_json::to_string(&value)
        .map_err(|e| AppError::Data(format!("cannot compare bundle preprocessing: {e}")))
}

/// Loads every bundle, names each after its file stem, and rejects name
/// collisions and preprocessing mismatches.
fn load_models(paths: &[PathBuf]) -> Result<(ModelBundle, Vec<(String, ModelPayload)>), AppError> {
    let mut models: Vec<(String, ModelPayload)> = Vec::with_capacity(paths.len());
    let mut first: Option<(ModelBundle, String)> = None;
    for path in paths {
        let name = model_name_from_path(path)?;
        if models.iter().any(|(existing, _)| *existing == name) {
            return Err(AppError::Usage(format!(
                "two model files share the display name {name:?}; rename one"
            )));
        }
        let bundle = load_bundle(path)?;
        let fingerprint = preprocessing_fingerprint(&bundle)?;
        match &first {
            None => {
                models.push((name, bundle.payload.clone()));
                first = Some((bundle, fingerprint));
            }
            Some((_, reference)) => {
                if fingerprint != *reference {
                    return Err(AppError::Usage(format!(
                        "model {} was trained with different preprocessing than {}; \
                         sweeps need identical features, scaler, and window settings",
                        path.display(),
                        paths[0].display()
                    )));
                }
                models.push((name, bundle.payload));
            }
        }
    }
    let (reference, _) = first.expect("clap enforces at least one --models value");
    Ok((reference, models))
}

/// Scales the CSV with the reference bundle and cuts evaluation windows.
fn load_windows(
    bundle: &ModelBundle,
    data: &Path,
    label_col: &str,
    trip_col: Option<&str>,
) -> Result<WindowSet, AppError> {
    let (table, _) = load_table(data, label_col, trip_col)?;
    let scaled = bundle.scaler.transform(&table)?;
    Ok(make_windows(
        &scaled,
        bundle.window_length,
        bundle.overlap,
        &bundle.label_names,
    )?)
}

fn parse_grid(raw: Option<&str>, default: &[f64]) -> Result<Vec<f64>, AppError> {
    match raw {
        Some(text) => parse_f64_list(text).map_err(|e| AppError::Usage(format!("--grid: {e}"))),
        None => Ok(default.to_vec()),
    }
}

/// Prints each model's first-vs-last grid point and writes the report
/// triple (CSV, metadata JSON, SVG) plus run metadata.
fn finish(
    result: &SweepResult,
    command: &str,
    flags: BTreeMap<String, String>,
    digests: BTreeMap<String, String>,
    data: &Path,
    out_dir: &Path,
) -> Result<(), AppError> {
    for name in result.model_names() {
        let series = result.series(&name);
        if let (Some(first), Some(last)) = (series.first(), series.last()) {
            println!(
                "{name}: accuracy {:.4} at {}={} -> {:.4} at {}={}",
                first.mean_acc, result.axis, first.value, last.mean_acc, result.axis, last.value
            );
        }
    }
    let dataset_hash = sha256_file(data)?;
    let written = emit_report(result, TOOL_VERSION, &dataset_hash, out_dir)?;
    let outputs: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
    write_run_metadata(
        &out_dir.join(format!("{}_run_meta.json", result.axis)),
        command,
        &flags,
        &digests,
        &outputs,
    )?;
    println!("wrote {} files to {}", outputs.len() + 1, out_dir.display());
    Ok(())
}

fn common_flags(
    seed: u64,
    models: &[PathBuf],
    data: &Path,
    label_col: &str,
    trip_col: Option<&str>,
    grid: &[f64],
    repeats: usize,
    out_dir: &Path,
) -> BTreeMap<String, String> {
    let mut flags = BTreeMap::new();
    insert_flag(&mut flags, "seed", seed);
    let model_list: Vec<String> = models.iter().map(|p| p.display().to_string()).collect();
    insert_flag(&mut flags, "models", model_list.join(","));
    insert_flag(&mut flags, "data", data.display());
    insert_flag(&mut flags, "label_col", label_col);
    if let Some(trip) = trip_col {
        insert_flag(&mut flags, "trip_col", trip);
    }
    let grid_list: Vec<String> = grid.iter().map(f64::to_string).collect();
    insert_flag(&mut flags, "grid", grid_list.join(","));
    insert_flag(&mut flags, "repeats", repeats);
    insert_flag(&mut flags, "out_dir", out_dir.display());
    flags
}

#[allow(clippy::too_many_arguments)]
pub fn run_noise(
    common: &CommonOpts,
    model_paths: &[PathBuf],
    data: &Path,
    label_col: &str,
    trip_col: Option<&str>,
    axis: &str,
    grid: Option<&str>,
    level: f64,
    severity: f64,
    repeats: usize,
    out_dir: &Path,
) -> Result<(), AppError> {
    let seed = resolve_seed(common.seed)?;
    configure_jobs(common.jobs)?;

    let (reference, models) = load_models(model_paths)?;
    let windows = load_windows(&reference, data, label_col, trip_col)?;
    println!("seed: {seed}");
    println!(
        "sweeping {} models over {} windows",
        models.len(),
        windows.len()
    );

    let result = match axis {
        "severity" => {
            let grid = parse_grid(grid, &DEFAULT_NOISE_GRID)?;
            sweep_noise(
                &models,
                &windows,
                &grid,
                level,
                repeats,
                seed,
                &reference.train_stats,
            )?
        }
        "level" => {
            let grid = parse_grid(grid, &DEFAULT_LEVEL_GRID)?;
            sweep_noise_level(
                &models,
                &windows,
                &grid,
                severity,
                repeats,
                seed,
                &reference.train_stats,
            )?
        }
        other => {
            return Err(AppError::Usage(format!(
                "--axis must be severity or level, got {other:?}"
            )))
        }
    };

    let mut flags = common_flags(
        seed,
        model_paths,
        data,
        label_col,
        trip_col,
        &result.grid(),
        repeats,
        out_dir,
    );
    insert_flag(&mut flags, "axis", axis);
    insert_flag(&mut flags, "level", level);
    insert_flag(&mut flags, "severity", severity);
    let mut digests = BTreeMap::new();
    for path in model_paths {
        digest_entry(&mut digests, path)?;
    }
    digest_entry(&mut digests, data)?;
    finish(&result, "sweep-noise", flags, digests, data, out_dir)
}

#[allow(clippy::too_many_arguments)]
pub fn run_anomaly(
    common: &CommonOpts,
    model_paths: &[PathBuf],
    data: &Path,
    label_col: &str,
    trip_col: Option<&str>,
    grid: Option<&str>,
    fraction: f64,
    per_row: bool,
    repeats: usize,
    out_dir: &Path,
) -> Result<(), AppError> {
    let seed = resolve_seed(common.seed)?;
    configure_jobs(common.jobs)?;

    let (reference, models) = load_models(model_paths)?;
    let windows = load_windows(&reference, data, label_col, trip_col)?;
    println!("seed: {seed}");
    println!(
        "sweeping {} models over {} windows",
        models.len(),
        windows.len()
    );

    let grid = parse_grid(grid, &DEFAULT_ANOMALY_GRID)?;
    let result = sweep_anomaly(&models, &windows, &grid, fraction, per_row, repeats, seed)?;

    let mut flags = common_flags(
        seed,
        model_paths,
        data,
        label_col,
        trip_col,
        &result.grid(),
        repeats,
        out_dir,
    );
    insert_flag(&mut flags, "fraction", fraction);
    insert_flag(&mut flags, "per_row", per_row);
    let mut digests = BTreeMap::new();
    for path in model_paths {
        digest_entry(&mut digests, path)?;
    }
    digest_entry(&mut digests, data)?;
    finish(&result, "sweep-anomaly", flags, digests, data, out_dir)
}
