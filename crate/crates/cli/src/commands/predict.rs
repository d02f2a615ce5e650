//! `drivesig predict`: classify one window sliced from a CSV.
//!
//! Unlike `evaluate`, the input needs no label column — only the feature
//! columns the bundle was trained on. Rows `offset..offset+window_length`
//! (0-based, after the header) form the window and must come from one trip.

use std::path::Path;

use drivesig::baselines::window_vote;
use drivesig::model::{predict, ModelBundle, ModelPayload};
use drivesig::numerics::Matrix;

use crate::util::{configure_jobs, resolve_seed, AppError};
use crate::CommonOpts;

/// Reads the feature columns the bundle expects, in bundle order, from
/// `offset` rows into the file. Kept independent of the training loader so
/// unlabeled capture files work.
fn read_window_rows(
    path: &Path,
    feature_names: &[String],
    offset: usize,
    window_length: usize,
) -> Result<Vec<Vec<f64>>, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| AppError::Data(format!("{} is empty", path.display())))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let mut indices = Vec::with_capacity(feature_names.len());
    for name in feature_names {
        let idx = columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| {
                AppError::Data(format!(
                    "{} lacks feature column {name:?} required by the model",
                    path.display()
                ))
            })?;
        indices.push(idx);
    }

    let mut rows = Vec::with_capacity(window_length);
    for (i, line) in lines.enumerate().skip(offset).take(window_length) {
        let cells: Vec<&str> = line.split(',').collect();
        let mut row = Vec::with_capacity(indices.len());
        for (&idx, name) in indices.iter().zip(feature_names) {
            let cell = cells.get(idx).map(|c| c.trim()).unwrap_or("");
            let value: f64 = cell.parse().map_err(|_| {
                AppError::Data(format!(
                    "row {} of {}: column {name:?} value {cell:?} is not numeric",
                    i + 1,
                    path.display()
                ))
            })?;
            if !value.is_finite() {
                return Err(AppError::Data(format!(
                    "row {} of {}: column {name:?} is not finite",
                    i + 1,
                    path.display()
                )));
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.len() < window_length {
        return Err(AppError::Data(format!(
            "{} has {} data rows at offset {offset}, but the model needs {window_length}",
            path.display(),
            rows.len()
        )));
    }
    Ok(rows)
}

fn classify(bundle: &ModelBundle, window: &[Vec<f64>]) -> Result<(usize, Vec<f64>), AppError> {
    match &bundle.payload {
        ModelPayload::Lstm(m) => Ok(predict(&Matrix::from_rows(window), m)?),
        ModelPayload::DecisionTree(m) => vote_rows(window, |r| m.predict_row(r)),
        ModelPayload::RandomForest(m) => vote_rows(window, |r| m.predict_row(r)),
        ModelPayload::Fcnn(m) => vote_rows(window, |r| m.predict_row(r)),
    }
}

/// Per-row baseline prediction: majority vote for the class, mean of the
/// per-row distributions for the reported probabilities.
fn vote_rows<F>(window: &[Vec<f64>], mut predict_row: F) -> Result<(usize, Vec<f64>), AppError>
where
    F: FnMut(&[f64]) -> Result<(usize, Vec<f64>), drivesig::baselines::BaselineError>,
{
    let mut per_row = Vec::with_capacity(window.len());
    for row in window {
        per_row.push(predict_row(row)?);
    }
    let label = window_vote(&per_row);
    let k = per_row[0].1.len();
    let mut mean = vec![0.0; k];
    for (_, probs) in &per_row {
        for (m, p) in mean.iter_mut().zip(probs) {
            *m += p / per_row.len() as f64;
        }
    }
    Ok((label, mean))
}

pub fn run(common: &CommonOpts, model: &Path, data: &Path, offset: usize) -> Result<(), AppError> {
    let seed = resolve_seed(common.seed)?;
    configure_jobs(common.jobs)?;

    let bundle = drivesig::model::load_bundle(model)?;
    let raw = read_window_rows(data, &bundle.feature_names, offset, bundle.window_length)?;
    let scaled: Vec<Vec<f64>> = raw.iter().map(|r| bundle.scaler.transform_row(r)).collect();
    let (label, probs) = classify(&bundle, &scaled)?;

    println!("seed: {seed}");
    let name = bundle
        .label_names
        .get(label)
        .cloned()
        .unwrap_or_else(|| format!("class_{label}"));
    println!(
        "predicted driver: {name} (rows {offset}..{} of {})",
        offset + bundle.window_length,
        data.display()
    );
    for (i, p) in probs.iter().enumerate() {
        let class = bundle
            .label_names
            .get(i)
            .cloned()
            .unwrap_or_else(|| format!("class_{i}"));
        println!("  {class}: {p:.4}");
    }
    Ok(())
}
