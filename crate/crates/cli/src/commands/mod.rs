//! Subcommand implementations and the plumbing they share: loading and
//! preparing CSVs from command-line options, assembling model configs,
//! and recording flag values for run metadata.

pub mod corrupted;
pub mod evaluate;
pub mod predict;
pub mod prepare;
pub mod search;
pub mod sweep;
pub mod synth;
pub mod train;

use std::collections::BTreeMap;
use std::path::Path;

use drivesig::baselines::{ForestConfig, TreeConfig};
use drivesig::data::{
    load_csv, prepare as prepare_data, FrameTable, LoadStats, PrepareConfig, PreparedData,
    SplitSpec,
};
use drivesig::model::ModelConfig;

use crate::util::{parse_usize_list, sha256_file, AppError};
use crate::{DataOpts, NetOpts, TreeOpts};

/// Loads a telemetry CSV; any failure is a data error (exit 2).
pub(crate) fn load_table(
    path: &Path,
    label_col: &str,
    trip_col: Option<&str>,
) -> Result<(FrameTable, LoadStats), AppError> {
    Ok(load_csv(path, label_col, trip_col)?)
}

/// Builds the preparation config from flags, rejecting out-of-range
/// values as usage errors before any file is touched.
pub(crate) fn prepare_config(d: &DataOpts) -> Result<PrepareConfig, AppError> {
    let split = SplitSpec::new(d.train_frac, d.val_frac, d.test_frac)
        .map_err(|e| AppError::Usage(e.to_string()))?;
    if d.window_length < 2 {
        return Err(AppError::Usage(format!(
            "--window-length must be at least 2, got {}",
            d.window_length
        )));
    }
    if !d.overlap.is_finite() || !(0.0..1.0).contains(&d.overlap) {
        return Err(AppError::Usage(format!(
            "--overlap must lie in [0, 1), got {}",
            d.overlap
        )));
    }
    Ok(PrepareConfig {
        split,
        window_length: d.window_length,
        overlap: d.overlap,
        scale_globally: d.scale_globally,
    })
}

/// Loads, splits, scales, and windows the CSV named by the data flags.
pub(crate) fn prepare_from_opts(
    d: &DataOpts,
) -> Result<(FrameTable, LoadStats, PreparedData), AppError> {
    let cfg = prepare_config(d)?;
    let (table, stats) = load_table(&d.data, &d.label_col, d.trip_col.as_deref())?;
    let prepared = prepare_data(&table, &cfg)?;
    Ok((table, stats, prepared))
}

/// Network config from flags; `num_classes` and `window_length` are
/// placeholders the trainer overrides from the actual windows.
pub(crate) fn model_config(n: &NetOpts, window_length: usize) -> Result<ModelConfig, AppError> {
    let hidden_sizes = parse_usize_list(&n.hidden)
        .map_err(|e| AppError::Usage(format!("--hidden: {e}")))?;
    Ok(ModelConfig {
        hidden_sizes,
        window_length,
        num_classes: 2,
        learning_rate: n.learning_rate,
        batch_size: n.batch_size,
        max_epochs: n.max_epochs,
        early_stop_patience: n.patience,
        clip_norm: n.clip_norm,
    })
}

pub(crate) fn tree_config(t: &TreeOpts) -> TreeConfig {
    TreeConfig {
        max_depth: t.max_depth,
        min_samples_split: t.min_samples_split,
    }
}

pub(crate) fn forest_config(t: &TreeOpts) -> ForestConfig {
    ForestConfig {
        n_trees: t.n_trees,
        features_per_split: t.features_per_split,
        bootstrap: !t.no_bootstrap,
        max_depth: t.max_depth,
    }
}

/// One input file's digest, keyed by its path as given on the command
/// line so reruns from the same directory compare equal.
pub(crate) fn digest_entry(
    digests: &mut BTreeMap<String, String>,
    path: &Path,
) -> Result<(), AppError> {
    digests.insert(path.display().to_string(), sha256_file(path)?);
    Ok(())
}

pub(crate) fn insert_flag(flags: &mut BTreeMap<String, String>, key: &str, value: impl ToString) {
    flags.insert(key.to_string(), value.to_string());
}

pub(crate) fn data_flags(flags: &mut BTreeMap<String, String>, d: &DataOpts) {
    insert_flag(flags, "data", d.data.display());
    insert_flag(flags, "label_col", &d.label_col);
    if let Some(trip) = &d.trip_col {
        insert_flag(flags, "trip_col", trip);
    }
    insert_flag(flags, "window_length", d.window_length);
    insert_flag(flags, "overlap", d.overlap);
    insert_flag(flags, "train_frac", d.train_frac);
    insert_flag(flags, "val_frac", d.val_frac);
    insert_flag(flags, "test_frac", d.test_frac);
    insert_flag(flags, "scale_globally", d.scale_globally);
}

pub(crate) fn net_flags(flags: &mut BTreeMap<String, String>, n: &NetOpts) {
    insert_flag(flags, "hidden", &n.hidden);
    insert_flag(flags, "learning_rate", n.learning_rate);
    insert_flag(flags, "batch_size", n.batch_size);
    insert_flag(flags, "max_epochs", n.max_epochs);
    insert_flag(flags, "patience", n.patience);
    if let Some(c) = n.clip_norm {
        insert_flag(flags, "clip_norm", c);
    }
}

pub(crate) fn tree_flags(flags: &mut BTreeMap<String, String>, t: &TreeOpts) {
    if let Some(d) = t.max_depth {
        insert_flag(flags, "max_depth", d);
    }
    insert_flag(flags, "min_samples_split", t.min_samples_split);
    insert_flag(flags, "n_trees", t.n_trees);
    if let Some(f) = t.features_per_split {
        insert_flag(flags, "features_per_split", f);
    }
    insert_flag(flags, "no_bootstrap", t.no_bootstrap);
}
