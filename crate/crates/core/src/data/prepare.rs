//! End-to-end dataset preparation: split, scale, window.

use serde::{Deserialize, Serialize};

use super::{
    make_windows, split_chronological, DataError, FeatureStats, FrameTable, Scaler, SplitSpec,
    WindowSet,
};

/// Parameters for turning a raw table into model-ready windows.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrepareConfig {
    pub split: SplitSpec,
    pub window_length: usize,
    pub overlap: f64,
    /// Fit the scaler on the whole table instead of the training split
    /// only. Training-split fitting is the default because global fitting
    /// leaks held-out ranges into preprocessing.
    pub scale_globally: bool,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        Self {
            split: SplitSpec::default(),
            window_length: 16,
            overlap: 0.5,
            scale_globally: false,
        }
    }
}

/// Everything downstream stages need: scaled per-split tables, their
/// windows, the fitted scaler, and training-split feature statistics.
#[derive(Clone, Debug)]
pub struct PreparedData {
    pub label_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub scaler: Scaler,
    /// Mean/std of the *scaled* training split; corruption severities are
    /// expressed in these units.
    pub train_stats: FeatureStats,
    pub train_table: FrameTable,
    pub val_table: FrameTable,
    pub test_table: FrameTable,
    pub train_windows: WindowSet,
    pub val_windows: WindowSet,
    pub test_windows: WindowSet,
}

/// Splits chronologically per driver, fits the scaler (training split only
/// unless `scale_globally`), scales all three parts, and cuts windows from
/// each. Fails if any driver is too short to give every part at least one
/// full window's worth of rows.
pub fn prepare(table: &FrameTable, config: &PrepareConfig) -> Result<PreparedData, DataError> {
    let label_names = table.driver_labels();
    let (train_raw, val_raw, test_raw) =
        split_chronological(table, config.split, config.window_length)?;

    let scaler = if config.scale_globally {
        Scaler::fit(table)?
    } else {
        Scaler::fit(&train_raw)?
    };
    let train_table = scaler.transform(&train_raw)?;
    let val_table = scaler.transform(&val_raw)?;
    let test_table = scaler.transform(&test_raw)?;

    let train_stats = FeatureStats::from_table(&train_table)?;

    let train_windows = make_windows(
        &train_table,
        config.window_length,
        config.overlap,
        &label_names,
    )?;
    let val_windows = make_windows(&val_table, config.window_length, config.overlap, &label_names)?;
    let test_windows = make_windows(
        &test_table,
        config.window_length,
        config.overlap,
        &label_names,
    )?;

    Ok(PreparedData {
        label_names,
        feature_names: table.feature_names().to_vec(),
        scaler,
        train_stats,
        train_table,
        val_table,
        test_table,
        train_windows,
        val_windows,
        test_windows,
    })
}
