//! Dataset ingestion and preparation: driver-labeled CSV logs in, scaled
//! overlapping windows out.
//!
//! The pipeline is: load a CSV log, split it chronologically per driver,
//! fit a min-max scaler on the training split, scale everything, then cut
//! fixed-length overlapping windows that never cross a trip boundary.

mod csv_io;
mod prepare;
mod scaler;
mod split;
mod window;

pub use csv_io::{load_csv, write_table_csv, LoadStats};
pub use prepare::{prepare, PrepareConfig, PreparedData};
pub use scaler::Scaler;
pub use split::{split_chronological, SplitSpec};
pub use window::{make_windows, Window, WindowSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed CSV in {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),
    #[error("trip column {0:?} not found in header")]
    MissingTripColumn(String),
    #[error("no usable data rows after parsing")]
    NoUsableRows,
    #[error("no numeric feature columns after parsing")]
    NoFeatureColumns,
    #[error("need at least 2 distinct drivers, found {found}")]
    TooFewDrivers { found: usize },
    #[error("cannot fit a scaler on an empty row subset")]
    EmptyFitSubset,
    #[error("feature count mismatch: fitted for {fitted}, table has {given}")]
    FeatureCountMismatch { fitted: usize, given: usize },
    #[error("invalid split fractions ({train}, {val}, {test}): {reason}")]
    InvalidSplit {
        train: f64,
        val: f64,
        test: f64,
        reason: &'static str,
    },
    #[error("driver {driver:?} has too few rows: {part} part gets {rows} rows but needs {needed}")]
    DriverTooSmall {
        driver: String,
        part: &'static str,
        rows: usize,
        needed: usize,
    },
    #[error("invalid window parameters: length {window_length} (need >= 2), overlap {overlap} (need 0 <= overlap < 1)")]
    InvalidWindowParams { window_length: usize, overlap: f64 },
    #[error("driver {0:?} not present in the label set")]
    UnknownDriver(String),
}

/// One time step of sensor readings with its driver and trip labels
/// (stored as indices into the owning table's name lists).
#[derive(Clone, Debug)]
pub struct FrameRow {
    pub driver: usize,
    pub trip: usize,
    pub values: Vec<f64>,
}

/// A driver-labeled, trip-segmented table of numeric sensor readings, one
/// row per time step. Row order within a trip is treated as chronological.
#[derive(Clone, Debug, Default)]
pub struct FrameTable {
    feature_names: Vec<String>,
    label_column: String,
    trip_column: Option<String>,
    drivers: Vec<String>,
    trips: Vec<String>,
    rows: Vec<FrameRow>,
}

impl FrameTable {
    pub fn new(
        feature_names: Vec<String>,
        label_column: impl Into<String>,
        trip_column: Option<String>,
    ) -> Self {
        Self {
            feature_names,
            label_column: label_column.into(),
            trip_column,
            drivers: Vec::new(),
            trips: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, driver: &str, trip: &str, values: Vec<f64>) {
        assert_eq!(
            values.len(),
            self.feature_names.len(),
            "row value count must match feature count"
        );
        let driver = intern(&mut self.drivers, driver);
        let trip = intern(&mut self.trips, trip);
        self.rows.push(FrameRow {
            driver,
            trip,
            values,
        });
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn label_column(&self) -> &str {
        &self.label_column
    }

    pub fn trip_column(&self) -> Option<&str> {
        self.trip_column.as_deref()
    }

    pub fn rows(&self) -> &[FrameRow] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn driver_name(&self, idx: usize) -> &str {
        &self.drivers[idx]
    }

    pub fn trip_name(&self, idx: usize) -> &str {
        &self.trips[idx]
    }

    /// Distinct driver ids in sorted order; the canonical class-label list.
    pub fn driver_labels(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .rows
            .iter()
            .map(|r| r.driver)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .map(|i| self.drivers[i].clone())
            .collect();
        names.sort();
        names
    }

    pub fn distinct_driver_count(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.driver)
            .collect::<std::collections::BTreeSet<_>>()
            .len()
    }

    /// Row indices grouped by (driver, trip), groups in first-appearance
    /// order, indices in row order. Windows are cut per group so they never
    /// span two trips.
    pub fn segments(&self) -> Vec<Segment> {
        let mut order: Vec<(usize, usize)> = Vec::new();
        let mut groups: std::collections::HashMap<(usize, usize), Vec<usize>> =
            std::collections::HashMap::new();
        for (i, row) in self.rows.iter().enumerate() {
            let key = (row.driver, row.trip);
            groups
                .entry(key)
                .or_insert_with(|| {
                    order.push(key);
                    Vec::new()
                })
                .push(i);
        }
        order
            .into_iter()
            .map(|key| Segment {
                driver: key.0,
                trip: key.1,
                row_indices: groups.remove(&key).unwrap(),
            })
            .collect()
    }

    /// New table holding the given rows (in the given order), sharing the
    /// schema and name lists.
    pub fn subset(&self, row_indices: &[usize]) -> FrameTable {
        FrameTable {
            feature_names: self.feature_names.clone(),
            label_column: self.label_column.clone(),
            trip_column: self.trip_column.clone(),
            drivers: self.drivers.clone(),
            trips: self.trips.clone(),
            rows: row_indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Same table with every row's values replaced.
    pub(crate) fn with_values(&self, values: Vec<Vec<f64>>) -> FrameTable {
        assert_eq!(values.len(), self.rows.len());
        let rows = self
            .rows
            .iter()
            .zip(values)
            .map(|(r, v)| FrameRow {
                driver: r.driver,
                trip: r.trip,
                values: v,
            })
            .collect();
        FrameTable {
            feature_names: self.feature_names.clone(),
            label_column: self.label_column.clone(),
            trip_column: self.trip_column.clone(),
            drivers: self.drivers.clone(),
            trips: self.trips.clone(),
            rows,
        }
    }
}

/// One contiguous chronological run of rows for a single (driver, trip).
#[derive(Clone, Debug)]
pub struct Segment {
    pub driver: usize,
    pub trip: usize,
    pub row_indices: Vec<usize>,
}

fn intern(names: &mut Vec<String>, name: &str) -> usize {
    match names.iter().position(|n| n == name) {
        Some(i) => i,
        None => {
            names.push(name.to_string());
            names.len() - 1
        }
    }
}

/// Per-feature mean and (population) standard deviation, computed from the
/// clean training split. Noise severities are expressed in these units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureStats {
    pub fn from_table(table: &FrameTable) -> Result<Self, DataError> {
        let n = table.num_rows();
        if n == 0 {
            return Err(DataError::EmptyFitSubset);
        }
        let d = table.feature_count();
        let mut mean = vec![0.0; d];
        for row in table.rows() {
            for (m, &v) in mean.iter_mut().zip(&row.values) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut var = vec![0.0; d];
        for row in table.rows() {
            for ((s, &v), m) in var.iter_mut().zip(&row.values).zip(&mean) {
                let dlt = v - m;
                *s += dlt * dlt;
            }
        }
        let std = var.into_iter().map(|s| (s / n as f64).sqrt()).collect();
        Ok(Self { mean, std })
    }
}
