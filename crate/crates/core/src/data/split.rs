//! Chronological per-driver train/validation/test splitting.

use serde::{Deserialize, Serialize};

use super::{DataError, FrameTable};

/// Train/validation/test fractions. Each must be strictly positive and they
/// must sum to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitSpec {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self, DataError> {
        let err = |reason| DataError::InvalidSplit {
            train,
            val,
            test,
            reason,
        };
        for f in [train, val, test] {
            if !f.is_finite() || f <= 0.0 || f >= 1.0 {
                return Err(err("each fraction must lie strictly between 0 and 1"));
            }
        }
        if (train + val + test - 1.0).abs() > 1e-9 {
            return Err(err("fractions must sum to 1"));
        }
        Ok(Self { train, val, test })
    }
}

impl Default for SplitSpec {
    /// The 85% / 5% / 10% split used throughout the toolkit.
    fn default() -> Self {
        Self {
            train: 0.85,
            val: 0.05,
            test: 0.10,
        }
    }
}

/// Splits each driver's rows chronologically: the earliest `train` fraction
/// of that driver's rows goes to training, the next `val` fraction to
/// validation, and the remainder to test.
///
/// Counts are `floor(N * train)` and `floor(N * val)`, with test taking the
/// rest, so every row lands in exactly one part. `min_rows_per_part` guards
/// against drivers too short to window: if any part of any driver would get
/// fewer rows, the split fails with [`DataError::DriverTooSmall`].
pub fn split_chronological(
    table: &FrameTable,
    spec: SplitSpec,
    min_rows_per_part: usize,
) -> Result<(FrameTable, FrameTable, FrameTable), DataError> {
    let needed = min_rows_per_part.max(1);

    // Row indices per driver, preserving file (chronological) order.
    let mut order: Vec<usize> = Vec::new();
    let mut per_driver: std::collections::HashMap<usize, Vec<usize>> =
        std::collections::HashMap::new();
    for (i, row) in table.rows().iter().enumerate() {
        per_driver
            .entry(row.driver)
            .or_insert_with(|| {
                order.push(row.driver);
                Vec::new()
            })
            .push(i);
    }

    let mut train_idx = Vec::new();
    let mut val_idx = Vec::new();
    let mut test_idx = Vec::new();
    for driver in order {
        let rows = &per_driver[&driver];
        let n = rows.len();
        let n_train = (n as f64 * spec.train).floor() as usize;
        let n_val = (n as f64 * spec.val).floor() as usize;
        let n_test = n - n_train - n_val;
        for (part, count) in [("train", n_train), ("val", n_val), ("test", n_test)] {
            if count < needed {
                return Err(DataError::DriverTooSmall {
                    driver: table.driver_name(driver).to_string(),
                    part,
                    rows: count,
                    needed,
                });
            }
        }
        train_idx.extend_from_slice(&rows[..n_train]);
        val_idx.extend_from_slice(&rows[n_train..n_train + n_val]);
        test_idx.extend_from_slice(&rows[n_train + n_val..]);
    }

    Ok((
        table.subset(&train_idx),
        table.subset(&val_idx),
        table.subset(&test_idx),
    ))
}
