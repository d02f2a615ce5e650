//! Fixed-length overlapping window extraction for sequence models.

use crate::numerics::Matrix;

use super::{DataError, FrameTable};

/// One training example: `window_length` consecutive rows from a single
/// trip, with the driver's class index as label.
#[derive(Clone, Debug)]
pub struct Window {
    /// `window_length x feature_count`; row `t` is the reading at step `t`.
    pub data: Matrix,
    /// Index into the label-name list the windows were built against.
    pub label: usize,
}

/// All windows cut from one table, plus the parameters that produced them.
#[derive(Clone, Debug)]
pub struct WindowSet {
    pub windows: Vec<Window>,
    pub window_length: usize,
    pub stride: usize,
    pub feature_count: usize,
    pub label_names: Vec<String>,
}

impl WindowSet {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.label_names.len()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.windows.iter().map(|w| w.label).collect()
    }
}

/// Stride between window starts: `round(window_length * (1 - overlap))`,
/// never below 1. Overlap 0.5 on an even length advances half a window.
pub fn window_stride(window_length: usize, overlap: f64) -> usize {
    ((window_length as f64) * (1.0 - overlap)).round().max(1.0) as usize
}

/// Cuts overlapping windows from every (driver, trip) segment of `table`.
///
/// Each segment yields `floor((len - window_length) / stride) + 1` windows
/// when it has at least `window_length` rows, and none otherwise; windows
/// never span two trips or two drivers. Labels are indices into
/// `label_names`, which must cover every driver in the table.
pub fn make_windows(
    table: &FrameTable,
    window_length: usize,
    overlap: f64,
    label_names: &[String],
) -> Result<WindowSet, DataError> {
    if window_length < 2 || !overlap.is_finite() || !(0.0..1.0).contains(&overlap) {
        return Err(DataError::InvalidWindowParams {
            window_length,
            overlap,
        });
    }
    let stride = window_stride(window_length, overlap);
    let d = table.feature_count();
    let rows = table.rows();

    let mut windows = Vec::new();
    for segment in table.segments() {
        let driver = table.driver_name(segment.driver);
        let label = label_names
            .iter()
            .position(|n| n == driver)
            .ok_or_else(|| DataError::UnknownDriver(driver.to_string()))?;
        let seg = &segment.row_indices;
        if seg.len() < window_length {
            continue;
        }
        let mut start = 0;
        while start + window_length <= seg.len() {
            let mut data = Matrix::zeros(window_length, d);
            for (t, &row_idx) in seg[start..start + window_length].iter().enumerate() {
                data.row_mut(t).copy_from_slice(&rows[row_idx].values);
            }
            windows.push(Window { data, label });
            start += stride;
        }
    }

    Ok(WindowSet {
        windows,
        window_length,
        stride,
        feature_count: d,
        label_names: label_names.to_vec(),
    })
}
