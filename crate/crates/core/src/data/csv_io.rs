//! CSV reading and writing for driver-labeled sensor logs.

use std::path::Path;

use super::{DataError, FrameTable};

/// What `load_csv` had to discard to produce a clean numeric table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadStats {
    /// Columns dropped because fewer than half their values parse as finite
    /// numbers (header order).
    pub dropped_columns: Vec<String>,
    /// Rows dropped because a kept feature failed to parse or the label was
    /// empty.
    pub dropped_rows: usize,
}

fn parse_cell(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Loads a CSV log into a [`FrameTable`].
///
/// Every column except the label and (optional) trip column is a feature
/// candidate. A candidate is kept when at least half of its values parse as
/// finite `f64`; other columns are dropped and reported in [`LoadStats`].
/// Rows where any kept feature fails to parse, or the label is empty, are
/// dropped. The result must contain at least one row and two distinct
/// drivers.
pub fn load_csv(
    path: &Path,
    label_column: &str,
    trip_column: Option<&str>,
) -> Result<(FrameTable, LoadStats), DataError> {
    let io_err = |source| DataError::Io {
        path: path.display().to_string(),
        source,
    };
    let csv_err = |source| DataError::Csv {
        path: path.display().to_string(),
        source,
    };

    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);

    let headers: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DataError::MissingLabelColumn(label_column.to_string()))?;
    let trip_idx = match trip_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DataError::MissingTripColumn(name.to_string()))?,
        ),
        None => None,
    };

    let candidate_idx: Vec<usize> = (0..headers.len())
        .filter(|&i| i != label_idx && Some(i) != trip_idx)
        .collect();

    let mut records = Vec::new();
    for record in reader.records() {
        records.push(record.map_err(csv_err)?);
    }

    // First pass: decide which candidate columns are numeric.
    let mut parse_counts = vec![0usize; candidate_idx.len()];
    for record in &records {
        for (slot, &col) in parse_counts.iter_mut().zip(&candidate_idx) {
            if record.get(col).and_then(parse_cell).is_some() {
                *slot += 1;
            }
        }
    }
    let total = records.len();
    let mut feature_idx = Vec::new();
    let mut dropped_columns = Vec::new();
    for (&col, &count) in candidate_idx.iter().zip(&parse_counts) {
        if total > 0 && count * 2 >= total {
            feature_idx.push(col);
        } else {
            dropped_columns.push(headers[col].clone());
        }
    }

    if feature_idx.is_empty() {
        return Err(DataError::NoFeatureColumns);
    }

    let feature_names: Vec<String> = feature_idx.iter().map(|&i| headers[i].clone()).collect();
    let mut table = FrameTable::new(
        feature_names,
        label_column,
        trip_column.map(str::to_string),
    );

    // Second pass: build rows, dropping any with an unparsable kept cell.
    let mut dropped_rows = 0usize;
    for record in &records {
        let driver = record.get(label_idx).map(str::trim).unwrap_or("");
        if driver.is_empty() {
            dropped_rows += 1;
            continue;
        }
        let trip = trip_idx
            .and_then(|i| record.get(i))
            .map(str::trim)
            .unwrap_or("");
        let mut values = Vec::with_capacity(feature_idx.len());
        let mut ok = true;
        for &col in &feature_idx {
            match record.get(col).and_then(parse_cell) {
                Some(v) => values.push(v),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            table.push_row(driver, trip, values);
        } else {
            dropped_rows += 1;
        }
    }

    if table.num_rows() == 0 {
        return Err(DataError::NoUsableRows);
    }
    let found = table.distinct_driver_count();
    if found < 2 {
        return Err(DataError::TooFewDrivers { found });
    }

    Ok((
        table,
        LoadStats {
            dropped_columns,
            dropped_rows,
        },
    ))
}

/// Writes a table back out as CSV: feature columns in order, then the trip
/// column (when the table has one), then the label column. Floats use the
/// shortest representation that round-trips, so rewriting a loaded table is
/// lossless.
pub fn write_table_csv(table: &FrameTable, path: &Path) -> Result<(), DataError> {
    let io_err = |source| DataError::Io {
        path: path.display().to_string(),
        source,
    };
    let csv_err = |source| DataError::Csv {
        path: path.display().to_string(),
        source,
    };

    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut writer = csv::Writer::from_writer(file);

    let mut header: Vec<&str> = table.feature_names().iter().map(String::as_str).collect();
    if let Some(trip) = table.trip_column() {
        header.push(trip);
    }
    header.push(table.label_column());
    writer.write_record(&header).map_err(csv_err)?;

    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for row in table.rows() {
        record.clear();
        record.extend(row.values.iter().map(|v| v.to_string()));
        if table.trip_column().is_some() {
            record.push(table.trip_name(row.trip).to_string());
        }
        record.push(table.driver_name(row.driver).to_string());
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush().map_err(io_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn three_row_file_maps_values_and_labels() {
        let f = write_temp(
            "speed,rpm,driver\n\
             10.0,2000,A\n\
             11.5,2100,A\n\
             9.0,1800,B\n",
        );
        let (table, stats) = load_csv(f.path(), "driver", None).unwrap();
        assert_eq!(table.num_rows(), 3);
        assert_eq!(table.feature_names(), &["speed".to_string(), "rpm".to_string()]);
        assert_eq!(table.rows()[0].values, vec![10.0, 2000.0]);
        assert_eq!(table.rows()[2].values, vec![9.0, 1800.0]);
        assert_eq!(table.driver_name(table.rows()[2].driver), "B");
        assert_eq!(stats, LoadStats::default());
    }

    #[test]
    fn text_column_is_dropped_and_counted() {
        let f = write_temp(
            "speed,comment,driver\n\
             10.0,smooth,A\n\
             11.0,braking,A\n\
             12.0,idle,B\n",
        );
        let (table, stats) = load_csv(f.path(), "driver", None).unwrap();
        assert_eq!(table.feature_names(), &["speed".to_string()]);
        assert_eq!(stats.dropped_columns, vec!["comment".to_string()]);
        assert_eq!(stats.dropped_rows, 0);
    }

    #[test]
    fn mostly_numeric_column_survives_and_bad_rows_drop() {
        let f = write_temp(
            "speed,rpm,driver\n\
             10.0,2000,A\n\
             11.0,n/a,A\n\
             12.0,2200,B\n\
             13.0,2300,B\n",
        );
        let (table, stats) = load_csv(f.path(), "driver", None).unwrap();
        assert_eq!(table.feature_names().len(), 2);
        assert_eq!(table.num_rows(), 3);
        assert_eq!(stats.dropped_rows, 1);
        assert!(stats.dropped_columns.is_empty());
    }

    #[test]
    fn missing_label_column_is_distinct_error() {
        let f = write_temp("speed,rpm\n10.0,2000\n");
        match load_csv(f.path(), "driver", None) {
            Err(DataError::MissingLabelColumn(name)) => assert_eq!(name, "driver"),
            other => panic!("expected MissingLabelColumn, got {other:?}"),
        }
    }

    #[test]
    fn missing_trip_column_is_distinct_error() {
        let f = write_temp("speed,driver\n10.0,A\n11.0,B\n");
        assert!(matches!(
            load_csv(f.path(), "driver", Some("trip")),
            Err(DataError::MissingTripColumn(_))
        ));
    }

    #[test]
    fn zero_usable_rows_is_distinct_error() {
        let f = write_temp("speed,driver\n1.0,\n2.0,\n");
        assert!(matches!(
            load_csv(f.path(), "driver", None),
            Err(DataError::NoUsableRows)
        ));
    }

    #[test]
    fn all_text_features_is_distinct_error() {
        let f = write_temp("speed,driver\nfast,A\nslow,B\n");
        assert!(matches!(
            load_csv(f.path(), "driver", None),
            Err(DataError::NoFeatureColumns)
        ));
    }

    #[test]
    fn single_driver_is_distinct_error() {
        let f = write_temp("speed,driver\n1.0,A\n2.0,A\n");
        match load_csv(f.path(), "driver", None) {
            Err(DataError::TooFewDrivers { found }) => assert_eq!(found, 1),
            other => panic!("expected TooFewDrivers, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_csv(Path::new("/nonexistent/log.csv"), "driver", None),
            Err(DataError::Io { .. })
        ));
    }

    #[test]
    fn write_then_load_round_trips_exactly() {
        let mut table = FrameTable::new(
            vec!["speed".into(), "rpm".into()],
            "driver",
            Some("trip".into()),
        );
        table.push_row("A", "t1", vec![10.25, 2000.0]);
        table.push_row("A", "t2", vec![0.1 + 0.2, -3.5e-7]);
        table.push_row("B", "t1", vec![1.0 / 3.0, 12345.678]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_table_csv(&table, &path).unwrap();
        let (back, stats) = load_csv(&path, "driver", Some("trip")).unwrap();
        assert_eq!(stats, LoadStats::default());
        assert_eq!(back.num_rows(), 3);
        for (a, b) in table.rows().iter().zip(back.rows()) {
            assert_eq!(a.values, b.values, "floats must round-trip bitwise");
        }
        assert_eq!(back.trip_name(back.rows()[1].trip), "t2");
    }
}
