//! Architecture grid search: trains a reduced-budget sequence model for
//! every (hidden sizes, window length) combination and ranks the
//! configurations by validation macro-F1.

use serde::Serialize;

use crate::data::{make_windows, FrameTable};
use crate::eval::{evaluate, EvalError};
use crate::model::{train, ModelConfig, ModelPayload};

/// Epoch cap per grid cell; the winner is meant to be retrained fully.
pub const DEFAULT_GRID_EPOCH_BUDGET: usize = 25;

/// Window lengths tried by default.
pub const DEFAULT_WINDOW_GRID: [usize; 6] = [4, 8, 16, 32, 64, 120];

/// One evaluated configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSearchRow {
    pub hidden_sizes: Vec<usize>,
    pub window_length: usize,
    pub val_macro_f1: f64,
}

/// Trains one model per grid cell on windows rebuilt at each candidate
/// length, then returns all rows sorted by validation macro-F1, best
/// first. Ties keep grid order (hidden sizes outer, window length inner).
/// Training uses `base` for everything but the swept fields, with epochs
/// capped at `epoch_budget`. Deterministic given `seed`.
pub fn grid_search(
    hidden_grid: &[Vec<usize>],
    window_grid: &[usize],
    train_table: &FrameTable,
    val_table: &FrameTable,
    label_names: &[String],
    overlap: f64,
    base: &ModelConfig,
    epoch_budget: usize,
    seed: u64,
) -> Result<Vec<GridSearchRow>, EvalError> {
    if hidden_grid.is_empty() || window_grid.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    let mut rows = Vec::with_capacity(hidden_grid.len() * window_grid.len());
    for hidden in hidden_grid {
        for &window_length in window_grid {
            let train_ws = make_windows(train_table, window_length, overlap, label_names)?;
            let val_ws = make_windows(val_table, window_length, overlap, label_names)?;
            let mut config = base.clone();
            config.hidden_sizes = hidden.clone();
            config.window_length = window_length;
            config.num_classes = label_names.len();
            config.max_epochs = base.max_epochs.min(epoch_budget);
            let (model, _) = train(&train_ws, &val_ws, config, seed)?;
            let outcome = evaluate(&ModelPayload::Lstm(model), &val_ws)?;
            rows.push(GridSearchRow {
                hidden_sizes: hidden.clone(),
                window_length,
                val_macro_f1: outcome.report.macro_f1,
            });
        }
    }
    rows.sort_by(|a, b| {
        b.val_macro_f1
            .partial_cmp(&a.val_macro_f1)
            .expect("macro-F1 is always finite")
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    /// Two drivers, one trip each, rows clustered around distinct levels.
    fn level_table(rows_per_driver: usize, seed: u64) -> FrameTable {
        let mut rng = SeededRng::new(seed);
        let names = vec!["s".into(), "r".into()];
        let mut table = FrameTable::new(names, "driver", None);
        for (driver, center) in [("A", 0.25), ("B", 0.75)] {
            for _ in 0..rows_per_driver {
                let v = vec![
                    center + 0.05 * rng.next_gaussian(),
                    center + 0.05 * rng.next_gaussian(),
                ];
                table.push_row(driver, "t0", v);
            }
        }
        table
    }

    fn quick_config() -> ModelConfig {
        ModelConfig {
            hidden_sizes: vec![4],
            batch_size: 16,
            max_epochs: 200,
            early_stop_patience: 2,
            ..Default::default()
        }
    }

    #[test]
    fn single_cell_grid_returns_that_configuration_first() {
        let train = level_table(40, 80);
        let val = level_table(16, 81);
        let labels = train.driver_labels();
        let rows = grid_search(
            &[vec![4]],
            &[4],
            &train,
            &val,
            &labels,
            0.5,
            &quick_config(),
            2,
            7,
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].hidden_sizes, vec![4]);
        assert_eq!(rows[0].window_length, 4);
    }

    #[test]
    fn row_count_is_grid_product_and_sorted_descending() {
        let train = level_table(40, 82);
        let val = level_table(16, 83);
        let labels = train.driver_labels();
        let rows = grid_search(
            &[vec![3], vec![5]],
            &[4, 8],
            &train,
            &val,
            &labels,
            0.5,
            &quick_config(),
            2,
            7,
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        for pair in rows.windows(2) {
            assert!(pair[0].val_macro_f1 >= pair[1].val_macro_f1);
        }
    }

    #[test]
    fn search_is_deterministic_for_equal_seed() {
        let train = level_table(30, 84);
        let val = level_table(12, 85);
        let labels = train.driver_labels();
        let run = || {
            grid_search(
                &[vec![3]],
                &[4, 6],
                &train,
                &val,
                &labels,
                0.5,
                &quick_config(),
                2,
                11,
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn empty_grids_are_errors() {
        let train = level_table(20, 86);
        let val = level_table(10, 87);
        let labels = train.driver_labels();
        let empty_hidden: &[Vec<usize>] = &[];
        assert!(matches!(
            grid_search(
                empty_hidden,
                &[4],
                &train,
                &val,
                &labels,
                0.5,
                &quick_config(),
                2,
                1
            ),
            Err(EvalError::EmptyGrid)
        ));
        assert!(matches!(
            grid_search(
                &[vec![4]],
                &[],
                &train,
                &val,
                &labels,
                0.5,
                &quick_config(),
                2,
                1
            ),
            Err(EvalError::EmptyGrid)
        ));
    }
}
