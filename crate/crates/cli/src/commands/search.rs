//! `drivesig search`: grid search over hidden sizes and window lengths,
//! ranked by validation macro-F1 under a shared epoch budget.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use drivesig::data::{split_chronological, Scaler};
use drivesig::eval::{grid_search, GridSearchRow};

use crate::commands::{data_flags, digest_entry, insert_flag, load_table, model_config, net_flags, prepare_config};
use crate::util::{
    configure_jobs, format_hidden, parse_hidden_grid, parse_usize_list, resolve_seed,
    write_run_metadata, write_text, AppError,
};
use crate::{CommonOpts, DataOpts, NetOpts};

fn render_search_csv(rows: &[GridSearchRow]) -> String {
    let mut out = String::from("rank,hidden_sizes,window_length,val_macro_f1\n");
    for (i, row) in rows.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            format_hidden(&row.hidden_sizes),
            row.window_length,
            row.val_macro_f1
        );
    }
    out
}

pub fn run(
    common: &CommonOpts,
    data: &DataOpts,
    net: &NetOpts,
    hidden_grid_raw: &str,
    window_grid_raw: &str,
    budget: usize,
    out_dir: &Path,
) -> Result<(), AppError> {
    let seed = resolve_seed(common.seed)?;
    configure_jobs(common.jobs)?;

    let hidden_grid = parse_hidden_grid(hidden_grid_raw)
        .map_err(|e| AppError::Usage(format!("--hidden-grid: {e}")))?;
    let window_grid = parse_usize_list(window_grid_raw)
        .map_err(|e| AppError::Usage(format!("--window-grid: {e}")))?;
    if let Some(&bad) = window_grid.iter().find(|&&w| w < 2) {
        return Err(AppError::Usage(format!(
            "--window-grid entries must be at least 2, got {bad}"
        )));
    }
    let cfg = prepare_config(data)?;
    let base = model_config(net, data.window_length)?;

    let (table, _) = load_table(&data.data, &data.label_col, data.trip_col.as_deref())?;
    // Split once with the longest candidate so every cell gets at least one
    // full window per driver and all cells score the same validation rows.
    let longest = *window_grid.iter().max().expect("grid checked non-empty");
    let (train_raw, val_raw, _) = split_chronological(&table, cfg.split, longest)?;
    let scaler = if cfg.scale_globally {
        Scaler::fit(&table)?
    } else {
        Scaler::fit(&train_raw)?
    };
    let train_table = scaler.transform(&train_raw)?;
    let val_table = scaler.transform(&val_raw)?;
    let label_names = table.driver_labels();

    println!("seed: {seed}");
    println!(
        "searching {} hidden-size x {} window-length cells (epoch budget {budget})",
        hidden_grid.len(),
        window_grid.len()
    );

    let rows = grid_search(
        &hidden_grid,
        &window_grid,
        &train_table,
        &val_table,
        &label_names,
        cfg.overlap,
        &base,
        budget,
        seed,
    )?;

    let best = &rows[0];
    println!(
        "best: hidden {} window {} (val macro-F1 {:.4})",
        format_hidden(&best.hidden_sizes),
        best.window_length,
        best.val_macro_f1
    );

    let csv_path = out_dir.join("search.csv");
    write_text(&csv_path, &render_search_csv(&rows))?;
    let mut flags = BTreeMap::new();
    insert_flag(&mut flags, "seed", seed);
    insert_flag(&mut flags, "hidden_grid", hidden_grid_raw);
    insert_flag(&mut flags, "window_grid", window_grid_raw);
    insert_flag(&mut flags, "budget", budget);
    insert_flag(&mut flags, "out_dir", out_dir.display());
    data_flags(&mut flags, data);
    net_flags(&mut flags, net);
    let mut digests = BTreeMap::new();
    digest_entry(&mut digests, &data.data)?;
    write_run_metadata(
        &out_dir.join("search_meta.json"),
        "search",
        &flags,
        &digests,
        &[csv_path.display().to_string()],
    )?;
    println!("wrote ranking to {}", csv_path.display());
    Ok(())
}
