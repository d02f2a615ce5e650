//! `drivesig prepare`: chronological split cached as raw CSV parts.
//!
//! The split files keep raw (unscaled) values so downstream commands can
//! fit their own scaler without double-scaling; scaling always happens at
//! train/evaluate time from the bundle.

use std::collections::BTreeMap;
use std::path::Path;

use drivesig::data::{split_chronological, write_table_csv};

use crate::commands::{data_flags, digest_entry, insert_flag, load_table, prepare_config};
use crate::util::{configure_jobs, resolve_seed, write_run_metadata, AppError};
use crate::{CommonOpts, DataOpts};

pub fn run(common: &CommonOpts, data: &DataOpts, out_dir: &Path) -> Result<(), AppError> {
    let seed = resolve_seed(common.seed)?;
    configure_jobs(common.jobs)?;
    let cfg = prepare_config(data)?;

    let (table, stats) = load_table(&data.data, &data.label_col, data.trip_col.as_deref())?;
    let (train, val, test) = split_chronological(&table, cfg.split, cfg.window_length)?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| AppError::Data(format!("cannot create {}: {e}", out_dir.display())))?;
    let parts = [("train.csv", &train), ("val.csv", &val), ("test.csv", &test)];
    let mut outputs = Vec::new();
    for (name, part) in parts {
        let path = out_dir.join(name);
        write_table_csv(part, &path)?;
        outputs.push(path.display().to_string());
    }

    let mut flags = BTreeMap::new();
    insert_flag(&mut flags, "seed", seed);
    data_flags(&mut flags, data);
    insert_flag(&mut flags, "out_dir", out_dir.display());
    let mut digests = BTreeMap::new();
    digest_entry(&mut digests, &data.data)?;
    write_run_metadata(
        &out_dir.join("prepare_meta.json"),
        "prepare",
        &flags,
        &digests,
        &outputs,
    )?;

    println!("seed: {seed}");
    println!(
        "loaded {} rows, {} drivers ({} rows dropped)",
        table.num_rows(),
        table.distinct_driver_count(),
        stats.dropped_rows
    );
    println!(
        "split rows: train {} / val {} / test {}",
        train.num_rows(),
        val.num_rows(),
        test.num_rows()
    );
    println!("wrote raw split CSVs to {}", out_dir.display());
    Ok(())
}
