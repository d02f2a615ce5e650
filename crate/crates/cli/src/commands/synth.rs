//! `drivesig synth`: deterministic multi-driver telemetry generation.

use std::collections::BTreeMap;
use std::path::Path;

use drivesig::data::write_table_csv;
use drivesig::synth::{default_profiles, generate};

use crate::commands::insert_flag;
use crate::util::{configure_jobs, resolve_seed, write_run_metadata, AppError};
use crate::CommonOpts;

pub fn run(
    common: &CommonOpts,
    out: &Path,
    drivers: usize,
    trips: usize,
    rows_per_trip: usize,
) -> Result<(), AppError> {
    let seed = resolve_seed(common.seed)?;
    configure_jobs(common.jobs)?;

    let all = default_profiles();
    if drivers < 2 || drivers > all.len() {
        return Err(AppError::Usage(format!(
            "--drivers must lie in 2..={}, got {drivers}",
            all.len()
        )));
    }
    let profiles = &all[..drivers];
    let feature_count = profiles[0].cruising.len();
    let table = generate(profiles, trips, rows_per_trip, feature_count, seed)?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| AppError::Data(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    write_table_csv(&table, out)?;

    let mut flags = BTreeMap::new();
    insert_flag(&mut flags, "seed", seed);
    insert_flag(&mut flags, "drivers", drivers);
    insert_flag(&mut flags, "trips", trips);
    insert_flag(&mut flags, "rows_per_trip", rows_per_trip);
    insert_flag(&mut flags, "out", out.display());
    let meta_path = out.with_extension("meta.json");
    write_run_metadata(
        &meta_path,
        "synth",
        &flags,
        &BTreeMap::new(),
        &[out.display().to_string()],
    )?;

    println!("seed: {seed}");
    println!(
        "wrote {} rows ({} drivers x {} trips x {} rows, {} channels) to {}",
        table.num_rows(),
        drivers,
        trips,
        rows_per_trip,
        feature_count,
        out.display()
    );
    Ok(())
}
