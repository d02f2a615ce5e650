//! `drivesig train-corrupted`: train every model kind on noise-corrupted
//! splits and write a side-by-side test comparison.
//!
//! Noise hits train, validation, and test alike (distinct streams), which
//! mirrors deploying on sensors as bad as the ones that logged training.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use drivesig::corruption::NoiseSpec;
use drivesig::eval::{train_on_corrupted, CorruptedTrainingRow, SuiteConfig};
use drivesig::model::{save_bundle, ModelBundle, FORMAT_VERSION};

use crate::commands::{
    data_flags, digest_entry, forest_config, insert_flag, model_config, net_flags,
    prepare_from_opts, tree_config, tree_flags,
};
use crate::util::{configure_jobs, resolve_seed, write_run_metadata, write_text, AppError};
use crate::{CommonOpts, DataOpts, NetOpts, TreeOpts};

fn render_comparison_csv(rows: &[CorruptedTrainingRow]) -> String {
    let mut out = String::from("model,accuracy,macro_f1\n");
    for row in rows {
        let _ = writeln!(out, "{},{},{}", row.model, row.accuracy, row.macro_f1);
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    common: &CommonOpts,
    data: &DataOpts,
    net: &NetOpts,
    tree: &TreeOpts,
    level: f64,
    severity: f64,
    noise_seed: Option<u64>,
    out_dir: &Path,
) -> Result<(), AppError> {
    let seed = resolve_seed(common.seed)?;
    configure_jobs(common.jobs)?;

    let noise = NoiseSpec {
        level_n: level,
        severity_s: severity,
        seed: noise_seed.unwrap_or(seed),
    };
    let net_cfg = model_config(net, data.window_length)?;
    let suite_cfg = SuiteConfig {
        lstm: net_cfg.clone(),
        fcnn: net_cfg,
        tree: tree_config(tree),
        forest: forest_config(tree),
    };

    let (_, _, prepared) = prepare_from_opts(data)?;
    println!("seed: {seed}");
    println!(
        "training on corrupted data (level {level}, severity {severity}, noise seed {})",
        noise.seed
    );

    let (models, rows) = train_on_corrupted(
        &prepared.train_windows,
        &prepared.val_windows,
        &prepared.test_windows,
        &noise,
        &prepared.train_stats,
        &suite_cfg,
        seed,
    )?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| AppError::Data(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut outputs = Vec::new();
    for (name, payload) in models {
        let bundle = ModelBundle {
            format_version: FORMAT_VERSION,
            label_names: prepared.label_names.clone(),
            feature_names: prepared.feature_names.clone(),
            scaler: prepared.scaler.clone(),
            train_stats: prepared.train_stats.clone(),
            window_length: data.window_length,
            overlap: data.overlap,
            payload,
        };
        let path = out_dir.join(format!("{name}.json"));
        save_bundle(&bundle, &path)?;
        outputs.push(path.display().to_string());
    }
    let comparison_path = out_dir.join("comparison.csv");
    write_text(&comparison_path, &render_comparison_csv(&rows))?;
    outputs.push(comparison_path.display().to_string());

    for row in &rows {
        println!(
            "{}: corrupted-test accuracy {:.4}, macro-F1 {:.4}",
            row.model, row.accuracy, row.macro_f1
        );
    }

    let mut flags = BTreeMap::new();
    insert_flag(&mut flags, "seed", seed);
    insert_flag(&mut flags, "level", level);
    insert_flag(&mut flags, "severity", severity);
    insert_flag(&mut flags, "noise_seed", noise.seed);
    insert_flag(&mut flags, "out_dir", out_dir.display());
    data_flags(&mut flags, data);
    net_flags(&mut flags, net);
    tree_flags(&mut flags, tree);
    let mut digests = BTreeMap::new();
    digest_entry(&mut digests, &data.data)?;
    write_run_metadata(
        &out_dir.join("train_corrupted_meta.json"),
        "train-corrupted",
        &flags,
        &digests,
        &outputs,
    )?;
    println!("wrote bundles and comparison.csv to {}", out_dir.display());
    Ok(())
}
