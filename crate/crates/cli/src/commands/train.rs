//! `drivesig train`: fit one model kind and save it as a bundle that
//! carries its own preprocessing (scaler, window geometry, labels).

use std::collections::BTreeMap;
use std::path::Path;

use drivesig::baselines::{train_fcnn, train_forest, train_tree};
use drivesig::data::WindowSet;
use drivesig::eval::{evaluate, windows_to_rows};
use drivesig::model::{save_bundle, train, ModelBundle, ModelPayload, FORMAT_VERSION};

use crate::commands::{
    data_flags, digest_entry, forest_config, insert_flag, model_config, net_flags,
    prepare_from_opts, tree_config, tree_flags,
};
use crate::util::{configure_jobs, resolve_seed, write_run_metadata, AppError};
use crate::{CommonOpts, DataOpts, NetOpts, TreeOpts};

/// Canonical kind for a user-supplied `--model` value; the short forms
/// `tree` and `forest` are accepted aliases.
fn parse_kind(raw: &str) -> Result<&'static str, AppError> {
    match raw {
        "lstm" => Ok("lstm"),
        "tree" | "decision_tree" => Ok("decision_tree"),
        "forest" | "random_forest" => Ok("random_forest"),
        "fcnn" => Ok("fcnn"),
        other => Err(AppError::Usage(format!(
            "--model must be one of lstm, tree, forest, fcnn; got {other:?}"
        ))),
    }
}

fn fit(
    kind: &str,
    train_windows: &WindowSet,
    val_windows: &WindowSet,
    net: &NetOpts,
    tree: &TreeOpts,
    seed: u64,
) -> Result<ModelPayload, AppError> {
    let num_classes = train_windows.class_count();
    match kind {
        "lstm" => {
            let mut cfg = model_config(net, train_windows.window_length)?;
            cfg.num_classes = num_classes;
            let (model, _) = train(train_windows, val_windows, cfg, seed)?;
            Ok(ModelPayload::Lstm(model))
        }
        "decision_tree" => {
            let (rows, labels) = windows_to_rows(train_windows);
            let model = train_tree(&rows, &labels, num_classes, tree_config(tree))?;
            Ok(ModelPayload::DecisionTree(model))
        }
        "random_forest" => {
            let (rows, labels) = windows_to_rows(train_windows);
            let model = train_forest(&rows, &labels, num_classes, forest_config(tree), seed)?;
            Ok(ModelPayload::RandomForest(model))
        }
        "fcnn" => {
            let mut cfg = model_config(net, train_windows.window_length)?;
            cfg.num_classes = num_classes;
            let (rows, labels) = windows_to_rows(train_windows);
            let (val_rows, val_labels) = windows_to_rows(val_windows);
            let (model, _) = train_fcnn(&rows, &labels, &val_rows, &val_labels, cfg, seed)?;
            Ok(ModelPayload::Fcnn(model))
        }
        _ => unreachable!("parse_kind admits only known kinds"),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    common: &CommonOpts,
    data: &DataOpts,
    net: &NetOpts,
    tree: &TreeOpts,
    model: &str,
    out: &Path,
) -> Result<(), AppError> {
    let seed = resolve_seed(common.seed)?;
    configure_jobs(common.jobs)?;
    let kind = parse_kind(model)?;

    let (_, _, prepared) = prepare_from_opts(data)?;
    println!("seed: {seed}");
    println!(
        "windows: train {} / val {} / test {} ({} drivers)",
        prepared.train_windows.len(),
        prepared.val_windows.len(),
        prepared.test_windows.len(),
        prepared.label_names.len()
    );

    let payload = fit(
        kind,
        &prepared.train_windows,
        &prepared.val_windows,
        net,
        tree,
        seed,
    )?;

    for (split, windows) in [
        ("train", &prepared.train_windows),
        ("val", &prepared.val_windows),
        ("test", &prepared.test_windows),
    ] {
        let outcome = evaluate(&payload, windows)?;
        println!(
            "{split}: accuracy {:.4}, macro-F1 {:.4} ({} windows)",
            outcome.report.accuracy,
            outcome.report.macro_f1,
            windows.len()
        );
    }

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
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| AppError::Data(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    save_bundle(&bundle, out)?;

    let mut flags = BTreeMap::new();
    insert_flag(&mut flags, "seed", seed);
    insert_flag(&mut flags, "model", kind);
    insert_flag(&mut flags, "out", out.display());
    data_flags(&mut flags, data);
    net_flags(&mut flags, net);
    tree_flags(&mut flags, tree);
    let mut digests = BTreeMap::new();
    digest_entry(&mut digests, &data.data)?;
    write_run_metadata(
        &out.with_extension("meta.json"),
        "train",
        &flags,
        &digests,
        &[out.display().to_string()],
    )?;
    println!("saved {kind} bundle to {}", out.display());
    Ok(())
}
