//! `drivesig evaluate`: score a saved bundle on every window of a CSV.
//!
//! Preprocessing (scaler, window geometry, label order) comes from the
//! bundle, so the input CSV is raw sensor rows exactly like training data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use drivesig::data::make_windows;
use drivesig::eval::{evaluate, ConfusionMatrix, MetricsReport};
use drivesig::model::{load_bundle, ModelBundle};

use crate::commands::{digest_entry, insert_flag, load_table};
use crate::util::{configure_jobs, resolve_seed, write_run_metadata, write_text, AppError};
use crate::CommonOpts;

fn class_name(bundle: &ModelBundle, index: usize) -> String {
    bundle
        .label_names
        .get(index)
        .cloned()
        .unwrap_or_else(|| format!("class_{index}"))
}

/// `class,precision,recall,f1,support` rows plus closing macro line.
fn render_metrics_csv(bundle: &ModelBundle, report: &MetricsReport) -> String {
    let mut out = String::from("class,precision,recall,f1,support\n");
    for (i, m) in report.per_class.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            class_name(bundle, i),
            m.precision,
            m.recall,
            m.f1,
            m.support
        );
    }
    let _ = writeln!(
        out,
        "macro,{},{},{},{}",
        report.macro_precision, report.macro_recall, report.macro_f1, report.sample_count
    );
    out
}

/// Row per true class, column per predicted class.
fn render_confusion_csv(bundle: &ModelBundle, confusion: &ConfusionMatrix) -> String {
    let k = confusion.num_classes();
    let mut out = String::from("true_class");
    for p in 0..k {
        let _ = write!(out, ",{}", class_name(bundle, p));
    }
    out.push('\n');
    for t in 0..k {
        let _ = write!(out, "{}", class_name(bundle, t));
        for p in 0..k {
            let _ = write!(out, ",{}", confusion.count(t, p));
        }
        out.push('\n');
    }
    out
}

pub fn run(
    common: &CommonOpts,
    model: &Path,
    data: &Path,
    label_col: &str,
    trip_col: Option<&str>,
    out_dir: &Path,
) -> Result<(), AppError> {
    let seed = resolve_seed(common.seed)?;
    configure_jobs(common.jobs)?;

    let bundle = load_bundle(model)?;
    let (table, _) = load_table(data, label_col, trip_col)?;
    let scaled = bundle.scaler.transform(&table)?;
    let windows = make_windows(
        &scaled,
        bundle.window_length,
        bundle.overlap,
        &bundle.label_names,
    )?;
    let outcome = evaluate(&bundle.payload, &windows)?;

    println!("seed: {seed}");
    println!(
        "{} on {} windows from {}",
        bundle.kind().as_str(),
        windows.len(),
        data.display()
    );
    println!(
        "accuracy {:.4}, macro precision {:.4}, macro recall {:.4}, macro F1 {:.4}",
        outcome.report.accuracy,
        outcome.report.macro_precision,
        outcome.report.macro_recall,
        outcome.report.macro_f1
    );

    let metrics_path = out_dir.join("metrics.csv");
    let confusion_path = out_dir.join("confusion.csv");
    write_text(&metrics_path, &render_metrics_csv(&bundle, &outcome.report))?;
    write_text(
        &confusion_path,
        &render_confusion_csv(&bundle, &outcome.confusion),
    )?;

    let mut flags = BTreeMap::new();
    insert_flag(&mut flags, "seed", seed);
    insert_flag(&mut flags, "model", model.display());
    insert_flag(&mut flags, "data", data.display());
    insert_flag(&mut flags, "label_col", label_col);
    if let Some(trip) = trip_col {
        insert_flag(&mut flags, "trip_col", trip);
    }
    insert_flag(&mut flags, "out_dir", out_dir.display());
    let mut digests = BTreeMap::new();
    digest_entry(&mut digests, model)?;
    digest_entry(&mut digests, data)?;
    write_run_metadata(
        &out_dir.join("evaluate_meta.json"),
        "evaluate",
        &flags,
        &digests,
        &[
            metrics_path.display().to_string(),
            confusion_path.display().to_string(),
        ],
    )?;
    println!("wrote metrics.csv and confusion.csv to {}", out_dir.display());
    Ok(())
}
