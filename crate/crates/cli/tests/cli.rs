//! End-to-end tests of the `drivesig` binary: pipeline flows, exit
//! codes, determinism of produced artifacts, and config-file behavior.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run_in(dir: &Path, args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_drivesig"));
    cmd.current_dir(dir).args(args).env_remove("DRIVESIG_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn expect_success(dir: &Path, args: &[&str]) -> String {
    let out = run_in(dir, args, &[]);
    assert!(
        out.status.success(),
        "{args:?} failed with code {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout is utf-8")
}

fn expect_code(dir: &Path, args: &[&str], code: i32) -> String {
    let out = run_in(dir, args, &[]);
    assert_eq!(
        out.status.code(),
        Some(code),
        "{args:?} should exit {code}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stderr).expect("stderr is utf-8")
}

/// Small two-driver dataset plus a trained tree bundle, shared scaffolding
/// for the pipeline tests.
fn synth_and_train(dir: &Path) -> (PathBuf, PathBuf) {
    let data = dir.join("data.csv");
    let model = dir.join("tree.json");
    expect_success(
        dir,
        &[
            "synth",
            "--out",
            data.to_str().unwrap(),
            "--drivers",
            "2",
            "--trips",
            "1",
            "--rows-per-trip",
            "480",
            "--seed",
            "7",
        ],
    );
    expect_success(
        dir,
        &[
            "train",
            "--data",
            data.to_str().unwrap(),
            "--model",
            "tree",
            "--max-depth",
            "8",
            "--out",
            model.to_str().unwrap(),
            "--seed",
            "7",
        ],
    );
    (data, model)
}

#[test]
fn synth_reruns_are_byte_identical_and_seed_sensitive() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("synth.csv");
    let args = |seed: &'static str| {
        vec![
            "synth",
            "--out",
            "synth.csv",
            "--drivers",
            "2",
            "--trips",
            "1",
            "--rows-per-trip",
            "480",
            "--seed",
            seed,
        ]
    };
    expect_success(tmp.path(), &args("7"));
    let first = std::fs::read(&out).unwrap();
    let first_meta = std::fs::read(tmp.path().join("synth.meta.json")).unwrap();
    expect_success(tmp.path(), &args("7"));
    assert_eq!(first, std::fs::read(&out).unwrap(), "same seed, same bytes");
    assert_eq!(first_meta, std::fs::read(tmp.path().join("synth.meta.json")).unwrap());
    expect_success(tmp.path(), &args("8"));
    assert_ne!(first, std::fs::read(&out).unwrap(), "new seed, new data");
}

#[test]
fn train_evaluate_predict_flow_produces_artifacts() {
    let tmp = TempDir::new().unwrap();
    let (data, model) = synth_and_train(tmp.path());

    // The bundle and its run metadata sit next to each other.
    assert!(model.exists());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("tree.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["command"], "train");
    assert_eq!(meta["flags"]["seed"], "7");
    assert!(meta["input_digests"][data.to_str().unwrap()]
        .as_str()
        .unwrap()
        .len()
        .eq(&64));

    let stdout = expect_success(
        tmp.path(),
        &[
            "evaluate",
            "--model",
            "tree.json",
            "--data",
            "data.csv",
            "--out-dir",
            "eval",
        ],
    );
    assert!(stdout.contains("accuracy"), "{stdout}");
    let metrics = std::fs::read_to_string(tmp.path().join("eval/metrics.csv")).unwrap();
    assert!(metrics.starts_with("class,precision,recall,f1,support\n"));
    assert!(metrics.lines().last().unwrap().starts_with("macro,"));
    let confusion = std::fs::read_to_string(tmp.path().join("eval/confusion.csv")).unwrap();
    assert!(confusion.starts_with("true_class,driver_0,driver_1\n"));

    let stdout = expect_success(
        tmp.path(),
        &["predict", "--model", "tree.json", "--data", "data.csv", "--offset", "5"],
    );
    assert!(stdout.contains("predicted driver: driver_"), "{stdout}");
}

#[test]
fn evaluate_reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    synth_and_train(tmp.path());
    let args = [
        "evaluate",
        "--model",
        "tree.json",
        "--data",
        "data.csv",
        "--out-dir",
        "eval",
        "--seed",
        "3",
    ];
    expect_success(tmp.path(), &args);
    let metrics = std::fs::read(tmp.path().join("eval/metrics.csv")).unwrap();
    let meta = std::fs::read(tmp.path().join("eval/evaluate_meta.json")).unwrap();
    expect_success(tmp.path(), &args);
    assert_eq!(metrics, std::fs::read(tmp.path().join("eval/metrics.csv")).unwrap());
    assert_eq!(
        meta,
        std::fs::read(tmp.path().join("eval/evaluate_meta.json")).unwrap()
    );
}

#[test]
fn run_metadata_has_no_timestamps() {
    let tmp = TempDir::new().unwrap();
    synth_and_train(tmp.path());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("tree.meta.json")).unwrap())
            .unwrap();
    let keys: Vec<&String> = meta.as_object().unwrap().keys().collect();
    assert_eq!(
        keys,
        ["command", "flags", "input_digests", "outputs", "tool_version"]
    );
}

#[test]
fn usage_errors_exit_1() {
    let tmp = TempDir::new().unwrap();
    let stderr = expect_code(tmp.path(), &["train", "--bogus-flag"], 1);
    assert!(stderr.contains("--bogus-flag"), "{stderr}");

    let (data, _) = synth_and_train(tmp.path());
    let stderr = expect_code(
        tmp.path(),
        &[
            "train",
            "--data",
            data.to_str().unwrap(),
            "--model",
            "perceptron",
            "--out",
            "x.json",
        ],
        1,
    );
    assert!(stderr.contains("perceptron"), "{stderr}");

    let stderr = expect_code(
        tmp.path(),
        &[
            "synth",
            "--out",
            "x.csv",
            "--drivers",
            "9",
        ],
        1,
    );
    assert!(stderr.contains("--drivers"), "{stderr}");
}

#[test]
fn data_errors_exit_2_and_name_the_file() {
    let tmp = TempDir::new().unwrap();
    let stderr = expect_code(
        tmp.path(),
        &["evaluate", "--model", "absent.json", "--data", "also-absent.csv"],
        2,
    );
    assert!(stderr.contains("absent.json"), "{stderr}");

    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "only_one_column\n1\n2\n").unwrap();
    let stderr = expect_code(
        tmp.path(),
        &["train", "--data", "bad.csv", "--model", "tree", "--out", "m.json"],
        2,
    );
    assert!(!stderr.is_empty(), "data error should explain itself");
}

#[test]
fn config_file_supplies_defaults_but_flags_win() {
    let tmp = TempDir::new().unwrap();
    synth_and_train(tmp.path());
    std::fs::write(
        tmp.path().join("drivesig.conf"),
        "seed = 11\n\n[predict]\nmodel = tree.json\noffset = 20\n",
    )
    .unwrap();

    let stdout = expect_success(
        tmp.path(),
        &["predict", "--config", "drivesig.conf", "--data", "data.csv"],
    );
    assert!(stdout.contains("seed: 11"), "{stdout}");
    assert!(stdout.contains("rows 20..36"), "{stdout}");

    // Explicit flags beat the file for both shared and sectioned keys.
    let stdout = expect_success(
        tmp.path(),
        &[
            "predict",
            "--config",
            "drivesig.conf",
            "--data",
            "data.csv",
            "--offset",
            "0",
            "--seed",
            "2",
        ],
    );
    assert!(stdout.contains("seed: 2"), "{stdout}");
    assert!(stdout.contains("rows 0..16"), "{stdout}");

    std::fs::write(tmp.path().join("bad.conf"), "[predict]\nwat = 1\n").unwrap();
    let stderr = expect_code(
        tmp.path(),
        &["predict", "--config", "bad.conf", "--data", "data.csv", "--model", "tree.json"],
        1,
    );
    assert!(stderr.contains("unknown key"), "{stderr}");
}

#[test]
fn seed_resolution_prefers_flag_over_env_over_default() {
    let tmp = TempDir::new().unwrap();
    synth_and_train(tmp.path());
    let base = ["predict", "--model", "tree.json", "--data", "data.csv"];

    let out = run_in(tmp.path(), &base, &[("DRIVESIG_SEED", "33")]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("seed: 33"));

    let mut with_flag = base.to_vec();
    with_flag.extend(["--seed", "5"]);
    let out = run_in(tmp.path(), &with_flag, &[("DRIVESIG_SEED", "33")]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("seed: 5"));

    let out = run_in(tmp.path(), &base, &[]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("seed: 42"));

    let out = run_in(tmp.path(), &base, &[("DRIVESIG_SEED", "not-a-number")]);
    assert_eq!(out.status.code(), Some(1), "garbage env seed is a usage error");
}
