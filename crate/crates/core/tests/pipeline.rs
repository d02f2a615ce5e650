//! Cross-module integration tests: synthetic data through preparation,
//! training, and evaluation, exercising the public API end to end.

use drivesig::baselines::{ForestConfig, TreeConfig};
use drivesig::data::{
    load_csv, prepare, split_chronological, write_table_csv, PrepareConfig, Scaler, SplitSpec,
};
use drivesig::eval::{evaluate, grid_search, train_suite, SuiteConfig};
use drivesig::model::ModelConfig;
use drivesig::synth::{default_profiles, generate, DriverProfile};

fn quick_suite() -> SuiteConfig {
    let net = ModelConfig {
        hidden_sizes: vec![12],
        batch_size: 32,
        max_epochs: 25,
        early_stop_patience: 8,
        ..ModelConfig::default()
    };
    SuiteConfig {
        lstm: net.clone(),
        fcnn: net,
        tree: TreeConfig {
            max_depth: Some(10),
            ..TreeConfig::default()
        },
        forest: ForestConfig {
            n_trees: 20,
            ..ForestConfig::default()
        },
    }
}

#[test]
fn synth_prepare_train_evaluate_round_trip() {
    let profiles = default_profiles();
    let table = generate(&profiles[..3], 1, 900, 8, 11).unwrap();
    let prepared = prepare(&table, &PrepareConfig::default()).unwrap();
    assert_eq!(prepared.label_names.len(), 3);
    assert_eq!(prepared.feature_names.len(), 8);

    let models = train_suite(
        &prepared.train_windows,
        &prepared.val_windows,
        &quick_suite(),
        11,
    )
    .unwrap();
    assert_eq!(
        models.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(),
        ["lstm", "decision_tree", "random_forest", "fcnn"]
    );

    let chance = 1.0 / 3.0;
    for (name, payload) in &models {
        let outcome = evaluate(payload, &prepared.test_windows).unwrap();
        assert_eq!(
            outcome.report.sample_count,
            prepared.test_windows.len() as u64
        );
        assert!(
            outcome.report.accuracy > chance,
            "{name} should beat chance on synthetic drivers, got {}",
            outcome.report.accuracy
        );
        // Per-row marginals separate these profiles almost perfectly.
        if *name == "decision_tree" || *name == "random_forest" {
            assert!(
                outcome.report.accuracy > 0.9,
                "{name} accuracy {} too low",
                outcome.report.accuracy
            );
        }
    }
}

#[test]
fn csv_write_then_load_is_bitwise_lossless() {
    let profiles = default_profiles();
    let table = generate(&profiles[..2], 1, 480, 8, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("round.csv");
    write_table_csv(&table, &path).unwrap();
    let (reloaded, stats) = load_csv(&path, table.label_column(), Some("trip_id")).unwrap();

    assert_eq!(stats.dropped_rows, 0);
    assert!(stats.dropped_columns.is_empty());
    assert_eq!(reloaded.feature_names(), table.feature_names());
    assert_eq!(reloaded.num_rows(), table.num_rows());
    for (a, b) in table.rows().iter().zip(reloaded.rows()) {
        assert_eq!(
            table.driver_name(a.driver),
            reloaded.driver_name(b.driver),
            "driver interning must match"
        );
        assert_eq!(a.values, b.values, "float values must survive bitwise");
    }
}

/// Two drivers identical in every marginal statistic -- same bands, same
/// AR dynamics, same burst intensity -- differing only in burst rhythm.
/// A window spanning a full rhythm cycle should separate them where a
/// near-instant window cannot, and the search ranking should say so.
#[test]
fn grid_search_prefers_window_capturing_planted_periodicity() {
    let base = DriverProfile {
        driver_id: "slow_rhythm".to_string(),
        ar_coefficients: vec![(0.55, -0.15); 4],
        event_intensity: 0.35,
        cruising: vec![(2000.0, 160.0), (60.0, 7.0), (0.4, 0.1), (45.0, 6.0)],
        behavior_period: 16,
    };
    let mut fast = base.clone();
    fast.driver_id = "fast_rhythm".to_string();
    fast.behavior_period = 4;
    let profiles = [base, fast];

    let table = generate(&profiles, 2, 900, 4, 29).unwrap();
    let window_grid = [4usize, 16];
    let longest = *window_grid.iter().max().unwrap();
    let (train_raw, val_raw, _) =
        split_chronological(&table, SplitSpec::default(), longest).unwrap();
    let scaler = Scaler::fit(&train_raw).unwrap();
    let train_table = scaler.transform(&train_raw).unwrap();
    let val_table = scaler.transform(&val_raw).unwrap();

    let base_cfg = ModelConfig {
        hidden_sizes: vec![12],
        batch_size: 32,
        max_epochs: 20,
        early_stop_patience: 20,
        ..ModelConfig::default()
    };
    let rows = grid_search(
        &[vec![12]],
        &window_grid,
        &train_table,
        &val_table,
        &table.driver_labels(),
        0.5,
        &base_cfg,
        20,
        29,
    )
    .unwrap();

    assert_eq!(rows.len(), 2);
    assert_eq!(
        rows[0].window_length, 16,
        "16-step window should win: scores were {:?}",
        rows.iter()
            .map(|r| (r.window_length, r.val_macro_f1))
            .collect::<Vec<_>>()
    );
    assert!(
        rows[0].val_macro_f1 > rows[1].val_macro_f1,
        "ranking must be strict here"
    );
}
