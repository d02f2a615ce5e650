//! Versioned on-disk container for trained models of every kind.
//!
//! The container is a JSON document carrying the format version, a model
//! kind tag, the preprocessing needed to reuse the model on raw CSV data
//! (label names, feature names, fitted scaler, feature statistics, window
//! parameters), and the parameter arrays themselves. Layout details live
//! in `docs/FORMAT.md`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{DecisionTree, Fcnn, RandomForest};
use crate::data::{FeatureStats, Scaler};

use super::{LstmModel, ModelError};

/// Bump when the container layout changes incompatibly.
pub const FORMAT_VERSION: u32 = 1;

/// Which classifier a bundle holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Lstm,
    DecisionTree,
    RandomForest,
    Fcnn,
}

impl ModelKind {
    /// Stable lowercase name used in report files.
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Lstm => "lstm",
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::RandomForest => "random_forest",
            ModelKind::Fcnn => "fcnn",
        }
    }
}

/// The parameters of one trained classifier, tagged by kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelPayload {
    Lstm(LstmModel),
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    Fcnn(Fcnn),
}

impl ModelPayload {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelPayload::Lstm(_) => ModelKind::Lstm,
            ModelPayload::DecisionTree(_) => ModelKind::DecisionTree,
            ModelPayload::RandomForest(_) => ModelKind::RandomForest,
            ModelPayload::Fcnn(_) => ModelKind::Fcnn,
        }
    }
}

/// A trained model plus everything needed to apply it to fresh raw data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    /// Sorted driver ids; class index `i` means `label_names[i]`.
    pub label_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub scaler: Scaler,
    /// Post-scaling training-split statistics (noise severities are in
    /// units of these standard deviations).
    pub train_stats: FeatureStats,
    pub window_length: usize,
    pub overlap: f64,
    #[serde(flatten)]
    pub payload: ModelPayload,
}

impl ModelBundle {
    pub fn kind(&self) -> ModelKind {
        self.payload.kind()
    }
}

/// Writes the bundle as pretty-printed JSON. Field order is fixed by the
/// type definitions, so saving the same bundle twice is byte-identical.
pub fn save_bundle(bundle: &ModelBundle, path: &Path) -> Result<(), ModelError> {
    let io_err = |source| ModelError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut text = serde_json::to_string_pretty(bundle).map_err(|e| ModelError::Corrupted {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err)
}

/// Loads and validates a bundle. A wrong `format_version` and a malformed
/// or truncated file are reported as distinct errors.
pub fn load_bundle(path: &Path) -> Result<ModelBundle, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let corrupted = |detail: String| ModelError::Corrupted {
        path: path.display().to_string(),
        detail,
    };
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| corrupted(e.to_string()))?;
    let found = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| corrupted("missing format_version field".into()))?;
    if found != u64::from(FORMAT_VERSION) {
        return Err(ModelError::VersionMismatch {
            path: path.display().to_string(),
            found: found as u32,
            supported: FORMAT_VERSION,
        });
    }
    serde_json::from_value(value).map_err(|e| corrupted(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{train_tree, TreeConfig};
    use crate::data::FrameTable;
    use crate::model::{forward, ModelConfig};
    use crate::numerics::{Matrix, SeededRng};

    fn sample_scaler() -> (Scaler, FeatureStats) {
        let mut t = FrameTable::new(vec!["a".into(), "b".into()], "driver", None);
        t.push_row("A", "", vec![0.0, 2.0]);
        t.push_row("B", "", vec![1.0, 4.0]);
        let scaler = Scaler::fit(&t).unwrap();
        let stats = FeatureStats::from_table(&t).unwrap();
        (scaler, stats)
    }

    fn lstm_bundle() -> ModelBundle {
        let config = ModelConfig {
            hidden_sizes: vec![3],
            window_length: 4,
            num_classes: 2,
            ..ModelConfig::default()
        };
        let mut rng = SeededRng::new(77);
        let model = LstmModel::init(config, 2, &mut rng).unwrap();
        let (scaler, train_stats) = sample_scaler();
        ModelBundle {
            format_version: FORMAT_VERSION,
            label_names: vec!["A".into(), "B".into()],
            feature_names: vec!["a".into(), "b".into()],
            scaler,
            train_stats,
            window_length: 4,
            overlap: 0.5,
            payload: ModelPayload::Lstm(model),
        }
    }

    #[test]
    fn save_load_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let bundle = lstm_bundle();
        save_bundle(&bundle, &path).unwrap();
        let back = load_bundle(&path).unwrap();
        assert_eq!(back, bundle);

        let (ModelPayload::Lstm(orig), ModelPayload::Lstm(reloaded)) =
            (&bundle.payload, &back.payload)
        else {
            panic!("expected sequence models on both sides");
        };
        let mut rng = SeededRng::new(5);
        let data = (0..8).map(|_| rng.next_uniform()).collect();
        let window = Matrix::from_vec(4, 2, data);
        let p = forward(&window, orig).unwrap();
        let q = forward(&window, reloaded).unwrap();
        assert_eq!(p, q, "reloaded model must be bitwise identical");
    }

    #[test]
    fn tree_bundle_round_trips_with_kind_tag() {
        let rows = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.9, 0.1]];
        let labels = vec![0, 1, 1];
        let tree = train_tree(&rows, &labels, 2, TreeConfig::default()).unwrap();
        let (scaler, train_stats) = sample_scaler();
        let bundle = ModelBundle {
            format_version: FORMAT_VERSION,
            label_names: vec!["A".into(), "B".into()],
            feature_names: vec!["a".into(), "b".into()],
            scaler,
            train_stats,
            window_length: 4,
            overlap: 0.5,
            payload: ModelPayload::DecisionTree(tree),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tree.json");
        save_bundle(&bundle, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"kind\": \"decision_tree\""));
        let back = load_bundle(&path).unwrap();
        assert_eq!(back.kind(), ModelKind::DecisionTree);
        assert_eq!(back, bundle);
    }

    #[test]
    fn bumped_version_is_a_version_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_bundle(&lstm_bundle(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(
            &path,
            text.replace("\"format_version\": 1", "\"format_version\": 999"),
        )
        .unwrap();
        match load_bundle(&path) {
            Err(ModelError::VersionMismatch { found, supported, .. }) => {
                assert_eq!(found, 999);
                assert_eq!(supported, FORMAT_VERSION);
            }
            other => panic!("expected version mismatch, got {other:?}"),
        }
    }

    #[test]
    fn truncated_file_is_a_corruption_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_bundle(&lstm_bundle(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(
            load_bundle(&path),
            Err(ModelError::Corrupted { .. })
        ));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(
            load_bundle(Path::new("/nonexistent/model.json")),
            Err(ModelError::Io { .. })
        ));
    }

    #[test]
    fn saving_twice_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.json"), dir.path().join("b.json"));
        let bundle = lstm_bundle();
        save_bundle(&bundle, &p1).unwrap();
        save_bundle(&bundle, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }
}
