//! Random forest: bagged CART trees with per-split feature subsets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numerics::SeededRng;

use super::tree::{build_node, sample_features, DecisionTree, TreeConfig};
use super::{check_rows, BaselineError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Candidate features per split; `None` means `ceil(sqrt(d))`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub max_depth: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            features_per_split: None,
            bootstrap: true,
            max_depth: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub num_classes: usize,
    pub feature_count: usize,
}

/// Trains `n_trees` CART trees, tree `t` on a bootstrap resample drawn from
/// its own stream seeded `base_seed + t`, so the forest is reproducible and
/// trees can build in parallel.
pub fn train_forest(
    rows: &[Vec<f64>],
    labels: &[usize],
    num_classes: usize,
    config: ForestConfig,
    base_seed: u64,
) -> Result<RandomForest, BaselineError> {
    let d = check_rows(rows, labels, num_classes)?;
    if config.n_trees == 0 {
        return Err(BaselineError::InvalidConfig("n_trees must be at least 1"));
    }
    let per_split = match config.features_per_split {
        Some(k) if k == 0 || k > d => {
            return Err(BaselineError::InvalidConfig(
                "features_per_split must be in 1..=feature_count",
            ));
        }
        Some(k) => k,
        None => (d as f64).sqrt().ceil() as usize,
    };
    let tree_config = TreeConfig {
        max_depth: config.max_depth,
        min_samples_split: 2,
    };

    let trees: Vec<DecisionTree> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = SeededRng::new(base_seed.wrapping_add(t as u64));
            let indices: Vec<usize> = if config.bootstrap {
                (0..rows.len()).map(|_| rng.next_index(rows.len())).collect()
            } else {
                (0..rows.len()).collect()
            };
            let mut picker = || sample_features(d, per_split, &mut rng);
            let root = build_node(
                rows,
                labels,
                &indices,
                num_classes,
                0,
                &tree_config,
                &mut picker,
            );
            DecisionTree {
                root,
                num_classes,
                feature_count: d,
            }
        })
        .collect();

    Ok(RandomForest {
        trees,
        num_classes,
        feature_count: d,
    })
}

impl RandomForest {
    /// Majority vote over the trees (ties to the lowest class index); the
    /// probability vector is the vote tally divided by the tree count.
    pub fn predict_row(&self, row: &[f64]) -> Result<(usize, Vec<f64>), BaselineError> {
        let mut votes = vec![0u64; self.num_classes];
        for tree in &self.trees {
            let (class, _) = tree.predict_row(row)?;
            votes[class] += 1;
        }
        let mut best = 0;
        for (k, &v) in votes.iter().enumerate().skip(1) {
            if v > votes[best] {
                best = k;
            }
        }
        let probs = votes
            .iter()
            .map(|&v| v as f64 / self.trees.len() as f64)
            .collect();
        Ok((best, probs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::tree::train_tree;

    fn blob_data(n_per: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = SeededRng::new(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2usize {
            let center = if class == 0 { 0.25 } else { 0.75 };
            for _ in 0..n_per {
                rows.push(vec![
                    center + rng.next_range(-0.15, 0.15),
                    center + rng.next_range(-0.15, 0.15),
                ]);
                labels.push(class);
            }
        }
        (rows, labels)
    }

    #[test]
    fn degenerate_forest_equals_single_tree() {
        let (rows, labels) = blob_data(40, 7);
        let config = ForestConfig {
            n_trees: 1,
            features_per_split: Some(2),
            bootstrap: false,
            max_depth: None,
        };
        let forest = train_forest(&rows, &labels, 2, config, 42).unwrap();
        let tree = train_tree(&rows, &labels, 2, TreeConfig::default()).unwrap();
        let mut rng = SeededRng::new(8);
        for _ in 0..100 {
            let probe = vec![rng.next_uniform(), rng.next_uniform()];
            assert_eq!(
                forest.predict_row(&probe).unwrap().0,
                tree.predict_row(&probe).unwrap().0
            );
        }
    }

    #[test]
    fn single_class_data_always_predicts_that_class() {
        let rows = vec![vec![0.1, 0.2], vec![0.3, 0.4], vec![0.5, 0.6]];
        let labels = vec![1, 1, 1];
        let forest = train_forest(&rows, &labels, 3, ForestConfig::default(), 1).unwrap();
        assert_eq!(forest.predict_row(&[0.9, 0.9]).unwrap().0, 1);
    }

    #[test]
    fn prediction_matches_bruteforce_vote_tally() {
        let (rows, labels) = blob_data(30, 21);
        let config = ForestConfig {
            n_trees: 15,
            ..ForestConfig::default()
        };
        let forest = train_forest(&rows, &labels, 2, config, 5).unwrap();
        let mut rng = SeededRng::new(6);
        for _ in 0..50 {
            let probe = vec![rng.next_uniform(), rng.next_uniform()];
            let (class, probs) = forest.predict_row(&probe).unwrap();
            // Oracle: ask every tree individually and tally by hand.
            let mut tally = [0u64; 2];
            for tree in &forest.trees {
                tally[tree.predict_row(&probe).unwrap().0] += 1;
            }
            let expect = if tally[1] > tally[0] { 1 } else { 0 };
            assert_eq!(class, expect);
            assert_eq!(probs[0], tally[0] as f64 / 15.0);
            assert_eq!(probs[1], tally[1] as f64 / 15.0);
        }
    }

    #[test]
    fn same_seed_reproduces_the_forest() {
        let (rows, labels) = blob_data(25, 33);
        let f1 = train_forest(&rows, &labels, 2, ForestConfig::default(), 9).unwrap();
        let f2 = train_forest(&rows, &labels, 2, ForestConfig::default(), 9).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let (rows, labels) = blob_data(10, 1);
        let bad = ForestConfig {
            n_trees: 0,
            ..ForestConfig::default()
        };
        assert!(train_forest(&rows, &labels, 2, bad, 0).is_err());
        let bad = ForestConfig {
            features_per_split: Some(5),
            ..ForestConfig::default()
        };
        assert!(train_forest(&rows, &labels, 2, bad, 0).is_err());
        assert!(matches!(
            train_forest(&[], &[], 2, ForestConfig::default(), 0),
            Err(BaselineError::EmptyTrainingSet)
        ));
    }
}
