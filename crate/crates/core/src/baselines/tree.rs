//! CART decision tree with Gini impurity.

use serde::{Deserialize, Serialize};

use crate::numerics::SeededRng;

use super::{check_rows, BaselineError};

/// A tree node: either a threshold split or a leaf holding the class counts
/// of the training rows that reached it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        counts: Vec<u64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

/// A trained CART classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub num_classes: usize,
    pub feature_count: usize,
}

/// `1 - sum(p_k^2)` over the class distribution of `counts`.
pub fn gini_impurity(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / t;
            p * p
        })
        .sum::<f64>()
}

fn class_counts(indices: &[usize], labels: &[usize], num_classes: usize) -> Vec<u64> {
    let mut counts = vec![0u64; num_classes];
    for &i in indices {
        counts[labels[i]] += 1;
    }
    counts
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    weighted_gini: f64,
}

/// Scans candidate thresholds (midpoints of consecutive distinct sorted
/// values) on the given features and returns the split with the lowest
/// children-weighted Gini, or `None` if nothing separates the rows.
fn find_best_split(
    rows: &[Vec<f64>],
    labels: &[usize],
    indices: &[usize],
    features: &[usize],
    num_classes: usize,
) -> Option<BestSplit> {
    let n = indices.len() as f64;
    let mut best: Option<BestSplit> = None;

    for &feature in features {
        // Sort this node's rows by the feature once, then sweep the
        // boundary left to right maintaining incremental class counts.
        let mut order: Vec<usize> = indices.to_vec();
        order.sort_by(|&a, &b| {
            rows[a][feature]
                .partial_cmp(&rows[b][feature])
                .expect("feature values are finite")
        });
        let mut left = vec![0u64; num_classes];
        let mut right = class_counts(&order, labels, num_classes);

        for w in 0..order.len() - 1 {
            let i = order[w];
            left[labels[i]] += 1;
            right[labels[i]] -= 1;
            let a = rows[i][feature];
            let b = rows[order[w + 1]][feature];
            if a == b {
                continue; // no boundary between equal values
            }
            let n_left = (w + 1) as f64;
            let n_right = n - n_left;
            let weighted =
                (n_left * gini_impurity(&left) + n_right * gini_impurity(&right)) / n;
            let threshold = a + (b - a) / 2.0;
            let better = match &best {
                None => true,
                Some(cur) => weighted < cur.weighted_gini - 1e-15,
            };
            if better {
                best = Some(BestSplit {
                    feature,
                    threshold,
                    weighted_gini: weighted,
                });
            }
        }
    }
    best
}

/// Recursive CART builder. `feature_picker` yields the candidate feature
/// set per split (all features for a plain tree, a random subset inside a
/// forest).
pub(crate) fn build_node(
    rows: &[Vec<f64>],
    labels: &[usize],
    indices: &[usize],
    num_classes: usize,
    depth: usize,
    config: &TreeConfig,
    feature_picker: &mut dyn FnMut() -> Vec<usize>,
) -> TreeNode {
    let counts = class_counts(indices, labels, num_classes);
    let at_depth_limit = config.max_depth.is_some_and(|d| depth >= d);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || indices.len() < config.min_samples_split.max(2) || at_depth_limit {
        return TreeNode::Leaf { counts };
    }

    let parent_gini = gini_impurity(&counts);
    let split = match find_best_split(rows, labels, indices, &feature_picker(), num_classes) {
        Some(s) if parent_gini - s.weighted_gini > 1e-12 => s,
        _ => return TreeNode::Leaf { counts },
    };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .iter()
        .partition(|&&i| rows[i][split.feature] <= split.threshold);
    debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());

    let left = build_node(
        rows,
        labels,
        &left_idx,
        num_classes,
        depth + 1,
        config,
        feature_picker,
    );
    let right = build_node(
        rows,
        labels,
        &right_idx,
        num_classes,
        depth + 1,
        config,
        feature_picker,
    );
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Greedy CART training: best Gini split over midpoint thresholds,
/// recursing until purity, `min_samples_split`, or the depth limit.
pub fn train_tree(
    rows: &[Vec<f64>],
    labels: &[usize],
    num_classes: usize,
    config: TreeConfig,
) -> Result<DecisionTree, BaselineError> {
    let d = check_rows(rows, labels, num_classes)?;
    let indices: Vec<usize> = (0..rows.len()).collect();
    let mut all_features = || (0..d).collect::<Vec<usize>>();
    let root = build_node(
        rows,
        labels,
        &indices,
        num_classes,
        0,
        &config,
        &mut all_features,
    );
    Ok(DecisionTree {
        root,
        num_classes,
        feature_count: d,
    })
}

impl DecisionTree {
    /// Class index (ties to the lowest) and the leaf's class-frequency
    /// vector as probabilities.
    pub fn predict_row(&self, row: &[f64]) -> Result<(usize, Vec<f64>), BaselineError> {
        if row.len() != self.feature_count {
            return Err(BaselineError::FeatureMismatch {
                expected: self.feature_count,
                got: row.len(),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { counts } => {
                    let total: u64 = counts.iter().sum();
                    let probs: Vec<f64> =
                        counts.iter().map(|&c| c as f64 / total as f64).collect();
                    let mut best = 0;
                    for (k, &p) in probs.iter().enumerate().skip(1) {
                        if p > probs[best] {
                            best = k;
                        }
                    }
                    return Ok((best, probs));
                }
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn depth_of(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + depth_of(left).max(depth_of(right)),
            }
        }
        depth_of(&self.root)
    }
}

/// Random feature subset of size `k` (sorted so split scanning keeps the
/// same deterministic order as a full-feature tree when `k == d`).
pub(crate) fn sample_features(d: usize, k: usize, rng: &mut SeededRng) -> Vec<usize> {
    let mut all: Vec<usize> = (0..d).collect();
    rng.shuffle(&mut all);
    let mut picked: Vec<usize> = all.into_iter().take(k.min(d).max(1)).collect();
    picked.sort_unstable();
    picked
}
