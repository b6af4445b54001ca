//! CART-style decision trees: Gini classification trees with bootstrap and
//! feature subsampling for the forest, variance-split regression trees with
//! Newton leaf values for gradient boosting.

use alloc::boxed::Box;
use alloc::string::ToString;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{CoreError, Result};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    /// For classification trees the value is the positive-class fraction;
    /// for boosted regression trees it is an additive score contribution.
    Leaf { value: f64 },
    Internal { feature: usize, threshold: f64, left: Box<TreeNode>, right: Box<TreeNode> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
}

impl DecisionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Internal { feature, threshold, left, right } => {
                    node = if row[*feature] < *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn rec(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Internal { left, right, .. } => 1 + rec(left).max(rec(right)),
            }
        }
        rec(&self.root)
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Scans midpoints between consecutive distinct sorted values of each candidate
/// feature. `score` is the summed child impurity (count-weighted); ties break to
/// the lowest feature index, then the lowest threshold.
///
/// `targets` are 0/1 labels for Gini trees; residuals for regression trees,
/// where the impurity is the within-child sum of squares.
fn best_split(
    x: &Matrix,
    indices: &[usize],
    targets: &[f64],
    candidates: &[usize],
    gini: bool,
) -> Option<SplitChoice> {
    let n = indices.len();
    let mut best: Option<SplitChoice> = None;
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);

    let mut sorted_candidates = candidates.to_vec();
    sorted_candidates.sort_unstable();

    for &f in &sorted_candidates {
        pairs.clear();
        pairs.extend(indices.iter().map(|&i| (x.get(i, f), targets[i])));
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let total_sum: f64 = pairs.iter().map(|p| p.1).sum();
        let total_sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();

        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for split_at in 1..n {
            let (prev_v, t) = pairs[split_at - 1];
            left_sum += t;
            left_sq += t * t;
            let v = pairs[split_at].0;
            if v == prev_v {
                continue;
            }
            let threshold = prev_v + 0.5 * (v - prev_v);
            let (nl, nr) = (split_at as f64, (n - split_at) as f64);
            let (right_sum, right_sq) = (total_sum - left_sum, total_sq - left_sq);
            let score = if gini {
                // n_c * gini_c = n_c * 2 p (1 - p), with p = sum / n_c for 0/1 targets
                let gl = 2.0 * left_sum * (1.0 - left_sum / nl);
                let gr = 2.0 * right_sum * (1.0 - right_sum / nr);
                gl + gr
            } else {
                let sl = left_sq - left_sum * left_sum / nl;
                let sr = right_sq - right_sum * right_sum / nr;
                sl + sr
            };
            let better = match &best {
                None => true,
                Some(b) => {
                    score < b.score
                        || (score == b.score
                            && (f < b.feature || (f == b.feature && threshold < b.threshold)))
                }
            };
            if better {
                best = Some(SplitChoice { feature: f, threshold, score });
            }
        }
    }
    best
}

fn gini_impurity(pos: f64, n: f64) -> f64 {
    let p = pos / n;
    2.0 * p * (1.0 - p)
}

/// Gini classification tree. `features_per_split` of None considers all columns.
pub fn fit_classification_tree<R: Rng>(
    x: &Matrix,
    indices: &[usize],
    labels: &[u8],
    max_depth: usize,
    features_per_split: Option<usize>,
    rng: &mut R,
) -> DecisionTree {
    let targets: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let all_features: Vec<usize> = (0..x.cols()).collect();
    DecisionTree {
        root: grow(
            x,
            indices,
            &targets,
            None,
            max_depth,
            features_per_split,
            &all_features,
            true,
            rng,
        ),
    }
}

/// Regression tree on residuals with Newton-step leaves (sum residual / sum
/// hessian per leaf). Considers every feature at every split.
pub fn fit_regression_tree(
    x: &Matrix,
    indices: &[usize],
    residuals: &[f64],
    hessians: &[f64],
    max_depth: usize,
) -> DecisionTree {
    let all_features: Vec<usize> = (0..x.cols()).collect();
    let mut rng = rng_from_seed(0); // unused: no feature subsampling
    DecisionTree {
        root: grow(
            x,
            indices,
            residuals,
            Some(hessians),
            max_depth,
            None,
            &all_features,
            false,
            &mut rng,
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn grow<R: Rng>(
    x: &Matrix,
    indices: &[usize],
    targets: &[f64],
    hessians: Option<&[f64]>,
    depth_left: usize,
    features_per_split: Option<usize>,
    all_features: &[usize],
    gini: bool,
    rng: &mut R,
) -> TreeNode {
    let n = indices.len();
    let leaf = |indices: &[usize]| -> TreeNode {
        let value = match hessians {
            Some(h) => {
                let num: f64 = indices.iter().map(|&i| targets[i]).sum();
                let den: f64 = indices.iter().map(|&i| h[i]).sum();
                num / den.max(1e-12)
            }
            None => {
                indices.iter().map(|&i| targets[i]).sum::<f64>() / indices.len() as f64
            }
        };
        TreeNode::Leaf { value }
    };

    let pure = indices.iter().all(|&i| targets[i] == targets[indices[0]]);
    if depth_left == 0 || n < 2 || pure {
        return leaf(indices);
    }

    let candidates: Vec<usize> = match features_per_split {
        Some(m) => all_features.choose_multiple(rng, m.min(all_features.len())).copied().collect(),
        None => all_features.to_vec(),
    };

    let split = match best_split(x, indices, targets, &candidates, gini) {
        Some(s) => s,
        None => return leaf(indices),
    };

    let (mut left_idx, mut right_idx) = (Vec::new(), Vec::new());
    for &i in indices {
        if x.get(i, split.feature) < split.threshold {
            left_idx.push(i);
        } else {
            right_idx.push(i);
        }
    }
    debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());

    TreeNode::Internal {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(
            x, &left_idx, targets, hessians, depth_left - 1, features_per_split, all_features,
            gini, rng,
        )),
        right: Box::new(grow(
            x, &right_idx, targets, hessians, depth_left - 1, features_per_split, all_features,
            gini, rng,
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub trees: Vec<DecisionTree>,
    pub features_per_split: usize,
    pub seed: u64,
}

impl RandomForestModel {
    /// Forest probability: arithmetic mean of the trees' leaf fractions.
    pub fn predict_proba(&self, batch: &Matrix) -> Vec<f64> {
        (0..batch.rows())
            .map(|i| {
                let row = batch.row(i);
                self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
                    / self.trees.len() as f64
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Disabled only by tests that need trees fit on the exact sample.
    pub bootstrap: bool,
}

pub fn train_random_forest(
    train: &Dataset,
    n_trees: usize,
    max_depth: usize,
    seed: u64,
) -> Result<RandomForestModel> {
    train_random_forest_with(train, &ForestConfig { n_trees, max_depth, bootstrap: true }, seed)
}

/// Each tree draws a bootstrap sample and subsamples floor(sqrt(d)) candidate
/// features per split; per-tree seeds are derived from (seed, tree index) so
/// the result does not depend on training order.
pub fn train_random_forest_with(
    train: &Dataset,
    config: &ForestConfig,
    seed: u64,
) -> Result<RandomForestModel> {
    if config.n_trees == 0 {
        return Err(CoreError::InvalidHyperparameter { reason: "n_trees must be >= 1".to_string() });
    }
    if config.max_depth == 0 {
        return Err(CoreError::InvalidHyperparameter { reason: "max_depth must be >= 1".to_string() });
    }
    if train.n() == 0 {
        return Err(CoreError::EmptyDataset);
    }
    let n = train.n();
    let features_per_split = isqrt_floor(train.d()).max(1);

    let trees = (0..config.n_trees)
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(seed, t as u64));
            let indices: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_classification_tree(
                &train.x,
                &indices,
                &train.y,
                config.max_depth,
                Some(features_per_split),
                &mut rng,
            )
        })
        .collect();

    Ok(RandomForestModel { trees, features_per_split, seed })
}

fn isqrt_floor(n: usize) -> usize {
    let mut r = libm::sqrt(n as f64) as usize;
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    while r * r > n {
        r -= 1;
    }
    r
}

/// Parent-vs-children weighted Gini check, used by property tests.
pub fn node_gini_gain(pos_parent: f64, n_parent: f64, pos_left: f64, n_left: f64) -> f64 {
    let parent = n_parent * gini_impurity(pos_parent, n_parent);
    let left = n_left * gini_impurity(pos_left, n_left);
    let right =
        (n_parent - n_left) * gini_impurity(pos_parent - pos_left, n_parent - n_left);
    parent - (left + right)
}
