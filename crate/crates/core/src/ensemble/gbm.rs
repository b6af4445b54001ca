//! Gradient boosting on the logistic loss: regression trees fit to residuals
//! y - sigmoid(score), leaf values by the Newton step, learning-rate shrinkage.

use alloc::string::ToString;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::sigmoid;
use super::tree::{fit_regression_tree, DecisionTree};
use crate::dataset::Dataset;
use crate::error::{CoreError, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    /// Log-odds of the training base rate.
    pub initial_score: f64,
    pub trees: Vec<DecisionTree>,
    pub learning_rate: f64,
}

impl GbmModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.initial_score
            + self.learning_rate * self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }

    pub fn predict_proba(&self, batch: &Matrix) -> Vec<f64> {
        batch.iter_rows().map(|r| sigmoid(self.decision(r))).collect()
    }
}

pub fn train_gbm(
    train: &Dataset,
    n_rounds: usize,
    max_depth: usize,
    learning_rate: f64,
    _seed: u64,
) -> Result<GbmModel> {
    if max_depth == 0 {
        return Err(CoreError::InvalidHyperparameter { reason: "max_depth must be >= 1".to_string() });
    }
    if !(learning_rate >= 0.0) || !learning_rate.is_finite() {
        return Err(CoreError::InvalidHyperparameter {
            reason: "learning_rate must be finite and non-negative".to_string(),
        });
    }
    if !train.y.contains(&0) || !train.y.contains(&1) {
        return Err(CoreError::DegenerateClass);
    }

    let n = train.n();
    let base_rate = train.y.iter().filter(|&&l| l == 1).count() as f64 / n as f64;
    let initial_score = libm::log(base_rate / (1.0 - base_rate));

    let indices: Vec<usize> = (0..n).collect();
    let mut scores = alloc::vec![initial_score; n];
    let mut trees = Vec::with_capacity(n_rounds);

    for _ in 0..n_rounds {
        let mut residuals = Vec::with_capacity(n);
        let mut hessians = Vec::with_capacity(n);
        for (&label, &score) in train.y.iter().zip(&scores) {
            let p = sigmoid(score);
            residuals.push(label as f64 - p);
            hessians.push(p * (1.0 - p));
        }
        let tree = fit_regression_tree(&train.x, &indices, &residuals, &hessians, max_depth);
        for (score, row) in scores.iter_mut().zip(train.x.iter_rows()) {
            *score += learning_rate * tree.predict_row(row);
        }
        trees.push(tree);
    }

    Ok(GbmModel { initial_score, trees, learning_rate })
}

/// Mean logistic loss of the model on a dataset, for monotonicity checks.
pub fn training_loss(model: &GbmModel, data: &Dataset) -> f64 {
    let mut total = 0.0;
    for (row, &label) in data.x.iter_rows().zip(&data.y) {
        let p = sigmoid(model.decision(row)).clamp(1e-15, 1.0 - 1e-15);
        total -= if label == 1 { libm::log(p) } else { libm::log(1.0 - p) };
    }
    total / data.n() as f64
}
