//! Base learners and the stacking layer: linear SVM (Pegasos), random forest,
//! gradient-boosted trees, and a logistic-regression meta-classifier trained
//! on out-of-fold predictions.

pub mod gbm;
pub mod logistic;
pub mod stack;
pub mod svm;
pub mod tree;

pub use gbm::{train_gbm, GbmModel};
pub use logistic::{train_logistic, LogisticModel};
pub use stack::{predict_stack, predict_stack_proba, train_stack, StackConfig, StackEnsembleModel};
pub use svm::{train_linear_svm, LinearSvmModel};
pub use tree::{DecisionTree, RandomForestModel};
pub use tree::{train_random_forest, train_random_forest_with, ForestConfig};

/// Numerically safe logistic sigmoid.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}
