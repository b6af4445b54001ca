//! Linear SVM trained with the Pegasos stochastic subgradient method on the
//! L2-regularized hinge loss, followed by Platt sigmoid calibration so the
//! stacking meta-classifier receives probabilities.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::logistic::train_logistic;
use super::sigmoid;
use crate::dataset::Dataset;
use crate::error::{CoreError, Result};
use crate::matrix::Matrix;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub w: Vec<f64>,
    pub b: f64,
    pub platt_a: f64,
    pub platt_b: f64,
}

impl LinearSvmModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.b + self.w.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
    }

    pub fn predict_proba(&self, batch: &Matrix) -> Result<Vec<f64>> {
        if batch.cols() != self.w.len() {
            return Err(CoreError::DimensionMismatch { expected: self.w.len(), got: batch.cols() });
        }
        Ok(batch
            .iter_rows()
            .map(|r| sigmoid(self.platt_a * self.decision(r) + self.platt_b))
            .collect())
    }
}

/// Pegasos: labels mapped to {-1,+1}, step size 1/(lambda * t), per-epoch
/// seeded shuffling. The bias follows hinge violations without shrinkage.
pub fn train_linear_svm(
    train: &Dataset,
    lambda: f64,
    epochs: usize,
    seed: u64,
) -> Result<LinearSvmModel> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(CoreError::InvalidHyperparameter { reason: "lambda must be positive".to_string() });
    }
    if !train.y.contains(&0) || !train.y.contains(&1) {
        return Err(CoreError::DegenerateClass);
    }
    let n = train.n();
    let d = train.d();
    let signed: Vec<f64> = train.y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut rng = rng_from_seed(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut t: u64 = 0;

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let row = train.x.row(i);
            let y = signed[i];
            let margin = y * (b + w.iter().zip(row).map(|(w, x)| w * x).sum::<f64>());
            let shrink = 1.0 - eta * lambda;
            if margin < 1.0 {
                for (wv, &xv) in w.iter_mut().zip(row) {
                    *wv = shrink * *wv + eta * y * xv;
                }
                b += eta * y;
            } else {
                for wv in w.iter_mut() {
                    *wv *= shrink;
                }
            }
        }
    }

    // Platt scaling on training decision scores. A score spread of zero (null
    // model or lambda-dominated collapse) falls back to identity calibration,
    // which maps score 0 to probability 0.5.
    let scores: Vec<f64> =
        train.x.iter_rows().map(|r| b + w.iter().zip(r).map(|(wv, x)| wv * x).sum::<f64>()).collect();
    let spread = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - scores.iter().cloned().fold(f64::INFINITY, f64::min);
    let (platt_a, platt_b) = if spread < 1e-12 {
        (1.0, 0.0)
    } else {
        let score_x = Matrix::from_rows(&scores.iter().map(|&s| vec![s]).collect::<Vec<_>>())?;
        let calib = train_logistic(&score_x, &train.y, 1e-6, 2000)?;
        (calib.coefficients[0], calib.intercept)
    };

    Ok(LinearSvmModel { w, b, platt_a, platt_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::String;

    fn dataset_1d(values: &[f64], labels: &[u8]) -> Dataset {
        let ids = (0..values.len()).map(|i| format!("r{i}")).collect();
        let x = Matrix::from_rows(&values.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap();
        Dataset::new(ids, vec![String::from("f0")], x, labels.to_vec()).unwrap()
    }

    #[test]
    fn separates_1d_points() {
        let data = dataset_1d(&[-2.0, -1.0, 1.0, 2.0], &[0, 0, 1, 1]);
        let m = train_linear_svm(&data, 0.01, 200, 7).unwrap();
        for (row, &label) in data.x.iter_rows().zip(&data.y) {
            let sign_ok = (m.decision(row) > 0.0) == (label == 1);
            assert!(sign_ok, "score {} for label {label}", m.decision(row));
        }
        let probs = m.predict_proba(&data.x).unwrap();
        assert!(probs[0] < 0.5 && probs[3] > 0.5);
    }

    #[test]
    fn zero_epochs_is_null_model() {
        let data = dataset_1d(&[-1.0, 1.0], &[0, 1]);
        let m = train_linear_svm(&data, 0.01, 0, 7).unwrap();
        assert!(m.w.iter().all(|&w| w == 0.0));
        assert_eq!(m.b, 0.0);
        assert!(m.predict_proba(&data.x).unwrap().iter().all(|&p| p == 0.5));
    }

    #[test]
    fn huge_lambda_crushes_weights() {
        let data = dataset_1d(&[-2.0, -1.0, 1.0, 2.0], &[0, 0, 1, 1]);
        let m = train_linear_svm(&data, 1e6, 50, 7).unwrap();
        let norm = libm::sqrt(m.w.iter().map(|w| w * w).sum::<f64>());
        assert!(norm < 1e-2, "||w|| = {norm}");
    }

    #[test]
    fn invalid_hyperparameters() {
        let data = dataset_1d(&[-1.0, 1.0], &[0, 1]);
        assert!(matches!(
            train_linear_svm(&data, 0.0, 10, 0),
            Err(CoreError::InvalidHyperparameter { .. })
        ));
        let one_class = dataset_1d(&[-1.0, 1.0], &[1, 1]);
        assert_eq!(train_linear_svm(&one_class, 0.1, 10, 0).unwrap_err(), CoreError::DegenerateClass);
    }

    #[test]
    fn deterministic_per_seed() {
        let data = dataset_1d(&[-2.0, -1.5, -1.0, 1.0, 1.5, 2.0], &[0, 0, 0, 1, 1, 1]);
        let a = train_linear_svm(&data, 0.05, 30, 3).unwrap();
        let b = train_linear_svm(&data, 0.05, 30, 3).unwrap();
        assert_eq!(a, b);
    }
}
