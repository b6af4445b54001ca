//! L2-regularized logistic regression by full-batch gradient descent with a
//! Lipschitz-bounded step size. Used as the stacking meta-classifier and for
//! Platt calibration of SVM scores.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::sigmoid;
use crate::error::{CoreError, Result};
use crate::matrix::Matrix;

pub const GRAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl LogisticModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(row).map(|(c, x)| c * x).sum::<f64>()
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }

    pub fn predict_proba(&self, batch: &Matrix) -> Result<Vec<f64>> {
        if batch.cols() != self.coefficients.len() {
            return Err(CoreError::DimensionMismatch {
                expected: self.coefficients.len(),
                got: batch.cols(),
            });
        }
        Ok(batch.iter_rows().map(|r| self.predict_proba_row(r)).collect())
    }
}

/// Minimizes mean cross-entropy + (l2/2)||coef||^2 (intercept unpenalized).
/// Runs until `iters` steps or the gradient norm drops below 1e-8.
pub fn train_logistic(x: &Matrix, y: &[u8], l2: f64, iters: usize) -> Result<LogisticModel> {
    let n = x.rows();
    if n != y.len() {
        return Err(CoreError::LengthMismatch { expected: n, got: y.len() });
    }
    if n < 2 || !y.contains(&0) || !y.contains(&1) {
        return Err(CoreError::DegenerateClass);
    }
    let d = x.cols();
    let mut coef = vec![0.0; d];
    let mut intercept = 0.0;

    // Hessian of the mean loss is bounded by max_i ||(x_i, 1)||^2 / 4 + l2.
    let max_sq = x
        .iter_rows()
        .map(|r| 1.0 + r.iter().map(|v| v * v).sum::<f64>())
        .fold(1.0f64, f64::max);
    let step = 1.0 / (0.25 * max_sq + l2);

    let mut grad = vec![0.0; d];
    for _ in 0..iters {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (row, &label) in x.iter_rows().zip(y) {
            let err = sigmoid(intercept + coef.iter().zip(row).map(|(c, v)| c * v).sum::<f64>())
                - label as f64;
            grad_b += err;
            for (g, v) in grad.iter_mut().zip(row) {
                *g += err * v;
            }
        }
        grad_b /= n as f64;
        let mut norm_sq = grad_b * grad_b;
        for (g, c) in grad.iter_mut().zip(&coef) {
            *g = *g / n as f64 + l2 * c;
            norm_sq += *g * *g;
        }
        if libm::sqrt(norm_sq) < GRAD_TOL {
            break;
        }
        intercept -= step * grad_b;
        for (c, g) in coef.iter_mut().zip(&grad) {
            *c -= step * g;
        }
    }
    Ok(LogisticModel { coefficients: coef, intercept })
}
