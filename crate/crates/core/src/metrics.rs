//! Binary classification metrics.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tp: usize,
    pub precision: f64,
    pub recall: f64,
    /// False when the corresponding denominator was zero and the value was
    /// pinned to 0.
    pub precision_defined: bool,
    pub recall_defined: bool,
    pub n: usize,
}

pub fn evaluate(predicted: &[u8], actual: &[u8]) -> Result<Metrics> {
    if predicted.is_empty() {
        return Err(CoreError::Empty);
    }
    if predicted.len() != actual.len() {
        return Err(CoreError::LengthMismatch { expected: actual.len(), got: predicted.len() });
    }
    let mut counts = [0usize; 4]; // tn, fp, fn, tp
    for (&p, &a) in predicted.iter().zip(actual) {
        if p > 1 || a > 1 {
            return Err(CoreError::ConfigError {
                reason: alloc::string::ToString::to_string("label outside {0,1}"),
            });
        }
        counts[(a * 2 + p) as usize] += 1;
    }
    let [tn, fp, fn_, tp] = counts;
    let n = predicted.len();
    let (precision, precision_defined) =
        if tp + fp > 0 { (tp as f64 / (tp + fp) as f64, true) } else { (0.0, false) };
    let (recall, recall_defined) =
        if tp + fn_ > 0 { (tp as f64 / (tp + fn_) as f64, true) } else { (0.0, false) };
    Ok(Metrics {
        accuracy: (tn + tp) as f64 / n as f64,
        tn,
        fp,
        fn_,
        tp,
        precision,
        recall,
        precision_defined,
        recall_defined,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_agreement() {
        let labels = [1u8, 0, 1, 0, 1, 1, 0, 0, 1, 0];
        let m = evaluate(&labels, &labels).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.fp + m.fn_, 0);
        assert_eq!(m.n, 10);
    }

    #[test]
    fn hand_counted_confusion() {
        let m = evaluate(&[1, 1, 0, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_eq!((m.tn, m.fp, m.fn_, m.tp), (1, 1, 1, 1));
        assert_eq!(m.precision, 0.5);
        assert_eq!(m.recall, 0.5);
    }

    #[test]
    fn degenerate_denominators_flagged() {
        let m = evaluate(&[0, 0, 0], &[0, 0, 0]).unwrap();
        assert_eq!(m.precision, 0.0);
        assert!(!m.precision_defined);
        assert_eq!(m.recall, 0.0);
        assert!(!m.recall_defined);
        assert_eq!(m.accuracy, 1.0);
    }

    #[test]
    fn errors() {
        assert_eq!(evaluate(&[], &[]).unwrap_err(), CoreError::Empty);
        assert_eq!(
            evaluate(&[0, 1], &[0]).unwrap_err(),
            CoreError::LengthMismatch { expected: 1, got: 2 }
        );
    }
}
