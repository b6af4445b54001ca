//! Stacking: stratified out-of-fold base-learner probabilities feed a logistic
//! meta-classifier; the base learners are then refit on the full training set.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::gbm::{train_gbm, GbmModel};
use super::logistic::{train_logistic, LogisticModel};
use super::svm::{train_linear_svm, LinearSvmModel};
use super::tree::{train_random_forest, RandomForestModel};
use crate::dataset::Dataset;
use crate::error::{CoreError, Result};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StackConfig {
    pub n_folds: usize,
    pub svm_lambda: f64,
    pub svm_epochs: usize,
    pub rf_trees: usize,
    pub rf_depth: usize,
    pub gbm_rounds: usize,
    pub gbm_depth: usize,
    pub gbm_learning_rate: f64,
    pub meta_l2: f64,
    pub meta_iters: usize,
}

impl Default for StackConfig {
    fn default() -> Self {
        StackConfig {
            n_folds: 5,
            svm_lambda: 1e-4,
            svm_epochs: 20,
            rf_trees: 100,
            rf_depth: 12,
            gbm_rounds: 100,
            gbm_depth: 3,
            gbm_learning_rate: 0.1,
            meta_l2: 1e-3,
            meta_iters: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackEnsembleModel {
    pub svm: LinearSvmModel,
    pub rf: RandomForestModel,
    pub gbm: GbmModel,
    pub meta: LogisticModel,
    pub n_folds: usize,
}

/// Stratified fold assignment: per-class seeded shuffle, then round-robin
/// dealing. Every fold keeps roughly the class proportions of the input.
pub fn stratified_folds(y: &[u8], n_folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let min_class = [0u8, 1u8]
        .iter()
        .map(|c| y.iter().filter(|&&l| l == *c).count())
        .min()
        .unwrap_or(0);
    if n_folds < 2 || n_folds > min_class {
        return Err(CoreError::InvalidFolds { n_folds });
    }
    let mut rng = rng_from_seed(seed);
    let mut folds = alloc::vec![Vec::new(); n_folds];
    for class in [0u8, 1u8] {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        members.shuffle(&mut rng);
        for (pos, i) in members.into_iter().enumerate() {
            folds[pos % n_folds].push(i);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Runs `fit_predict(train_part, holdout_part, fold_index)` for each fold and
/// scatters the held-out predictions back to original row order. The learner
/// never sees the rows it predicts.
pub fn out_of_fold<F>(data: &Dataset, folds: &[Vec<usize>], mut fit_predict: F) -> Result<Vec<f64>>
where
    F: FnMut(&Dataset, &Dataset, usize) -> Result<Vec<f64>>,
{
    let mut out = alloc::vec![0.0f64; data.n()];
    for (fold_idx, holdout) in folds.iter().enumerate() {
        let train_idx: Vec<usize> = {
            let mut in_holdout = alloc::vec![false; data.n()];
            for &i in holdout {
                in_holdout[i] = true;
            }
            (0..data.n()).filter(|&i| !in_holdout[i]).collect()
        };
        let train_part = data.select(&train_idx);
        let holdout_part = data.select(holdout);
        let preds = fit_predict(&train_part, &holdout_part, fold_idx)?;
        if preds.len() != holdout.len() {
            return Err(CoreError::LengthMismatch { expected: holdout.len(), got: preds.len() });
        }
        for (&i, &p) in holdout.iter().zip(&preds) {
            out[i] = p;
        }
    }
    Ok(out)
}

pub fn train_stack(train: &Dataset, config: &StackConfig, seed: u64) -> Result<StackEnsembleModel> {
    let folds = stratified_folds(&train.y, config.n_folds, derive_seed(seed, 0))?;

    let oof_svm = out_of_fold(train, &folds, |part, holdout, fold| {
        let m = train_linear_svm(part, config.svm_lambda, config.svm_epochs, derive_seed(seed, 10 + fold as u64))?;
        m.predict_proba(&holdout.x)
    })?;
    let oof_rf = out_of_fold(train, &folds, |part, holdout, fold| {
        let m = train_random_forest(part, config.rf_trees, config.rf_depth, derive_seed(seed, 20 + fold as u64))?;
        Ok(m.predict_proba(&holdout.x))
    })?;
    let oof_gbm = out_of_fold(train, &folds, |part, holdout, fold| {
        let m = train_gbm(part, config.gbm_rounds, config.gbm_depth, config.gbm_learning_rate, derive_seed(seed, 30 + fold as u64))?;
        Ok(m.predict_proba(&holdout.x))
    })?;

    let mut meta_x = Matrix::zeros(train.n(), 3);
    for i in 0..train.n() {
        meta_x.set(i, 0, oof_svm[i]);
        meta_x.set(i, 1, oof_rf[i]);
        meta_x.set(i, 2, oof_gbm[i]);
    }
    let meta = train_logistic(&meta_x, &train.y, config.meta_l2, config.meta_iters)?;

    let svm = train_linear_svm(train, config.svm_lambda, config.svm_epochs, derive_seed(seed, 1))?;
    let rf = train_random_forest(train, config.rf_trees, config.rf_depth, derive_seed(seed, 2))?;
    let gbm = train_gbm(train, config.gbm_rounds, config.gbm_depth, config.gbm_learning_rate, derive_seed(seed, 3))?;

    Ok(StackEnsembleModel { svm, rf, gbm, meta, n_folds: config.n_folds })
}

/// Meta probability from the three base probabilities.
pub fn predict_stack_proba(model: &StackEnsembleModel, batch: &Matrix) -> Result<Vec<f64>> {
    let svm = model.svm.predict_proba(batch)?;
    let rf = model.rf.predict_proba(batch);
    let gbm = model.gbm.predict_proba(batch);
    Ok(svm
        .iter()
        .zip(rf.iter().zip(&gbm))
        .map(|(&s, (&r, &g))| model.meta.predict_proba_row(&[s, r, g]))
        .collect())
}

/// Hard labels; ties at the threshold classify positive.
pub fn predict_stack(model: &StackEnsembleModel, batch: &Matrix, threshold: f64) -> Result<Vec<u8>> {
    Ok(predict_stack_proba(model, batch)?
        .into_iter()
        .map(|p| u8::from(p >= threshold))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{generate, SynthConfig};

    fn synth(n: usize, seed: u64) -> Dataset {
        generate(&SynthConfig {
            n_samples: n,
            n_features: 8,
            n_informative: 3,
            positive_fraction: 0.3,
            class_separation: 1.5,
            seed,
        })
        .unwrap()
        .dataset
    }

    #[test]
    fn folds_partition_and_stratify() {
        let data = synth(60, 1);
        let folds = stratified_folds(&data.y, 4, 9).unwrap();
        let mut seen = alloc::vec![0usize; 60];
        for fold in &folds {
            for &i in fold {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        for fold in &folds {
            let pos = fold.iter().filter(|&&i| data.y[i] == 1).count();
            // 18 positives over 4 folds: 4 or 5 each
            assert!((4..=5).contains(&pos), "fold positives {pos}");
        }
    }

    #[test]
    fn invalid_fold_counts() {
        let data = synth(20, 2);
        assert!(matches!(stratified_folds(&data.y, 1, 0), Err(CoreError::InvalidFolds { .. })));
        assert!(matches!(stratified_folds(&data.y, 21, 0), Err(CoreError::InvalidFolds { .. })));
    }

    #[test]
    fn oof_never_trains_on_predicted_rows() {
        let data = synth(40, 3);
        let folds = stratified_folds(&data.y, 4, 5).unwrap();
        let preds = out_of_fold(&data, &folds, |part, holdout, _| {
            for id in &holdout.ids {
                assert!(!part.ids.contains(id), "row {id} in both train and holdout");
            }
            Ok(alloc::vec![0.25; holdout.n()])
        })
        .unwrap();
        assert_eq!(preds.len(), 40);
        assert!(preds.iter().all(|&p| p == 0.25));
    }

    #[test]
    fn constant_base_learners_reduce_to_intercept() {
        // forced 0.5 from every base learner: the meta model sees constant
        // features and must predict the majority class everywhere
        let data = synth(40, 4);
        let meta_x = Matrix::from_rows(&alloc::vec![alloc::vec![0.5, 0.5, 0.5]; 40]).unwrap();
        let meta = train_logistic(&meta_x, &data.y, 1e-3, 2000).unwrap();
        let majority = u8::from(data.y.iter().filter(|&&l| l == 1).count() * 2 > 40);
        let p = meta.predict_proba_row(&[0.5, 0.5, 0.5]);
        assert_eq!(u8::from(p >= 0.5), majority);
    }

    fn small_config() -> StackConfig {
        StackConfig {
            n_folds: 3,
            svm_epochs: 10,
            rf_trees: 10,
            rf_depth: 4,
            gbm_rounds: 10,
            ..StackConfig::default()
        }
    }

    #[test]
    fn stack_trains_and_predicts() {
        let data = synth(60, 5);
        let model = train_stack(&data, &small_config(), 11).unwrap();
        assert_eq!(model.meta.coefficients.len(), 3);
        let probs = predict_stack_proba(&model, &data.x).unwrap();
        assert_eq!(probs.len(), 60);
        assert!(probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
        let labels = predict_stack(&model, &data.x, 0.5).unwrap();
        let acc = labels.iter().zip(&data.y).filter(|(a, b)| a == b).count() as f64 / 60.0;
        assert!(acc > 0.8, "training accuracy {acc}");
    }

    #[test]
    fn stack_single_row_batch() {
        let data = synth(30, 6);
        let model = train_stack(&data, &small_config(), 2).unwrap();
        let one = data.x.select_rows(&[0]);
        assert_eq!(predict_stack_proba(&model, &one).unwrap().len(), 1);
        assert_eq!(predict_stack(&model, &one, 0.5).unwrap().len(), 1);
    }

    #[test]
    fn null_meta_ties_positive() {
        let data = synth(30, 7);
        let mut model = train_stack(&data, &small_config(), 3).unwrap();
        model.meta = LogisticModel { coefficients: alloc::vec![0.0; 3], intercept: 0.0 };
        let probs = predict_stack_proba(&model, &data.x).unwrap();
        assert!(probs.iter().all(|&p| (p - 0.5).abs() < 1e-12));
        assert!(predict_stack(&model, &data.x, 0.5).unwrap().iter().all(|&l| l == 1));
    }

    #[test]
    fn single_coefficient_meta_is_monotone_in_svm() {
        let data = synth(30, 8);
        let mut model = train_stack(&data, &small_config(), 4).unwrap();
        model.meta = LogisticModel { coefficients: alloc::vec![10.0, 0.0, 0.0], intercept: -5.0 };
        let svm_probs = model.svm.predict_proba(&data.x).unwrap();
        let stack_probs = predict_stack_proba(&model, &data.x).unwrap();
        let mut order: Vec<usize> = (0..30).collect();
        order.sort_by(|&a, &b| svm_probs[a].total_cmp(&svm_probs[b]));
        for pair in order.windows(2) {
            assert!(stack_probs[pair[0]] <= stack_probs[pair[1]] + 1e-15);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let data = synth(40, 9);
        let a = train_stack(&data, &small_config(), 13).unwrap();
        let b = train_stack(&data, &small_config(), 13).unwrap();
        assert_eq!(a, b);
    }
}
