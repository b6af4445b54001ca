//! Synthetic labeled dataset generator: two Gaussian class centroids separated
//! along the informative axes, pure noise elsewhere, exact class counts.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{CoreError, Result};
use crate::matrix::Matrix;
use crate::rng::{rng_from_seed, sample_standard_normal};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_informative: usize,
    pub positive_fraction: f64,
    pub class_separation: f64,
    pub seed: u64,
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        let reject = |reason: &str| Err(CoreError::ConfigError { reason: reason.to_string() });
        if self.n_samples == 0 || self.n_features == 0 {
            return reject("n_samples and n_features must be positive");
        }
        if self.n_informative == 0 || self.n_informative > self.n_features {
            return reject("n_informative must be in [1, n_features]");
        }
        if !(0.0..=1.0).contains(&self.positive_fraction) {
            return reject("positive_fraction must be in [0, 1]");
        }
        if !self.positive_fraction.is_finite() || !self.class_separation.is_finite() {
            return reject("non-finite field");
        }
        if self.class_separation < 0.0 {
            return reject("class_separation must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub dataset: Dataset,
    /// Column indices (after the column shuffle) holding class signal.
    /// Kept out of the CSV on purpose; test harnesses need it, models must not.
    pub informative_columns: Vec<usize>,
}

/// Draws the dataset. Class 1 centroid sits at +class_separation and class 0 at
/// -class_separation along every informative axis; all other coordinates are
/// Normal(0, 1) noise. Exactly round(n * positive_fraction) rows are positive.
pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let n = config.n_samples;
    let d = config.n_features;
    let k = config.n_informative;
    let n_pos = libm::round(n as f64 * config.positive_fraction) as usize;

    let mut rng = rng_from_seed(config.seed);

    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i < n_pos)).collect();
    labels.shuffle(&mut rng);

    // Column permutation: position j in the output takes source axis perm[j],
    // where source axes [0, k) are informative.
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(&mut rng);
    let informative_columns: Vec<usize> =
        (0..d).filter(|&j| perm[j] < k).collect();

    let mut x = Matrix::zeros(n, d);
    for (i, &label) in labels.iter().enumerate() {
        let centroid = if label == 1 { config.class_separation } else { -config.class_separation };
        let row = x.row_mut(i);
        for (j, cell) in row.iter_mut().enumerate() {
            let mean = if perm[j] < k { centroid } else { 0.0 };
            *cell = mean + sample_standard_normal(&mut rng);
        }
    }

    let ids: Vec<String> = (0..n).map(|i| format!("s{i:04}")).collect();
    let names: Vec<String> = (0..d).map(|j| format!("f{j:04}")).collect();
    Ok(SynthOutput {
        dataset: Dataset::new(ids, names, x, labels)?,
        informative_columns,
    })
}
