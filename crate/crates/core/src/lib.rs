//! Core algorithms for binary phenotype classification on gene-expression-style
//! tabular data: dataset handling, synthetic data generation, a from-scratch MLP,
//! a stacking ensemble (linear SVM + random forest + gradient boosting under a
//! logistic meta-classifier), 2D k-means clustering, feature-label correlation
//! ranking, and hypergeometric enrichment with BH correction.
//!
//! The crate is `no_std` + `alloc`; all IO, file formats, and the CLI live in the
//! companion `genephen-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod cluster;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod matrix;
pub mod metrics;
pub mod mlp;
pub mod rng;
pub mod synthgen;

pub use dataset::Dataset;
pub use error::CoreError;
pub use matrix::Matrix;
