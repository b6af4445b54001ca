//! IO, file formats, run manifests, and pipeline orchestration on top of
//! `genephen-core`.

pub mod chart;
pub mod error;
pub mod io;
pub mod manifest;
pub mod model_io;
pub mod pipeline;

pub use error::CliError;
