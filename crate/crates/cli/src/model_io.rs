//! Versioned JSON model persistence. Parameters are stored as decimal arrays
//! (shortest round-trip representation), so a save/load cycle reproduces
//! predictions exactly.

use std::path::Path;

use genephen_core::dataset::ScalerParams;
use genephen_core::ensemble::StackEnsembleModel;
use genephen_core::mlp::MlpModel;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_kind", content = "model", rename_all = "snake_case")]
pub enum ModelKind {
    Mlp(MlpModel),
    Stack(StackEnsembleModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub format_version: u64,
    /// Standardization fitted on the training split; applied before prediction.
    pub scaler: Option<ScalerParams>,
    #[serde(flatten)]
    pub kind: ModelKind,
}

pub fn save_model(model: &SavedModel, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(model).map_err(|e| CliError::Malformed {
        stage: "save_model".into(),
        message: e.to_string(),
    })?;
    std::fs::write(path, json).map_err(|e| CliError::io("save_model", e))
}

pub fn load_model(path: &Path) -> Result<SavedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io("load_model", e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::MalformedModel {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    let version = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| CliError::MalformedModel {
            path: path.display().to_string(),
            message: "missing format_version".into(),
        })?;
    if version != FORMAT_VERSION {
        return Err(CliError::UnsupportedVersion {
            path: path.display().to_string(),
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    serde_json::from_value(value).map_err(|e| CliError::MalformedModel {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
