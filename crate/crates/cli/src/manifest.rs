//! Run manifests: configuration echo, dataset fingerprint, metrics, timings,
//! and the artifact list of a pipeline run.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use genephen_core::metrics::Metrics;
use genephen_core::Dataset;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub rows: usize,
    pub cols: usize,
    pub sha256: String,
}

/// Content hash over ids, feature names, labels, and the raw f64 bits of
/// every cell. Changes iff any cell, label, or id changes.
pub fn fingerprint(data: &Dataset) -> DatasetFingerprint {
    let mut hasher = Sha256::new();
    for id in &data.ids {
        hasher.update(id.as_bytes());
        hasher.update([0u8]);
    }
    for name in &data.feature_names {
        hasher.update(name.as_bytes());
        hasher.update([0u8]);
    }
    hasher.update(&data.y);
    for v in data.x.data() {
        hasher.update(v.to_le_bytes());
    }
    let digest = hasher.finalize();
    let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
    DatasetFingerprint { rows: data.n(), cols: data.d(), sha256 }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u64,
    pub config: serde_json::Value,
    pub dataset: DatasetFingerprint,
    pub dropped_rows: usize,
    pub metrics: Option<Metrics>,
    pub top_cluster: Option<usize>,
    pub top_cluster_size: Option<usize>,
    pub artifacts: Vec<String>,
    /// Unix epoch seconds; excluded from determinism guarantees.
    pub created_unix: u64,
    /// Stage wall times in milliseconds; excluded from determinism guarantees.
    pub timings_ms: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn new(config: serde_json::Value, dataset: DatasetFingerprint, dropped_rows: usize) -> Self {
        RunManifest {
            format_version: MANIFEST_VERSION,
            config,
            dataset,
            dropped_rows,
            metrics: None,
            top_cluster: None,
            top_cluster_size: None,
            artifacts: Vec::new(),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| CliError::Malformed {
            stage: "write_manifest".into(),
            message: e.to_string(),
        })?;
        std::fs::write(path, json).map_err(|e| CliError::io("write_manifest", e))
    }

    /// Copy with volatile fields (timestamp, timings) zeroed, for
    /// determinism comparisons.
    pub fn stable_view(&self) -> RunManifest {
        let mut copy = self.clone();
        copy.created_unix = 0;
        copy.timings_ms.clear();
        copy
    }
}
