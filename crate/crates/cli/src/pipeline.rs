//! End-to-end orchestration: ingest or generate, split, standardize, train,
//! evaluate, cluster by predicted risk, rank correlations, and optionally run
//! enrichment on the top-risk cluster. Every artifact lands in the output
//! directory and is listed in the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use genephen_core::analysis::{enrich, feature_label_correlation, GoNamespace};
use genephen_core::cluster::{build_cluster_space, kmeans, top_cluster, ExpressionAxis};
use genephen_core::dataset::{apply_scaler, fit_scaler, split, CsvSchema};
use genephen_core::ensemble::{predict_stack_proba, train_stack, StackConfig};
use genephen_core::matrix::Matrix;
use genephen_core::metrics::evaluate;
use genephen_core::mlp::{self, TrainConfig};
use genephen_core::synthgen::{self, SynthConfig};
use genephen_core::Dataset;
use serde::{Deserialize, Serialize};

use crate::chart::{write_correlation_csv, write_correlation_svg};
use crate::error::{CliError, Result};
use crate::io::{load_dataset, read_annotations_tsv, write_dataset_csv};
use crate::manifest::{fingerprint, RunManifest};
use crate::model_io::{save_model, ModelKind, SavedModel, FORMAT_VERSION};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        label_column: String,
        #[serde(default)]
        id_column: Option<String>,
    },
    Synth { config: SynthConfig },
}

fn default_hidden() -> Vec<usize> {
    vec![100]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelChoice {
    Mlp {
        #[serde(default = "default_hidden")]
        hidden: Vec<usize>,
        #[serde(default)]
        train: TrainConfig,
    },
    Stack {
        #[serde(default)]
        config: StackConfig,
        seed: u64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterSettings {
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    /// Standardized column to use as the expression axis; row mean when absent.
    #[serde(default)]
    pub expression_column: Option<String>,
}

impl Default for ClusterSettings {
    fn default() -> Self {
        ClusterSettings { k: 3, seed: 0, restarts: 10, expression_column: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnrichmentSettings {
    pub annotations: PathBuf,
    /// "process" or "function"
    pub namespace: String,
}

fn default_test_fraction() -> f64 {
    0.2
}

fn default_correlation_top() -> usize {
    20
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: DataSource,
    pub model: ModelChoice,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    pub split_seed: u64,
    /// Fit the scaler on the full table before splitting instead of on the
    /// training split only (compatibility mode; leaks test statistics).
    #[serde(default)]
    pub scale_before_split: bool,
    #[serde(default)]
    pub cluster: ClusterSettings,
    #[serde(default)]
    pub enrichment: Option<EnrichmentSettings>,
    #[serde(default = "default_correlation_top")]
    pub correlation_top: usize,
    pub out_dir: PathBuf,
}

pub fn parse_namespace(s: &str) -> Result<GoNamespace> {
    match s {
        "process" => Ok(GoNamespace::Process),
        "function" => Ok(GoNamespace::Function),
        other => Err(CliError::Usage {
            stage: "enrich".into(),
            message: format!("namespace must be \"process\" or \"function\", got {other:?}"),
        }),
    }
}

pub fn train_model(choice: &ModelChoice, train: &Dataset) -> Result<ModelKind> {
    match choice {
        ModelChoice::Mlp { hidden, train: config } => {
            let mut layers = Vec::with_capacity(hidden.len() + 2);
            layers.push(train.d());
            layers.extend_from_slice(hidden);
            layers.push(2);
            let model = mlp::init(&layers, config.seed).map_err(|e| CliError::core("train", e))?;
            let (trained, _) =
                mlp::train(&model, train, config).map_err(|e| CliError::core("train", e))?;
            Ok(ModelKind::Mlp(trained))
        }
        ModelChoice::Stack { config, seed } => {
            let model =
                train_stack(train, config, *seed).map_err(|e| CliError::core("train", e))?;
            Ok(ModelKind::Stack(model))
        }
    }
}

pub fn model_predict_proba(kind: &ModelKind, x: &Matrix) -> Result<Vec<f64>> {
    match kind {
        ModelKind::Mlp(m) => mlp::predict_proba(m, x).map_err(|e| CliError::core("predict", e)),
        ModelKind::Stack(m) => {
            predict_stack_proba(m, x).map_err(|e| CliError::core("predict", e))
        }
    }
}

/// Applies the saved scaler (when present) and returns positive-class
/// probabilities for the raw matrix.
pub fn saved_model_proba(saved: &SavedModel, x: &Matrix) -> Result<Vec<f64>> {
    let scaled;
    let input = match &saved.scaler {
        Some(params) => {
            scaled = apply_scaler(params, x).map_err(|e| CliError::core("predict", e))?;
            &scaled
        }
        None => x,
    };
    model_predict_proba(&saved.kind, input)
}

struct StageTimer<'a> {
    manifest: &'a mut RunManifest,
}

impl StageTimer<'_> {
    fn run<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        self.manifest.timings_ms.insert(stage.to_string(), start.elapsed().as_millis() as u64);
        Ok(out)
    }
}

pub fn run_pipeline(config: &RunConfig) -> Result<RunManifest> {
    std::fs::create_dir_all(&config.out_dir).map_err(|e| CliError::io("setup", e))?;
    let config_echo = serde_json::to_value(config).map_err(|e| CliError::Malformed {
        stage: "setup".into(),
        message: e.to_string(),
    })?;

    // ingest or generate
    let (data, dropped_rows) = match &config.data {
        DataSource::Csv { path, label_column, id_column } => {
            let schema = CsvSchema::new(id_column.clone(), label_column.clone());
            let load = load_dataset(path, &schema)?;
            (load.dataset, load.dropped_rows)
        }
        DataSource::Synth { config: synth } => {
            let out = synthgen::generate(synth).map_err(|e| CliError::core("generate", e))?;
            (out.dataset, 0)
        }
    };

    let mut manifest = RunManifest::new(config_echo, fingerprint(&data), dropped_rows);
    let mut timer = StageTimer { manifest: &mut manifest };
    let mut artifacts: Vec<String> = Vec::new();

    if matches!(config.data, DataSource::Synth { .. }) {
        let path = config.out_dir.join("dataset.csv");
        write_dataset_csv(&path, &data)?;
        artifacts.push("dataset.csv".into());
    }

    // split + standardize; the scaler sees training rows only unless the
    // compatibility flag asks for the pre-split order
    let (scaled_train, scaled_test, scaled_full, scaler) = timer.run("preprocess", || {
        if config.scale_before_split {
            let scaler = fit_scaler(&data.x).map_err(|e| CliError::core("scale", e))?;
            let full_x = apply_scaler(&scaler, &data.x).map_err(|e| CliError::core("scale", e))?;
            let scaled = data.with_x(full_x);
            let parts = split(&scaled, config.test_fraction, config.split_seed)
                .map_err(|e| CliError::core("split", e))?;
            Ok((parts.train, parts.test, scaled, scaler))
        } else {
            let parts = split(&data, config.test_fraction, config.split_seed)
                .map_err(|e| CliError::core("split", e))?;
            let scaler = fit_scaler(&parts.train.x).map_err(|e| CliError::core("scale", e))?;
            let train_x =
                apply_scaler(&scaler, &parts.train.x).map_err(|e| CliError::core("scale", e))?;
            let test_x =
                apply_scaler(&scaler, &parts.test.x).map_err(|e| CliError::core("scale", e))?;
            let full_x = apply_scaler(&scaler, &data.x).map_err(|e| CliError::core("scale", e))?;
            Ok((
                parts.train.with_x(train_x),
                parts.test.with_x(test_x),
                data.with_x(full_x),
                scaler,
            ))
        }
    })?;

    // train + evaluate
    let kind = timer.run("train", || train_model(&config.model, &scaled_train))?;
    let metrics = timer.run("evaluate", || {
        let probs = model_predict_proba(&kind, &scaled_test.x)?;
        let preds: Vec<u8> = probs.iter().map(|&p| u8::from(p >= 0.5)).collect();
        evaluate(&preds, &scaled_test.y).map_err(|e| CliError::core("evaluate", e))
    })?;
    timer.manifest.metrics = Some(metrics.clone());
    write_json(&config.out_dir.join("metrics.json"), &metrics)?;
    artifacts.push("metrics.json".into());

    save_model(
        &SavedModel { format_version: FORMAT_VERSION, scaler: Some(scaler), kind: kind.clone() },
        &config.out_dir.join("model.json"),
    )?;
    artifacts.push("model.json".into());

    // cluster all rows in the (expression, probability) plane
    let probabilities = timer.run("predict", || model_predict_proba(&kind, &scaled_full.x))?;
    let (points, km, top) = timer.run("cluster", || {
        let axis = match &config.cluster.expression_column {
            Some(name) => ExpressionAxis::Column(name.clone()),
            None => ExpressionAxis::Mean,
        };
        let points = build_cluster_space(&scaled_full, &probabilities, &axis)
            .map_err(|e| CliError::core("cluster", e))?;
        let km = kmeans(&points, config.cluster.k, config.cluster.seed, config.cluster.restarts)
            .map_err(|e| CliError::core("cluster", e))?;
        let top = top_cluster(&km, &points).map_err(|e| CliError::core("cluster", e))?;
        Ok((points, km, top))
    })?;
    timer.manifest.top_cluster = Some(top.0);
    timer.manifest.top_cluster_size = Some(top.1.len());

    let mut assignments_csv = String::from("id,expression,probability,cluster\n");
    for (p, &c) in points.iter().zip(&km.assignments) {
        let _ = writeln!(assignments_csv, "{},{},{},{c}", p.id, p.expression, p.probability);
    }
    std::fs::write(config.out_dir.join("cluster_assignments.csv"), assignments_csv)
        .map_err(|e| CliError::io("cluster", e))?;
    artifacts.push("cluster_assignments.csv".into());

    write_json(
        &config.out_dir.join("cluster_summary.json"),
        &serde_json::json!({
            "centroids": km.centroids,
            "objective": km.objective,
            "iterations": km.iterations,
            "seed": km.seed,
            "top_cluster": top.0,
            "member_ids": top.1,
        }),
    )?;
    artifacts.push("cluster_summary.json".into());

    // enrichment of the top-risk cluster against all rows
    if let Some(settings) = &config.enrichment {
        let records = timer.run("enrich", || {
            let namespace = parse_namespace(&settings.namespace)?;
            let annotations = read_annotations_tsv(&settings.annotations).map_err(|e| match e {
                CliError::Io { err, .. } => CliError::io("enrich", err),
                other => other,
            })?;
            enrich(&top.1, &data.ids, &annotations, namespace)
                .map_err(|e| CliError::core("enrich", e))
        })?;
        crate::io::write_enrichment_csv(&config.out_dir.join("enrichment.csv"), &records)?;
        artifacts.push("enrichment.csv".into());
    }

    // correlation ranking on the standardized full table
    timer.run("correlate", || {
        let records =
            feature_label_correlation(&scaled_full).map_err(|e| CliError::core("correlate", e))?;
        write_correlation_csv(&config.out_dir.join("correlations.csv"), &records, config.correlation_top)?;
        write_correlation_svg(&config.out_dir.join("correlations.svg"), &records, config.correlation_top)
    })?;
    artifacts.push("correlations.csv".into());
    artifacts.push("correlations.svg".into());

    artifacts.push("manifest.json".into());
    manifest.artifacts = artifacts;
    manifest.write(&config.out_dir.join("manifest.json"))?;
    Ok(manifest)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value).map_err(|e| CliError::Malformed {
        stage: "write_json".into(),
        message: e.to_string(),
    })?;
    std::fs::write(path, json).map_err(|e| CliError::io("write_json", e))
}
