use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use genephen_core::analysis::{enrich, feature_label_correlation};
use genephen_core::cluster::{build_cluster_space, kmeans, top_cluster, ExpressionAxis};
use genephen_core::dataset::{fit_scaler, CsvSchema};
use genephen_core::ensemble::StackConfig;
use genephen_core::metrics::evaluate;
use genephen_core::mlp::TrainConfig;
use genephen_core::synthgen::{self, SynthConfig};
use genephen::chart::{write_correlation_csv, write_correlation_svg};
use genephen::error::{CliError, Result};
use genephen::io::{
    load_dataset, read_annotations_tsv, read_gene_set, write_dataset_csv, write_enrichment_csv,
};
use genephen::model_io::{load_model, save_model, SavedModel, FORMAT_VERSION};
use genephen::pipeline::{
    model_predict_proba, parse_namespace, run_pipeline, saved_model_proba, train_model,
    ModelChoice, RunConfig,
};

/// Phenotype detection toolkit: synthetic data, model training, clustering,
/// and enrichment over gene-expression-style tables.
#[derive(Parser)]
#[command(name = "genephen", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV: id column, feature columns, 0/1 label column.
    #[arg(long)]
    data: PathBuf,
    /// Header name of the label column.
    #[arg(long, default_value = "label")]
    label_col: String,
    /// Header name of the id column.
    #[arg(long, default_value = "id")]
    id_col: String,
}

impl DataArgs {
    fn load(&self) -> Result<genephen_core::dataset::CsvLoad> {
        let schema = CsvSchema::new(Some(self.id_col.clone()), self.label_col.clone());
        load_dataset(&self.data, &schema)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Mlp,
    Stack,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled expression table.
    Synth {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 5000)]
        features: usize,
        #[arg(long, default_value_t = 100)]
        informative: usize,
        #[arg(long, default_value_t = 0.2)]
        positive_fraction: f64,
        #[arg(long, default_value_t = 1.0)]
        separation: f64,
        #[arg(long)]
        seed: u64,
        /// Output CSV path; a `<out>.meta.json` sidecar records the
        /// configuration and informative column names.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model on a labeled CSV and save it as versioned JSON.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Skip standardization (features are used as-is).
        #[arg(long)]
        no_scale: bool,
        /// MLP hidden layer sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "100")]
        hidden: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.01)]
        learning_rate: f64,
        #[arg(long, default_value_t = 0.0)]
        l2: f64,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 100)]
        rf_trees: usize,
        #[arg(long, default_value_t = 12)]
        rf_depth: usize,
        #[arg(long, default_value_t = 100)]
        gbm_rounds: usize,
        #[arg(long, default_value_t = 3)]
        gbm_depth: usize,
        #[arg(long, default_value_t = 0.1)]
        gbm_lr: f64,
        #[arg(long, default_value_t = 1e-4)]
        svm_lambda: f64,
        #[arg(long, default_value_t = 20)]
        svm_epochs: usize,
    },
    /// Evaluate a saved model on a labeled CSV; metrics JSON on stdout.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
    },
    /// Per-row probabilities and hard labels for a labeled CSV.
    Predict {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// K-means over the (expression, predicted probability) plane.
    Cluster {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        /// Expression axis column; row mean of standardized features if unset.
        #[arg(long)]
        expression_col: Option<String>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Rank features by absolute correlation with the label.
    RankFeatures {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 20)]
        top: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also render a bar chart to this path.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Hypergeometric enrichment of a target set against a background.
    Enrich {
        /// Target gene ids, one per line.
        #[arg(long)]
        target: PathBuf,
        /// Background gene ids, one per line; must contain the target.
        #[arg(long)]
        background: PathBuf,
        /// TSV: term_id, term_name, namespace, gene_id (header row required).
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, default_value = "process")]
        namespace: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full run (ingest/generate, train, evaluate, cluster, rank, enrich)
    /// driven by a JSON configuration file.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth {
            samples,
            features,
            informative,
            positive_fraction,
            separation,
            seed,
            out,
        } => {
            let config = SynthConfig {
                n_samples: samples,
                n_features: features,
                n_informative: informative,
                positive_fraction,
                class_separation: separation,
                seed,
            };
            let generated =
                synthgen::generate(&config).map_err(|e| CliError::core("generate", e))?;
            write_dataset_csv(&out, &generated.dataset)?;
            let informative_columns: Vec<&str> = generated
                .informative_columns
                .iter()
                .map(|&j| generated.dataset.feature_names[j].as_str())
                .collect();
            let sidecar = serde_json::json!({
                "config": config,
                "informative_columns": informative_columns,
            });
            let meta_path = out.with_extension("meta.json");
            std::fs::write(&meta_path, serde_json::to_string_pretty(&sidecar).unwrap())
                .map_err(|e| CliError::io("synth", e))?;
            println!("wrote {} and {}", out.display(), meta_path.display());
            Ok(())
        }
        Command::Train {
            data,
            model,
            seed,
            out,
            no_scale,
            hidden,
            epochs,
            batch_size,
            learning_rate,
            l2,
            folds,
            rf_trees,
            rf_depth,
            gbm_rounds,
            gbm_depth,
            gbm_lr,
            svm_lambda,
            svm_epochs,
        } => {
            let loaded = data.load()?;
            let choice = match model {
                ModelArg::Mlp => ModelChoice::Mlp {
                    hidden,
                    train: TrainConfig { epochs, batch_size, learning_rate, l2, seed },
                },
                ModelArg::Stack => ModelChoice::Stack {
                    config: StackConfig {
                        n_folds: folds,
                        svm_lambda,
                        svm_epochs,
                        rf_trees,
                        rf_depth,
                        gbm_rounds,
                        gbm_depth,
                        gbm_learning_rate: gbm_lr,
                        ..Default::default()
                    },
                    seed,
                },
            };
            let (train_set, scaler) = if no_scale {
                (loaded.dataset, None)
            } else {
                let scaler =
                    fit_scaler(&loaded.dataset.x).map_err(|e| CliError::core("scale", e))?;
                let x = genephen_core::dataset::apply_scaler(&scaler, &loaded.dataset.x)
                    .map_err(|e| CliError::core("scale", e))?;
                (loaded.dataset.with_x(x), Some(scaler))
            };
            let kind = train_model(&choice, &train_set)?;
            save_model(&SavedModel { format_version: FORMAT_VERSION, scaler, kind }, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Eval { data, model } => {
            let loaded = data.load()?;
            let saved = load_model(&model)?;
            let probs = saved_model_proba(&saved, &loaded.dataset.x)?;
            let preds: Vec<u8> = probs.iter().map(|&p| u8::from(p >= 0.5)).collect();
            let metrics = evaluate(&preds, &loaded.dataset.y)
                .map_err(|e| CliError::core("evaluate", e))?;
            println!("{}", serde_json::to_string_pretty(&metrics).unwrap());
            Ok(())
        }
        Command::Predict { data, model, threshold, out } => {
            let loaded = data.load()?;
            let saved = load_model(&model)?;
            let probs = saved_model_proba(&saved, &loaded.dataset.x)?;
            let mut csv = String::from("id,probability,prediction\n");
            for (id, &p) in loaded.dataset.ids.iter().zip(&probs) {
                let _ = writeln!(csv, "{id},{p},{}", u8::from(p >= threshold));
            }
            std::fs::write(&out, csv).map_err(|e| CliError::io("predict", e))?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Cluster { data, model, k, seed, restarts, expression_col, out_dir } => {
            let loaded = data.load()?;
            let saved = load_model(&model)?;
            // cluster in the same standardized space the model predicts in
            let space = match &saved.scaler {
                Some(params) => {
                    let x = genephen_core::dataset::apply_scaler(params, &loaded.dataset.x)
                        .map_err(|e| CliError::core("cluster", e))?;
                    loaded.dataset.with_x(x)
                }
                None => loaded.dataset.clone(),
            };
            let probs = model_predict_proba(&saved.kind, &space.x)?;
            let axis = match expression_col {
                Some(name) => ExpressionAxis::Column(name),
                None => ExpressionAxis::Mean,
            };
            let points = build_cluster_space(&space, &probs, &axis)
                .map_err(|e| CliError::core("cluster", e))?;
            let km = kmeans(&points, k, seed, restarts).map_err(|e| CliError::core("cluster", e))?;
            let top = top_cluster(&km, &points).map_err(|e| CliError::core("cluster", e))?;

            std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io("cluster", e))?;
            let mut csv = String::from("id,expression,probability,cluster\n");
            for (p, &c) in points.iter().zip(&km.assignments) {
                let _ = writeln!(csv, "{},{},{},{c}", p.id, p.expression, p.probability);
            }
            std::fs::write(out_dir.join("cluster_assignments.csv"), csv)
                .map_err(|e| CliError::io("cluster", e))?;
            let summary = serde_json::json!({
                "centroids": km.centroids,
                "objective": km.objective,
                "iterations": km.iterations,
                "seed": km.seed,
                "top_cluster": top.0,
                "member_ids": top.1,
            });
            std::fs::write(
                out_dir.join("cluster_summary.json"),
                serde_json::to_string_pretty(&summary).unwrap(),
            )
            .map_err(|e| CliError::io("cluster", e))?;
            println!("top cluster {} with {} members", top.0, top.1.len());
            Ok(())
        }
        Command::RankFeatures { data, top, out, svg } => {
            let loaded = data.load()?;
            let records = feature_label_correlation(&loaded.dataset)
                .map_err(|e| CliError::core("correlate", e))?;
            write_correlation_csv(&out, &records, top)?;
            if let Some(svg_path) = svg {
                write_correlation_svg(&svg_path, &records, top)?;
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Enrich { target, background, annotations, namespace, out } => {
            let ns = parse_namespace(&namespace)?;
            let target_set = read_gene_set(&target)?;
            let background_set = read_gene_set(&background)?;
            let anns = read_annotations_tsv(&annotations)?;
            let records = enrich(&target_set, &background_set, &anns, ns)
                .map_err(|e| CliError::core("enrich", e))?;
            write_enrichment_csv(&out, &records)?;
            println!("wrote {} ({} terms)", out.display(), records.len());
            Ok(())
        }
        Command::Pipeline { config } => {
            let text =
                std::fs::read_to_string(&config).map_err(|e| CliError::io("pipeline", e))?;
            let run_config: RunConfig =
                serde_json::from_str(&text).map_err(|e| CliError::Usage {
                    stage: "pipeline".into(),
                    message: format!("bad config {}: {e}", config.display()),
                })?;
            let manifest = run_pipeline(&run_config)?;
            println!(
                "pipeline complete: {} artifacts in {}",
                manifest.artifacts.len(),
                run_config.out_dir.display()
            );
            if let Some(m) = &manifest.metrics {
                println!("test accuracy {:.4} over {} rows", m.accuracy, m.n);
            }
            Ok(())
        }
    }
}
