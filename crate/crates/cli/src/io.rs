//! File ingestion and emission: dataset CSVs, gene-set lists, annotation TSVs,
//! and the enrichment report.

use std::fmt::Write as _;
use std::path::Path;

use genephen_core::analysis::{EnrichmentRecord, GoAnnotation, GoNamespace};
use genephen_core::dataset::{parse_csv, CsvLoad, CsvSchema};
use genephen_core::Dataset;

use crate::error::{CliError, Result};

pub fn load_dataset(path: &Path, schema: &CsvSchema) -> Result<CsvLoad> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io("load_csv", e))?;
    parse_csv(&text, schema).map_err(|e| CliError::core("load_csv", e))
}

/// Writes a dataset in the same CSV layout `load_dataset` reads:
/// id column first, features, label column last.
pub fn write_dataset_csv(path: &Path, data: &Dataset) -> Result<()> {
    let mut out = String::new();
    out.push_str("id,");
    out.push_str(&data.feature_names.join(","));
    out.push_str(",label\n");
    for i in 0..data.n() {
        out.push_str(&data.ids[i]);
        for v in data.x.row(i) {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{}", data.y[i]);
    }
    std::fs::write(path, out).map_err(|e| CliError::io("write_csv", e))
}

/// One gene id per line; blank lines ignored.
pub fn read_gene_set(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io("read_gene_set", e))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

/// Annotation TSV: header row, then term_id, term_name, namespace
/// ("process" | "function"), gene_id — one gene per line. Rows sharing a
/// term_id are merged into one annotation.
pub fn read_annotations_tsv(path: &Path) -> Result<Vec<GoAnnotation>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io("read_annotations", e))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| CliError::Malformed {
        stage: "read_annotations".into(),
        message: "empty file".into(),
    })?;
    if header.split('\t').count() < 4 {
        return Err(CliError::Malformed {
            stage: "read_annotations".into(),
            message: "header must have at least 4 tab-separated columns".into(),
        });
    }

    let mut annotations: Vec<GoAnnotation> = Vec::new();
    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cells.len() < 4 {
            return Err(CliError::Malformed {
                stage: "read_annotations".into(),
                message: format!("line {}: expected 4 columns, got {}", line_no + 1, cells.len()),
            });
        }
        let namespace = match cells[2] {
            "process" => GoNamespace::Process,
            "function" => GoNamespace::Function,
            other => {
                return Err(CliError::Malformed {
                    stage: "read_annotations".into(),
                    message: format!("line {}: unknown namespace {other:?}", line_no + 1),
                })
            }
        };
        match annotations.iter_mut().find(|a| a.term_id == cells[0]) {
            Some(existing) => existing.genes.push(cells[3].to_string()),
            None => annotations.push(GoAnnotation {
                term_id: cells[0].to_string(),
                term_name: cells[1].to_string(),
                namespace,
                genes: vec![cells[3].to_string()],
            }),
        }
    }
    Ok(annotations)
}

pub fn namespace_str(ns: GoNamespace) -> &'static str {
    match ns {
        GoNamespace::Process => "process",
        GoNamespace::Function => "function",
    }
}

pub fn write_enrichment_csv(path: &Path, records: &[EnrichmentRecord]) -> Result<()> {
    let mut out = String::from("term_id,term_name,namespace,k,K,n,N,p_value,q_value\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.term_id,
            r.term_name,
            namespace_str(r.namespace),
            r.k,
            r.big_k,
            r.n,
            r.big_n,
            r.p_value,
            r.q_value
        );
    }
    std::fs::write(path, out).map_err(|e| CliError::io("write_enrichment", e))
}
