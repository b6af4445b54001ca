//! Correlation chart emission: ranked CSV plus an optional static SVG bar
//! chart. Output bytes are a pure function of the input records.

use std::fmt::Write as _;
use std::path::Path;

use genephen_core::analysis::CorrelationRecord;

use crate::error::{CliError, Result};

pub fn write_correlation_csv(path: &Path, records: &[CorrelationRecord], top: usize) -> Result<()> {
    let mut out = String::from("feature,r\n");
    for r in records.iter().take(top) {
        let _ = writeln!(out, "{},{}", r.feature_name, r.r);
    }
    std::fs::write(path, out).map_err(|e| CliError::io("write_correlation_csv", e))
}

/// Horizontal bar chart; positive correlations extend right of the axis,
/// negative left. Fixed canvas, six-decimal labels.
pub fn render_correlation_svg(records: &[CorrelationRecord], top: usize) -> String {
    let shown: Vec<&CorrelationRecord> = records.iter().take(top).collect();
    let bar_h = 18.0;
    let gap = 6.0;
    let label_w = 160.0;
    let plot_w = 420.0;
    let height = 40.0 + shown.len() as f64 * (bar_h + gap);
    let width = label_w + plot_w + 80.0;
    let max_abs = shown.iter().map(|r| r.r.abs()).fold(1e-12, f64::max);
    let axis_x = label_w + plot_w / 2.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{axis_x}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">Feature correlation with label</text>"
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{axis_x}\" y1=\"30\" x2=\"{axis_x}\" y2=\"{}\" stroke=\"#888\" stroke-width=\"1\"/>",
        height - 10.0
    );
    for (i, rec) in shown.iter().enumerate() {
        let y = 34.0 + i as f64 * (bar_h + gap);
        let len = rec.r.abs() / max_abs * (plot_w / 2.0);
        let (x, fill) = if rec.r >= 0.0 { (axis_x, "#3b6fb6") } else { (axis_x - len, "#b6553b") };
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">{}</text>",
            label_w - 6.0,
            y + bar_h - 5.0,
            rec.feature_name
        );
        let _ = writeln!(
            svg,
            "<rect x=\"{x:.4}\" y=\"{y:.2}\" width=\"{len:.4}\" height=\"{bar_h}\" fill=\"{fill}\"/>"
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.4}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\">{:.6}</text>",
            label_w + plot_w + 6.0,
            y + bar_h - 5.0,
            rec.r
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_correlation_svg(path: &Path, records: &[CorrelationRecord], top: usize) -> Result<()> {
    std::fs::write(path, render_correlation_svg(records, top))
        .map_err(|e| CliError::io("write_correlation_svg", e))
}
