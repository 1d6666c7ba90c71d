//! CSV and JSON artifacts.

use super::config::Format;
use crate::certify::{ConvergenceTable, InequalityReport, OperatorNormReport};
use crate::error::Result;
use serde::Serialize;

/// Column order of certification tables.
pub const REPORT_COLUMNS: [&str; 9] =
    ["function_id", "inequality_name", "lhs", "rhs", "ratio", "resolution", "max_ratio", "drift", "verdict"];

/// Twelve significant digits; non-finite values as `inf`, `-inf`, `nan`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Serialization(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Serializes a certification report. CSV holds one line per corpus entry
/// and resolution, including entries whose right-hand side vanishes.
pub fn emit_report(report: &InequalityReport, format: Format) -> Result<String> {
    match format {
        Format::Json => json(report),
        Format::Csv => csv_table(&REPORT_COLUMNS, report_rows(report)),
    }
}

fn report_rows(report: &InequalityReport) -> Vec<Vec<String>> {
    report
        .all_rows()
        .into_iter()
        .map(|r| {
            vec![
                r.function_id.clone(),
                report.inequality_name.clone(),
                fmt_float(r.lhs),
                fmt_float(r.rhs),
                fmt_opt(r.ratio),
                r.resolution.to_string(),
                fmt_opt(report.max_ratio),
                fmt_opt(report.drift),
                report.verdict.as_str().to_string(),
            ]
        })
        .collect()
}

/// One evaluated norm.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct NormRow {
    pub function_id: String,
    pub norm: String,
    pub resolution: usize,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub value: f64,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub outer_sensitivity: f64,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub inner_sensitivity: f64,
    pub truncation_flag: bool,
}

pub fn emit_norm(rows: &[NormRow], format: Format) -> Result<String> {
    match format {
        Format::Json => json(&rows),
        Format::Csv => csv_table(
            &["function_id", "norm", "resolution", "value", "outer_sensitivity", "inner_sensitivity", "truncation_flag"],
            rows.iter().map(|r| {
                vec![
                    r.function_id.clone(),
                    r.norm.clone(),
                    r.resolution.to_string(),
                    fmt_float(r.value),
                    fmt_float(r.outer_sensitivity),
                    fmt_float(r.inner_sensitivity),
                    r.truncation_flag.to_string(),
                ]
            }),
        ),
    }
}

pub fn emit_operator(report: &OperatorNormReport, format: Format) -> Result<String> {
    match format {
        Format::Json => json(report),
        Format::Csv => {
            let mut rows: Vec<_> = report.rows.iter().chain(&report.zero_rhs_rows).collect();
            rows.sort_by(|a, b| a.function_id.cmp(&b.function_id).then(a.resolution.cmp(&b.resolution)));
            csv_table(
                &["function_id", "operator", "lhs", "rhs", "ratio", "resolution", "estimate", "drift"],
                rows.into_iter().map(|r| {
                    vec![
                        r.function_id.clone(),
                        report.op.to_string(),
                        fmt_float(r.lhs),
                        fmt_float(r.rhs),
                        fmt_opt(r.ratio),
                        r.resolution.to_string(),
                        fmt_float(report.estimate),
                        fmt_opt(report.drift),
                    ]
                }),
            )
        }
    }
}

pub fn emit_sweep(function_id: &str, norm: &str, table: &ConvergenceTable, format: Format) -> Result<String> {
    match format {
        Format::Json => json(table),
        Format::Csv => csv_table(
            &["function_id", "norm", "resolution", "spacing", "value", "extrapolated", "observed_order"],
            table.rows.iter().map(|r| {
                vec![
                    function_id.to_string(),
                    norm.to_string(),
                    r.resolution.to_string(),
                    fmt_float(r.spacing),
                    fmt_float(r.value),
                    fmt_float(table.extrapolated),
                    fmt_opt(table.observed_order),
                ]
            }),
        ),
    }
}

/// One cube of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct PieceRow {
    pub index: usize,
    pub level: i32,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub coefficient: f64,
    pub center: Vec<f64>,
    pub half_side: f64,
    pub degree: usize,
    pub moment_residual: f64,
    pub nodes: usize,
}

/// Decomposition output: the per-cube table plus global diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct DecompositionSummary {
    pub function_id: String,
    pub method: String,
    pub resolution: usize,
    /// `||f - reconstruction||_inf`.
    pub residual: f64,
    pub degree_reduced: bool,
    pub pieces: Vec<PieceRow>,
}

pub fn emit_decomposition(summary: &DecompositionSummary, format: Format) -> Result<String> {
    match format {
        Format::Json => json(summary),
        Format::Csv => csv_table(
            &["function_id", "method", "index", "level", "coefficient", "center", "half_side", "degree", "moment_residual", "nodes"],
            summary.pieces.iter().map(|p| {
                vec![
                    summary.function_id.clone(),
                    summary.method.clone(),
                    p.index.to_string(),
                    p.level.to_string(),
                    fmt_float(p.coefficient),
                    p.center.iter().map(|c| fmt_float(*c)).collect::<Vec<_>>().join(" "),
                    fmt_float(p.half_side),
                    p.degree.to_string(),
                    fmt_float(p.moment_residual),
                    p.nodes.to_string(),
                ]
            }),
        ),
    }
}
