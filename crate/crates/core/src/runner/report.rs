use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{PipelineOutcome, RunStatus, RunnerError};
use crate::metrics::MetricReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub system: String,
    pub status: RunStatus,
    pub failures: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub metrics: Option<MetricReport>,
}

impl From<&PipelineOutcome> for ReportRow {
    fn from(o: &PipelineOutcome) -> Self {
        Self {
            system: o.label.clone(),
            status: o.status,
            failures: o.failures,
            error: o.error.clone(),
            metrics: o.report.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = RunnerError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(RunnerError::Config(format!("unknown report format {other:?}"))),
        }
    }
}

const HEADER: [&str; 8] = ["System", "BLEU", "chrF++", "chrF2++", "Cosine", "Learned", "N", "Failures"];

fn cells(row: &ReportRow) -> [String; 8] {
    let score = |v: f64| format!("{v:.2}");
    let sim = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
    match &row.metrics {
        Some(m) => [
            row.system.clone(),
            score(m.bleu),
            score(m.chrf_pp),
            score(m.chrf2_pp),
            sim(m.cosine_embed),
            sim(m.learned_score),
            m.n_instances.to_string(),
            row.failures.to_string(),
        ],
        None => {
            let mut c: [String; 8] = Default::default();
            c[0] = row.system.clone();
            for x in &mut c[1..6] {
                *x = "-".into();
            }
            c[6] = "0".into();
            c[7] = row.failures.to_string();
            c
        }
    }
}

/// Renders the table as text.
///
/// Markdown marks failed pipelines after the system name; CSV adds a
/// trailing `Status` column.
pub fn render_report(table: &ReportTable, format: ReportFormat) -> Result<String, RunnerError> {
    if table.rows.is_empty() {
        return Err(RunnerError::EmptyTable);
    }
    Ok(match format {
        ReportFormat::Markdown => {
            let mut out = format!("| {} |\n|{}\n", HEADER.join(" | "), "---|".repeat(HEADER.len()));
            for row in &table.rows {
                let mut c = cells(row);
                if row.status == RunStatus::Failed {
                    c[0].push_str(" (failed)");
                }
                let escaped: Vec<String> = c.iter().map(|x| x.replace('|', "\\|")).collect();
                writeln!(out, "| {} |", escaped.join(" | ")).unwrap();
            }
            out
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = HEADER.to_vec();
            header.push("Status");
            w.write_record(&header).map_err(|e| RunnerError::Report(e.to_string()))?;
            for row in &table.rows {
                let mut c = cells(row).to_vec();
                c.push(if row.status == RunStatus::Ok { "ok".into() } else { "failed".into() });
                w.write_record(&c).map_err(|e| RunnerError::Report(e.to_string()))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| RunnerError::Report(e.to_string()))?).expect("utf-8")
        }
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(table).expect("table serializes");
            s.push('\n');
            s
        }
    })
}

pub fn emit_report(table: &ReportTable, format: ReportFormat, path: &Path) -> Result<(), RunnerError> {
    let text = render_report(table, format)?;
    std::fs::write(path, text).map_err(|source| RunnerError::Io { path: path.to_path_buf(), source })
}

/// Reads a table written in JSON format.
pub fn load_report(path: &Path) -> Result<ReportTable, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunnerError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| RunnerError::Report(format!("{}: {e}", path.display())))
}
