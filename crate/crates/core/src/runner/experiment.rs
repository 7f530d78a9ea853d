use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{label_dir, ExperimentConfig, PipelineSpec};
use super::report::{ReportRow, ReportTable};
use super::{run_pipeline, PipelineOutcome, RecordStatus, RunOptions, RunRecord, RunStatus, RunnerError};
use crate::backends::{Embedder, HttpBackend, PairScorer};
use crate::corpus::{load_benchmark, BenchmarkFormat, BenchmarkInstance};

pub const RECORDS_FILE: &str = "records.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub label: String,
    pub kind: String,
    pub dir: String,
    pub status: RunStatus,
    pub records: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub toolkit: String,
    pub toolkit_version: String,
    /// SHA-256 of the configuration serialized as JSON.
    pub config_sha256: String,
    pub benchmark_sha256: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub pipelines: Vec<ManifestEntry>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub table: ReportTable,
    pub manifest: Manifest,
    pub output_dir: PathBuf,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunnerError + '_ {
    move |source| RunnerError::Io { path: path.to_path_buf(), source }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn spec_kind(spec: &PipelineSpec) -> &'static str {
    match spec {
        PipelineSpec::Baseline { .. } => "baseline",
        PipelineSpec::Oracle { .. } => "oracle",
        PipelineSpec::CascadeNative { .. } => "cascade_native",
        PipelineSpec::CascadeBackend { .. } => "cascade_backend",
        PipelineSpec::Direct { .. } => "direct",
        PipelineSpec::LlmPrompting { .. } => "llm_prompting",
    }
}

/// Records for a pipeline that could not start.
fn all_failed(label: &str, spec: &PipelineSpec, benchmark: &[BenchmarkInstance], error: String) -> PipelineOutcome {
    let meant = match spec {
        PipelineSpec::Oracle { .. } => true,
        PipelineSpec::LlmPrompting { strategy, .. } => strategy.uses_meant_input(),
        _ => false,
    };
    let records = benchmark
        .iter()
        .map(|b| RunRecord {
            instance_id: b.id.clone(),
            input_sent: if meant { b.english_meant.clone() } else { b.english_written.clone() },
            restored: None,
            hypothesis: String::new(),
            status: RecordStatus::BackendFailed,
            timing: 0.0,
        })
        .collect::<Vec<_>>();
    PipelineOutcome {
        label: label.to_string(),
        failures: records.len(),
        records,
        report: None,
        status: RunStatus::Failed,
        error: Some(error),
    }
}

fn write_records(path: &Path, records: &[RunRecord]) -> Result<(), RunnerError> {
    let mut f = std::io::BufWriter::new(fs::File::create(path).map_err(io_err(path))?);
    for r in records {
        let line = serde_json::to_string(r).expect("record serializes");
        writeln!(f, "{line}").map_err(io_err(path))?;
    }
    f.flush().map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunnerError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializes");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Runs every configured pipeline in order and writes the artifacts.
///
/// Layout under `output_dir`: `<label>/records.jsonl` per pipeline, plus
/// `report.json` and `manifest.json`. A pipeline that fails becomes a
/// failed row; the others still run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunnerError> {
    cfg.validate()?;
    let started_at = now();
    let bench_bytes = fs::read(&cfg.benchmark_path).map_err(io_err(&cfg.benchmark_path))?;
    let benchmark = load_benchmark(&cfg.benchmark_path, BenchmarkFormat::from_path(&cfg.benchmark_path))?;
    if benchmark.is_empty() {
        return Err(RunnerError::EmptyBenchmark);
    }
    let mut opts = RunOptions {
        metrics: cfg.metrics.clone(),
        source_lang: cfg.source_lang.clone(),
        target_lang: cfg.target_lang.clone(),
        embedder: None,
        scorer: None,
    };
    if let Some(ep) = &cfg.embed {
        opts.embedder = Some(Arc::new(HttpBackend::new(ep.clone())?) as Arc<dyn Embedder>);
    }
    if let Some(ep) = &cfg.scorer {
        opts.scorer = Some(Arc::new(HttpBackend::new(ep.clone())?) as Arc<dyn PairScorer>);
    }
    fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;

    let mut table = ReportTable::default();
    let mut entries = Vec::new();
    for pc in &cfg.pipelines {
        let label = pc.label();
        log::info!("running pipeline {label}");
        let outcome = pc
            .spec
            .resolve(&benchmark)
            .and_then(|p| run_pipeline(&label, &p, &benchmark, &opts))
            .unwrap_or_else(|e| {
                log::error!("{label}: {e}");
                all_failed(&label, &pc.spec, &benchmark, e.to_string())
            });
        let dir = label_dir(&label);
        let pdir = cfg.output_dir.join(&dir);
        fs::create_dir_all(&pdir).map_err(io_err(&pdir))?;
        write_records(&pdir.join(RECORDS_FILE), &outcome.records)?;
        entries.push(ManifestEntry {
            label: label.clone(),
            kind: spec_kind(&pc.spec).to_string(),
            dir,
            status: outcome.status,
            records: outcome.records.len(),
            failures: outcome.failures,
        });
        table.rows.push(ReportRow::from(&outcome));
    }

    write_json(&cfg.output_dir.join(REPORT_FILE), &table)?;
    let config_json = serde_json::to_vec(cfg).expect("config serializes");
    let manifest = Manifest {
        toolkit: env!("CARGO_PKG_NAME").to_string(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: sha256_hex(&config_json),
        benchmark_sha256: sha256_hex(&bench_bytes),
        seed: cfg.seed,
        started_at,
        finished_at: now(),
        pipelines: entries,
    };
    write_json(&cfg.output_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(ExperimentOutput { table, manifest, output_dir: cfg.output_dir.clone() })
}
