//! Experiment orchestration over a benchmark.
//!
//! A [`Pipeline`] turns each benchmark instance into a Marathi hypothesis:
//! directly, through a restorer first, or through an LLM prompt. Every
//! instance yields one [`RunRecord`]; failed instances are kept in the
//! records but left out of scoring.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{BackendError, ChatModel, Embedder, LanguageTag, PairScorer, TextRestorer, Translator};
use crate::corpus::{BenchmarkInstance, CorpusError, PunctuationInventory};
use crate::metrics::{build_report, MetricConfig, MetricError, MetricReport, ReportBackends};
use crate::prompts::{default_shot_ids, parse_reply, select_and_exclude_shots, PromptError, Strategy, TemplateSet};
use crate::restorer::{restore, RestorerError, RestorerModel};

mod config;
mod experiment;
mod report;

pub use config::{label_dir, ChatRef, ExperimentConfig, PipelineConfig, PipelineSpec, TranslatorRef};
pub use experiment::{run_experiment, ExperimentOutput, Manifest, MANIFEST_FILE, RECORDS_FILE, REPORT_FILE};
pub use report::{emit_report, load_report, render_report, ReportFormat, ReportRow, ReportTable};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("benchmark is empty")]
    EmptyBenchmark,
    #[error("report table is empty")]
    EmptyTable,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Restorer(#[from] RestorerError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("malformed report: {0}")]
    Report(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    ParseFailed,
    BackendFailed,
}

/// Outcome for one benchmark instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub input_sent: String,
    pub restored: Option<String>,
    /// Empty unless `status` is `ok`.
    pub hypothesis: String,
    pub status: RecordStatus,
    /// Wall-clock seconds; batched calls are split evenly across their items.
    pub timing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// A pipeline with its services resolved.
#[derive(Clone)]
pub enum Pipeline {
    Baseline {
        translator: Arc<dyn Translator>,
    },
    Oracle {
        translator: Arc<dyn Translator>,
    },
    CascadeNative {
        model: Arc<RestorerModel>,
        inventory: PunctuationInventory,
        translator: Arc<dyn Translator>,
    },
    CascadeBackend {
        restorer: Arc<dyn TextRestorer>,
        translator: Arc<dyn Translator>,
    },
    Direct {
        translator: Arc<dyn Translator>,
    },
    LlmPrompting {
        strategy: Strategy,
        chat: Arc<dyn ChatModel>,
        /// `None` picks the default shots for three-shot strategies.
        shot_ids: Option<Vec<String>>,
        templates: TemplateSet,
    },
}

impl Pipeline {
    pub fn kind(&self) -> &'static str {
        match self {
            Pipeline::Baseline { .. } => "baseline",
            Pipeline::Oracle { .. } => "oracle",
            Pipeline::CascadeNative { .. } => "cascade_native",
            Pipeline::CascadeBackend { .. } => "cascade_backend",
            Pipeline::Direct { .. } => "direct",
            Pipeline::LlmPrompting { .. } => "llm_prompting",
        }
    }

    fn uses_meant_input(&self) -> bool {
        match self {
            Pipeline::Oracle { .. } => true,
            Pipeline::LlmPrompting { strategy, .. } => strategy.uses_meant_input(),
            _ => false,
        }
    }
}

/// Shared settings for running pipelines.
#[derive(Clone)]
pub struct RunOptions {
    pub metrics: MetricConfig,
    pub source_lang: LanguageTag,
    pub target_lang: LanguageTag,
    pub embedder: Option<Arc<dyn Embedder>>,
    pub scorer: Option<Arc<dyn PairScorer>>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            metrics: MetricConfig::default(),
            source_lang: LanguageTag::english(),
            target_lang: LanguageTag::marathi(),
            embedder: None,
            scorer: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub label: String,
    pub records: Vec<RunRecord>,
    /// Scores over the `ok` records; `None` when there are none.
    pub report: Option<MetricReport>,
    pub failures: usize,
    pub status: RunStatus,
    pub error: Option<String>,
}

struct Slot {
    restored: Option<String>,
    hypothesis: Option<String>,
    status: RecordStatus,
    timing: f64,
}

impl Slot {
    fn fail(&mut self, status: RecordStatus, id: &str, why: &str) {
        log::warn!("instance {id}: {why}");
        self.status = status;
        self.hypothesis = None;
    }
}

fn should_split(e: &BackendError) -> bool {
    !matches!(e, BackendError::Unavailable { .. } | BackendError::Config(_))
}

/// Runs `call` on the whole batch; if the batch fails for a reason that
/// might be input-specific, retries item by item to pin the failure down.
fn batch_then_each<T>(
    inputs: &[String],
    call: impl Fn(&[String]) -> Result<Vec<T>, BackendError>,
) -> Vec<(Result<T, String>, f64)> {
    let t0 = Instant::now();
    let res = call(inputs).and_then(|out| {
        if out.len() == inputs.len() {
            Ok(out)
        } else {
            Err(BackendError::Protocol(format!("{} inputs produced {} outputs", inputs.len(), out.len())))
        }
    });
    match res {
        Ok(out) => {
            let share = t0.elapsed().as_secs_f64() / inputs.len() as f64;
            out.into_iter().map(|v| (Ok(v), share)).collect()
        }
        Err(e) if should_split(&e) && inputs.len() > 1 => {
            log::warn!("batch of {} failed ({e}); retrying item by item", inputs.len());
            inputs
                .iter()
                .map(|x| {
                    let t = Instant::now();
                    let r = match call(std::slice::from_ref(x)) {
                        Ok(mut v) if v.len() == 1 => Ok(v.remove(0)),
                        Ok(v) => Err(format!("1 input produced {} outputs", v.len())),
                        Err(e) => Err(e.to_string()),
                    };
                    (r, t.elapsed().as_secs_f64())
                })
                .collect()
        }
        Err(e) => {
            let share = t0.elapsed().as_secs_f64() / inputs.len() as f64;
            let msg = e.to_string();
            inputs.iter().map(|_| (Err(msg.clone()), share)).collect()
        }
    }
}

/// Translates the `ok` slots whose current text is in `texts`.
fn translate_stage(
    translator: &dyn Translator,
    opts: &RunOptions,
    eval: &[BenchmarkInstance],
    texts: &[String],
    slots: &mut [Slot],
) {
    let live: Vec<usize> = (0..slots.len()).filter(|&i| slots[i].status == RecordStatus::Ok).collect();
    if live.is_empty() {
        return;
    }
    let inputs: Vec<String> = live.iter().map(|&i| texts[i].clone()).collect();
    let results = batch_then_each(&inputs, |b| translator.translate_batch(b, &opts.source_lang, &opts.target_lang));
    for (&i, (r, t)) in live.iter().zip(results) {
        slots[i].timing += t;
        match r {
            Ok(h) if !h.trim().is_empty() => slots[i].hypothesis = Some(h),
            Ok(_) => slots[i].fail(RecordStatus::BackendFailed, &eval[i].id, "empty translation"),
            Err(e) => slots[i].fail(RecordStatus::BackendFailed, &eval[i].id, &e),
        }
    }
}

/// Runs one pipeline and scores its successful outputs against
/// `marathi_meant`.
///
/// LLM pipelines drop their shot instances from `benchmark` first, so they
/// produce one record per remaining instance.
pub fn run_pipeline(
    label: &str,
    pipeline: &Pipeline,
    benchmark: &[BenchmarkInstance],
    opts: &RunOptions,
) -> Result<PipelineOutcome, RunnerError> {
    if benchmark.is_empty() {
        return Err(RunnerError::EmptyBenchmark);
    }
    let (eval, shots) = match pipeline {
        Pipeline::LlmPrompting { strategy, shot_ids, .. } => {
            let ids = match shot_ids {
                Some(ids) => ids.clone(),
                None if strategy.shot_count() > 0 => default_shot_ids(benchmark)?,
                None => Vec::new(),
            };
            let (shots, eval) = select_and_exclude_shots(benchmark, &ids)?;
            let shots = if strategy.shot_count() > 0 { shots } else { Vec::new() };
            (eval, shots)
        }
        _ => (benchmark.to_vec(), Vec::new()),
    };
    if eval.is_empty() {
        return Err(RunnerError::EmptyBenchmark);
    }

    let meant = pipeline.uses_meant_input();
    let inputs: Vec<String> =
        eval.iter().map(|b| if meant { b.english_meant.clone() } else { b.english_written.clone() }).collect();
    let mut slots: Vec<Slot> = eval
        .iter()
        .map(|_| Slot { restored: None, hypothesis: None, status: RecordStatus::Ok, timing: 0.0 })
        .collect();

    match pipeline {
        Pipeline::Baseline { translator } | Pipeline::Oracle { translator } | Pipeline::Direct { translator } => {
            translate_stage(translator.as_ref(), opts, &eval, &inputs, &mut slots);
        }
        Pipeline::CascadeNative { model, inventory, translator } => {
            for (i, x) in inputs.iter().enumerate() {
                let t = Instant::now();
                match restore(model, x, inventory) {
                    Ok(r) => slots[i].restored = Some(r),
                    Err(e) => slots[i].fail(RecordStatus::BackendFailed, &eval[i].id, &e.to_string()),
                }
                slots[i].timing += t.elapsed().as_secs_f64();
            }
            let restored: Vec<String> = slots.iter().map(|s| s.restored.clone().unwrap_or_default()).collect();
            translate_stage(translator.as_ref(), opts, &eval, &restored, &mut slots);
        }
        Pipeline::CascadeBackend { restorer, translator } => {
            let results = batch_then_each(&inputs, |b| restorer.restore_via_backend(b));
            for (i, (r, t)) in results.into_iter().enumerate() {
                slots[i].timing += t;
                match r {
                    Ok(s) if !s.trim().is_empty() => slots[i].restored = Some(s),
                    Ok(_) => slots[i].fail(RecordStatus::BackendFailed, &eval[i].id, "empty restoration"),
                    Err(e) => slots[i].fail(RecordStatus::BackendFailed, &eval[i].id, &e),
                }
            }
            let restored: Vec<String> = slots.iter().map(|s| s.restored.clone().unwrap_or_default()).collect();
            translate_stage(translator.as_ref(), opts, &eval, &restored, &mut slots);
        }
        Pipeline::LlmPrompting { strategy, chat, templates, .. } => {
            for (i, x) in inputs.iter().enumerate() {
                let t = Instant::now();
                let id = &eval[i].id;
                let prompt = templates.render(*strategy, x, &shots)?;
                match chat.chat_complete(&prompt) {
                    Err(e) => slots[i].fail(RecordStatus::BackendFailed, id, &e.to_string()),
                    Ok(raw) => match parse_reply(*strategy, &raw) {
                        Ok(p) => {
                            if !p.is_devanagari() {
                                log::warn!("instance {id}: Marathi span contains non-Devanagari letters");
                            }
                            slots[i].restored = p.restored_english;
                            slots[i].hypothesis = Some(p.marathi);
                        }
                        Err(e) => slots[i].fail(RecordStatus::ParseFailed, id, &e.to_string()),
                    },
                }
                slots[i].timing += t.elapsed().as_secs_f64();
            }
        }
    }

    let records: Vec<RunRecord> = eval
        .iter()
        .zip(inputs)
        .zip(slots)
        .map(|((b, input), s)| RunRecord {
            instance_id: b.id.clone(),
            input_sent: input,
            restored: s.restored,
            hypothesis: if s.status == RecordStatus::Ok { s.hypothesis.unwrap_or_default() } else { String::new() },
            status: s.status,
            timing: s.timing,
        })
        .collect();

    let ok: Vec<usize> = (0..records.len()).filter(|&i| records[i].status == RecordStatus::Ok).collect();
    let failures = records.len() - ok.len();
    let mut error = None;
    let report = if ok.is_empty() {
        error = Some("every instance failed".to_string());
        None
    } else {
        let hyps: Vec<String> = ok.iter().map(|&i| records[i].hypothesis.clone()).collect();
        let refs: Vec<String> = ok.iter().map(|&i| eval[i].marathi_meant.clone()).collect();
        let srcs: Vec<String> = ok.iter().map(|&i| eval[i].english_meant.clone()).collect();
        let backends = ReportBackends { embedder: opts.embedder.as_deref(), scorer: opts.scorer.as_deref() };
        match build_report(label, Some(&srcs), &hyps, &refs, backends, &opts.metrics) {
            Ok(r) => Some(r),
            Err(e) => {
                log::error!("{label}: scoring failed: {e}");
                error = Some(format!("scoring failed: {e}"));
                None
            }
        }
    };
    let status = if 2 * failures > records.len() || report.is_none() {
        if error.is_none() {
            error = Some(format!("{failures} of {} instances failed", records.len()));
        }
        RunStatus::Failed
    } else {
        RunStatus::Ok
    };
    Ok(PipelineOutcome { label: label.to_string(), records, report, failures, status, error })
}
