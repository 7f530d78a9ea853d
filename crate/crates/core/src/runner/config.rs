use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Pipeline, RunnerError};
use crate::backends::{
    ChatModel, EchoChat, EndpointConfig, HttpBackend, LanguageTag, MockTranslator, TextRestorer, Translator,
};
use crate::corpus::{BenchmarkInstance, PunctuationInventory};
use crate::metrics::MetricConfig;
use crate::prompts::{Strategy, TemplateSet};
use crate::restorer::RestorerModel;

/// Translation service of a pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TranslatorRef {
    Http(EndpointConfig),
    Identity,
    /// `source<TAB>target` file.
    Lookup {
        table: PathBuf,
        #[serde(default)]
        passthrough: bool,
    },
    /// Maps each benchmark `english_meant` to its `marathi_meant`.
    BenchmarkLookup {
        #[serde(default)]
        passthrough: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChatRef {
    Http(EndpointConfig),
    Echo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PipelineSpec {
    Baseline {
        translate: TranslatorRef,
    },
    Oracle {
        translate: TranslatorRef,
    },
    CascadeNative {
        model_path: PathBuf,
        translate: TranslatorRef,
    },
    CascadeBackend {
        restore: EndpointConfig,
        translate: TranslatorRef,
    },
    Direct {
        translate: TranslatorRef,
        system_label: String,
    },
    LlmPrompting {
        strategy: Strategy,
        chat: ChatRef,
        /// Benchmark ids used as shots and excluded from scoring. Three-shot
        /// strategies default to the reference demonstrations.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shot_ids: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        templates_dir: Option<PathBuf>,
    },
}

impl PipelineSpec {
    pub fn default_label(&self) -> String {
        match self {
            PipelineSpec::Baseline { .. } => "baseline".into(),
            PipelineSpec::Oracle { .. } => "oracle".into(),
            PipelineSpec::CascadeNative { .. } => "cascade_native".into(),
            PipelineSpec::CascadeBackend { .. } => "cascade_backend".into(),
            PipelineSpec::Direct { system_label, .. } => system_label.clone(),
            PipelineSpec::LlmPrompting { strategy, .. } => format!("llm_{strategy}"),
        }
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let fix_tr = |t: &mut TranslatorRef| {
            if let TranslatorRef::Lookup { table, .. } = t {
                fix(table);
            }
        };
        match self {
            PipelineSpec::Baseline { translate } | PipelineSpec::Oracle { translate } => fix_tr(translate),
            PipelineSpec::CascadeBackend { translate, .. } | PipelineSpec::Direct { translate, .. } => fix_tr(translate),
            PipelineSpec::CascadeNative { model_path, translate } => {
                fix(model_path);
                fix_tr(translate);
            }
            PipelineSpec::LlmPrompting { templates_dir, .. } => {
                if let Some(d) = templates_dir {
                    fix(d);
                }
            }
        }
    }

    /// Builds the clients and models this pipeline names.
    pub fn resolve(&self, benchmark: &[BenchmarkInstance]) -> Result<Pipeline, RunnerError> {
        let tr = |t: &TranslatorRef| resolve_translator(t, benchmark);
        Ok(match self {
            PipelineSpec::Baseline { translate } => Pipeline::Baseline { translator: tr(translate)? },
            PipelineSpec::Oracle { translate } => Pipeline::Oracle { translator: tr(translate)? },
            PipelineSpec::CascadeNative { model_path, translate } => Pipeline::CascadeNative {
                model: Arc::new(RestorerModel::load(model_path)?),
                inventory: PunctuationInventory::default(),
                translator: tr(translate)?,
            },
            PipelineSpec::CascadeBackend { restore, translate } => Pipeline::CascadeBackend {
                restorer: Arc::new(HttpBackend::new(restore.clone())?) as Arc<dyn TextRestorer>,
                translator: tr(translate)?,
            },
            PipelineSpec::Direct { translate, .. } => Pipeline::Direct { translator: tr(translate)? },
            PipelineSpec::LlmPrompting { strategy, chat, shot_ids, templates_dir } => {
                let chat: Arc<dyn ChatModel> = match chat {
                    ChatRef::Http(ep) => Arc::new(HttpBackend::new(ep.clone())?),
                    ChatRef::Echo => Arc::new(EchoChat),
                };
                let templates = match templates_dir {
                    Some(d) => TemplateSet::from_dir(d)?,
                    None => TemplateSet::embedded(),
                };
                Pipeline::LlmPrompting { strategy: *strategy, chat, shot_ids: shot_ids.clone(), templates }
            }
        })
    }
}

fn resolve_translator(t: &TranslatorRef, benchmark: &[BenchmarkInstance]) -> Result<Arc<dyn Translator>, RunnerError> {
    Ok(match t {
        TranslatorRef::Http(ep) => Arc::new(HttpBackend::new(ep.clone())?),
        TranslatorRef::Identity => Arc::new(MockTranslator::identity()),
        TranslatorRef::Lookup { table, passthrough } => {
            Arc::new(MockTranslator::from_tsv(table)?.with_passthrough(*passthrough))
        }
        TranslatorRef::BenchmarkLookup { passthrough } => {
            let table: HashMap<String, String> =
                benchmark.iter().map(|b| (b.english_meant.clone(), b.marathi_meant.clone())).collect();
            Arc::new(MockTranslator::lookup(table).with_passthrough(*passthrough))
        }
    })
}

/// One `[[pipelines]]` entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(flatten)]
    pub spec: PipelineSpec,
}

impl PipelineConfig {
    pub fn new(label: impl Into<String>, spec: PipelineSpec) -> Self {
        Self { label: Some(label.into()), spec }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.spec.default_label())
    }
}

fn default_seed() -> u64 {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub benchmark_path: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "LanguageTag::english")]
    pub source_lang: LanguageTag,
    #[serde(default = "LanguageTag::marathi")]
    pub target_lang: LanguageTag,
    #[serde(default)]
    pub metrics: MetricConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embed: Option<EndpointConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scorer: Option<EndpointConfig>,
    pub pipelines: Vec<PipelineConfig>,
}

/// Directory-safe form of a pipeline label.
pub fn label_dir(label: &str) -> String {
    let dir: String =
        label.chars().map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' }).collect();
    if dir.chars().all(|c| c == '.') {
        dir.replace('.', "_")
    } else {
        dir
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunnerError> {
        let cfg: Self = toml::from_str(text).map_err(|e| RunnerError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML file; relative paths inside resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, RunnerError> {
        let text = std::fs::read_to_string(path).map_err(|source| RunnerError::Io { path: path.to_path_buf(), source })?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.rebase(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn rebase(&mut self, base: &Path) {
        for p in [&mut self.benchmark_path, &mut self.output_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        for pc in &mut self.pipelines {
            pc.spec.rebase(base);
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), RunnerError> {
        if self.pipelines.is_empty() {
            return Err(RunnerError::Config("no pipelines configured".into()));
        }
        let mut labels = HashSet::new();
        let mut dirs = HashSet::new();
        for pc in &self.pipelines {
            let label = pc.label();
            if label.trim().is_empty() {
                return Err(RunnerError::Config("pipeline label is empty".into()));
            }
            if !labels.insert(label.clone()) || !dirs.insert(label_dir(&label)) {
                return Err(RunnerError::Config(format!("duplicate pipeline label {label:?}")));
            }
            if let PipelineSpec::LlmPrompting { strategy, shot_ids: Some(ids), .. } = &pc.spec {
                if strategy.shot_count() > 0 && ids.len() != strategy.shot_count() {
                    return Err(RunnerError::Config(format!(
                        "{label}: {strategy} needs {} shot ids, got {}",
                        strategy.shot_count(),
                        ids.len()
                    )));
                }
            }
        }
        self.metrics.validate()?;
        for ep in self.embed.iter().chain(&self.scorer) {
            ep.validate()?;
        }
        Ok(())
    }
}
