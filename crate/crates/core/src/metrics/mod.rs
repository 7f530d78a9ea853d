//! Corpus BLEU, the chrF family, embedding cosine, and report rows.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{BackendError, Embedder, PairScorer};

mod bleu;
mod chrf;
mod ngram;
mod tokenize;

pub use bleu::{corpus_bleu, BleuScore};
pub use chrf::{chrf, ChrfScore};
pub use ngram::{NGramCounts, OrderStats};
pub use tokenize::{tokenize_intl, Tokenizer};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("hypotheses and references differ in length ({hyps} vs {refs})")]
    LengthMismatch { hyps: usize, refs: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid metric configuration: {0}")]
    InvalidConfig(String),
    #[error("embedding {index} has zero norm")]
    DegenerateEmbedding { index: usize },
    #[error("embedding {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("{column}: {source}")]
    Column {
        column: &'static str,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
}

impl MetricError {
    fn column(column: &'static str, source: impl std::error::Error + Send + Sync + 'static) -> Self {
        MetricError::Column { column, source: Box::new(source) }
    }
}

pub(crate) fn check_lengths(hyps: usize, refs: usize) -> Result<(), MetricError> {
    if hyps != refs {
        return Err(MetricError::LengthMismatch { hyps, refs });
    }
    if hyps == 0 {
        return Err(MetricError::EmptyCorpus);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub bleu_max_order: usize,
    pub chr_char_order: usize,
    pub chr_word_order: usize,
    pub beta: f64,
    pub tokenizer: Tokenizer,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { bleu_max_order: 4, chr_char_order: 6, chr_word_order: 2, beta: 2.0, tokenizer: Tokenizer::Intl }
    }
}

impl MetricConfig {
    /// chrF++ preset (beta = 1).
    pub fn chrf_pp() -> Self {
        Self { beta: 1.0, ..Self::default() }
    }

    /// chrF2++ preset (beta = 2).
    pub fn chrf2_pp() -> Self {
        Self { beta: 2.0, ..Self::default() }
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        Self { beta, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        if self.bleu_max_order == 0 || self.chr_char_order == 0 || self.chr_word_order == 0 {
            return Err(MetricError::InvalidConfig("n-gram orders must be at least 1".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(MetricError::InvalidConfig(format!("beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }
}

/// Mean cosine similarity over aligned embedding pairs.
pub fn cosine_metric(hyp: &[Vec<f64>], reference: &[Vec<f64>]) -> Result<f64, MetricError> {
    check_lengths(hyp.len(), reference.len())?;
    let dim = hyp[0].len();
    let mut sum = 0.0;
    for (i, (a, b)) in hyp.iter().zip(reference).enumerate() {
        for v in [a, b] {
            if v.len() != dim {
                return Err(MetricError::DimensionMismatch { index: i, expected: dim, found: v.len() });
            }
        }
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 || !na.is_finite() || !nb.is_finite() {
            return Err(MetricError::DegenerateEmbedding { index: i });
        }
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        sum += (dot / (na * nb)).clamp(-1.0, 1.0);
    }
    Ok(sum / hyp.len() as f64)
}

/// One experiment row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub system_name: String,
    pub bleu: f64,
    pub chrf_pp: f64,
    pub chrf2_pp: f64,
    pub cosine_embed: Option<f64>,
    pub learned_score: Option<f64>,
    pub n_instances: usize,
}

/// Optional model-backed columns.
#[derive(Default, Clone, Copy)]
pub struct ReportBackends<'a> {
    pub embedder: Option<&'a dyn Embedder>,
    pub scorer: Option<&'a dyn PairScorer>,
}

/// Scores a system's hypotheses against references.
///
/// `sources` feeds the learned scorer and is required only when one is given.
pub fn build_report(
    system_name: &str,
    sources: Option<&[String]>,
    hyps: &[String],
    refs: &[String],
    backends: ReportBackends<'_>,
    cfg: &MetricConfig,
) -> Result<MetricReport, MetricError> {
    check_lengths(hyps.len(), refs.len())?;
    let bleu = corpus_bleu(hyps, refs, cfg)?;
    if bleu.empty_hypotheses {
        log::warn!("{system_name}: every hypothesis is empty; BLEU is 0");
    }
    let chrf_pp = chrf(hyps, refs, &cfg.with_beta(1.0))?.score;
    let chrf2_pp = chrf(hyps, refs, &cfg.with_beta(2.0))?.score;

    let cosine_embed = match backends.embedder {
        Some(e) => {
            let hv = e.embed(hyps).map_err(|err| MetricError::column("cosine_embed", err))?;
            let rv = e.embed(refs).map_err(|err| MetricError::column("cosine_embed", err))?;
            if hv.first().map(Vec::len) != rv.first().map(Vec::len) {
                return Err(MetricError::column(
                    "cosine_embed",
                    BackendError::Protocol("hypothesis and reference embeddings differ in dimension".into()),
                ));
            }
            Some(cosine_metric(&hv, &rv).map_err(|err| MetricError::column("cosine_embed", err))?)
        }
        None => None,
    };
    let learned_score = match backends.scorer {
        Some(s) => {
            let src = sources.ok_or_else(|| {
                MetricError::column("learned_score", BackendError::Precondition("learned scorer needs sources".into()))
            })?;
            let scores = s.score_pairs(src, hyps, refs).map_err(|err| MetricError::column("learned_score", err))?;
            Some(scores.iter().sum::<f64>() / scores.len() as f64)
        }
        None => None,
    };

    Ok(MetricReport {
        system_name: system_name.to_string(),
        bleu: bleu.score,
        chrf_pp,
        chrf2_pp,
        cosine_embed,
        learned_score,
        n_instances: hyps.len(),
    })
}
