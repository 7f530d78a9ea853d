//! Native token-classification punctuation restorer.
//!
//! Every token owns the slot right after it; a slot is labelled with the
//! mark that follows the token (`NONE` when nothing does). Labels are
//! derived from punctuated text, learned by an averaged perceptron over
//! sparse indicator features, and re-inserted by [`apply_labels`].

use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::{strip_punctuation, PunctuationInventory};

mod eval;
mod features;
mod io;
mod label;
mod model;

pub use eval::{evaluate_restorer, score_labels, ClassScores, RestorerEvaluation};
pub use features::{extract_features, FeatureVector, BOUNDARY};
pub use io::{FORMAT_NAME, FORMAT_VERSION};
pub use label::{LabelSet, PunctLabel};
pub use model::{train, RestorerModel, TrainConfig};

#[derive(Debug, Error)]
pub enum RestorerError {
    #[error("input has no tokens after stripping punctuation")]
    EmptyInput,
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("label {0} is not in the label set")]
    UnknownLabel(String),
    #[error("model is not trained")]
    Untrained,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("token {0:?} is empty or contains whitespace")]
    BadToken(String),
    #[error("model file format version {found} is not supported (expected {expected})")]
    FormatVersion { expected: u32, found: u32 },
    #[error("model file line {line}: {message}")]
    ModelParse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Punctuation-free tokens with one label per slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    tokens: Vec<String>,
    labels: Vec<PunctLabel>,
}

impl LabeledSentence {
    pub fn new(tokens: Vec<String>, labels: Vec<PunctLabel>) -> Result<Self, RestorerError> {
        if tokens.len() != labels.len() {
            return Err(RestorerError::LengthMismatch { expected: tokens.len(), found: labels.len() });
        }
        if tokens.is_empty() {
            return Err(RestorerError::EmptyInput);
        }
        if let Some(t) = tokens.iter().find(|t| t.is_empty() || t.chars().any(char::is_whitespace)) {
            return Err(RestorerError::BadToken(t.clone()));
        }
        Ok(Self { tokens, labels })
    }

    /// All-`NONE` labels for the given tokens.
    pub fn unlabeled(tokens: Vec<String>) -> Result<Self, RestorerError> {
        let labels = vec![PunctLabel::None; tokens.len()];
        Self::new(tokens, labels)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn labels(&self) -> &[PunctLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Splits punctuated text into tokens and slot labels.
///
/// Tokens are the whitespace tokens of the stripped text. A slot takes the
/// first inventory mark between its token and the next one; later marks in
/// the same gap are dropped, and a first mark outside the label set yields
/// `NONE`. Marks before the first token are ignored.
pub fn derive_labels(
    punctuated: &str,
    inventory: &PunctuationInventory,
    label_set: &LabelSet,
) -> Result<LabeledSentence, RestorerError> {
    let chars: Vec<char> = punctuated.chars().collect();
    let removed = inventory.removal_mask(&chars);
    let mut tokens: Vec<String> = Vec::new();
    let mut labels: Vec<PunctLabel> = Vec::new();
    let mut decided: Vec<bool> = Vec::new();
    let mut current = String::new();

    for (&c, &is_mark) in chars.iter().zip(&removed) {
        if c.is_whitespace() || is_mark {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
                labels.push(PunctLabel::None);
                decided.push(false);
            }
            if is_mark {
                if let (Some(label), Some(done)) = (labels.last_mut(), decided.last_mut()) {
                    if !*done {
                        *label = label_set.label_for_mark(c);
                        *done = true;
                    }
                }
            }
        } else {
            current.push(c);
        }
    }
    if !current.is_empty() {
        tokens.push(current);
        labels.push(PunctLabel::None);
    }
    if tokens.is_empty() {
        return Err(RestorerError::EmptyInput);
    }
    LabeledSentence::new(tokens, labels)
}

/// Joins tokens with single spaces, attaching each non-`NONE` mark directly
/// after its token.
pub fn apply_labels(sent: &LabeledSentence) -> String {
    let mut out = String::new();
    for (i, (tok, label)) in sent.tokens.iter().zip(&sent.labels).enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(tok);
        if let Some(c) = label.surface() {
            out.push(c);
        }
    }
    out
}

/// Strips every inventory mark from `raw_text` and re-punctuates it with the model.
pub fn restore(model: &RestorerModel, raw_text: &str, inventory: &PunctuationInventory) -> Result<String, RestorerError> {
    let stripped = strip_punctuation(raw_text, inventory);
    let tokens: Vec<String> = stripped.split_whitespace().map(str::to_string).collect();
    if tokens.is_empty() {
        return Err(RestorerError::EmptyInput);
    }
    let labels = model.predict(&tokens)?;
    Ok(apply_labels(&LabeledSentence::new(tokens, labels)?))
}
