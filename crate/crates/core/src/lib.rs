//! Punctuation robustness toolkit for English-to-Marathi machine translation.
//!
//! - [`corpus`]: benchmark files, punctuation stripping, training-corpus variants
//! - [`restorer`]: token-classification punctuation restorer
//! - [`backends`]: HTTP clients for model services, mocks, a local stub server
//! - [`metrics`]: BLEU, chrF++, chrF2++, embedding cosine, report rows
//! - [`prompts`]: LLM prompt templates and reply parsing
//! - [`runner`]: experiment pipelines, run records, report tables

pub mod backends;
pub mod corpus;
pub mod metrics;
pub mod prompts;
pub mod restorer;
pub mod runner;
