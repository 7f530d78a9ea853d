//! Benchmark and parallel-corpus data model, punctuation stripping, and the
//! four fine-tuning data variants.

use std::path::PathBuf;

use thiserror::Error;

mod benchmark;
mod inventory;
mod parallel;

pub use benchmark::{
    corpus_stats, load_benchmark, load_benchmark_with, parse_benchmark, save_benchmark, serialize_benchmark,
    BenchmarkFormat, BenchmarkInstance, LoadOptions, PUNCTUATION_TYPES, TSV_HEADER,
};
pub use inventory::{normalize_ws, strip_punctuation, PunctuationInventory, DEFAULT_INTRA_WORD_KEEP, DEFAULT_MARKS};
pub use parallel::{
    make_variant, read_parallel, write_parallel, CorpusMeta, ParallelCorpus, ParallelPair, VariantKind,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("bad header: expected {expected:?}, found {found:?}")]
    BadHeader { expected: String, found: String },
    #[error("instance {id}: {reason}")]
    Validation { id: String, reason: String },
    #[error("invalid punctuation inventory: {0}")]
    InvalidInventory(String),
    #[error("parallel pair has an empty side")]
    EmptyPair,
    #[error("variants must be built from a with-punctuation base, got {0}")]
    NotPunctuatedBase(VariantKind),
    #[error("unknown variant kind {0:?}")]
    UnknownVariant(String),
    #[error("source and target files differ in length ({sources} vs {targets} lines)")]
    Misaligned { sources: usize, targets: usize },
}
