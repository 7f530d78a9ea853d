//! Clients for external model services and deterministic stand-ins.
//!
//! Every service speaks the same small JSON-over-HTTP protocol (see
//! [`wire`]). [`HttpBackend`] is the real client; [`MockTranslator`],
//! [`EchoChat`] and [`ScriptedChat`] replace it in tests. With the
//! `stub-server` feature, [`stub::StubServer`] serves the protocol locally.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod http;
mod mock;
#[cfg(feature = "stub-server")]
pub mod stub;
pub mod wire;

pub use http::HttpBackend;
pub use mock::{EchoChat, MockMode, MockTranslator, ScriptedChat};

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend unavailable after {attempts} attempt(s): {last}")]
    Unavailable { attempts: u32, last: String },
    #[error("backend returned HTTP {status}: {message}")]
    Http { status: u16, message: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid endpoint configuration: {0}")]
    Config(String),
    #[error("no mapping for source {0:?}")]
    Unmapped(String),
}

impl BackendError {
    /// True for failures of the reply rather than of the caller's input.
    pub fn is_protocol(&self) -> bool {
        matches!(self, BackendError::Http { .. } | BackendError::Protocol(_))
    }
}

fn default_timeout() -> f64 {
    30.0
}
fn default_retries() -> u32 {
    2
}
fn default_backoff() -> f64 {
    0.25
}
fn default_parallel() -> usize {
    4
}
fn default_batch() -> usize {
    16
}

/// Where and how to reach one backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub base_url: String,
    /// Per-request timeout in seconds.
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Backoff before the first retry, in seconds; doubles on each retry.
    #[serde(default = "default_backoff")]
    pub retry_backoff_secs: f64,
    /// Name of the environment variable holding a bearer token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_token_env: Option<String>,
    #[serde(default = "default_parallel")]
    pub max_parallel: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            retry_backoff_secs: default_backoff(),
            auth_token_env: None,
            max_parallel: default_parallel(),
            batch_size: default_batch(),
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(BackendError::Config(format!("base_url must be an http(s) URL, got {:?}", self.base_url)));
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(BackendError::Config("timeout must be positive".into()));
        }
        if !(self.retry_backoff_secs >= 0.0 && self.retry_backoff_secs.is_finite()) {
            return Err(BackendError::Config("retry_backoff must be non-negative".into()));
        }
        if self.max_parallel == 0 {
            return Err(BackendError::Config("max_parallel must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(BackendError::Config("batch_size must be at least 1".into()));
        }
        if let Some(var) = &self.auth_token_env {
            if var.is_empty() {
                return Err(BackendError::Config("auth_token_env is empty".into()));
            }
        }
        Ok(())
    }
}

/// Language code with a script suffix, e.g. `eng_Latn`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguageTag(String);

impl LanguageTag {
    pub fn new(code: &str) -> Result<Self, BackendError> {
        let ok = code.split_once('_').is_some_and(|(lang, script)| {
            !lang.is_empty()
                && lang.chars().all(|c| c.is_ascii_lowercase())
                && script.len() == 4
                && script.chars().next().is_some_and(|c| c.is_ascii_uppercase())
                && script.chars().skip(1).all(|c| c.is_ascii_lowercase())
        });
        if ok {
            Ok(Self(code.to_string()))
        } else {
            Err(BackendError::Config(format!("invalid language tag {code:?}, expected e.g. eng_Latn")))
        }
    }

    pub fn english() -> Self {
        Self("eng_Latn".into())
    }

    pub fn marathi() -> Self {
        Self("mar_Deva".into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for LanguageTag {
    type Err = BackendError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl TryFrom<String> for LanguageTag {
    type Error = BackendError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::new(&s)
    }
}

impl From<LanguageTag> for String {
    fn from(t: LanguageTag) -> String {
        t.0
    }
}

pub trait Translator: Send + Sync {
    fn translate_batch(&self, sources: &[String], src: &LanguageTag, tgt: &LanguageTag) -> Result<Vec<String>, BackendError>;
}

/// Text-to-text punctuation restoration.
pub trait TextRestorer: Send + Sync {
    fn restore_via_backend(&self, texts: &[String]) -> Result<Vec<String>, BackendError>;
}

pub trait Embedder: Send + Sync {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError>;
}

/// Learned scorer over (source, hypothesis, reference) triples.
pub trait PairScorer: Send + Sync {
    fn score_pairs(&self, sources: &[String], hypotheses: &[String], references: &[String]) -> Result<Vec<f64>, BackendError>;
}

pub trait ChatModel: Send + Sync {
    fn chat_complete(&self, prompt: &str) -> Result<String, BackendError>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn language_tags() {
        assert!(LanguageTag::new("eng_Latn").is_ok());
        assert!(LanguageTag::new("mar_Deva").is_ok());
        for bad in ["", "eng", "eng_", "_Latn", "eng_latn", "ENG_Latn", "eng_Latin"] {
            assert!(LanguageTag::new(bad).is_err(), "{bad}");
        }
        let t: LanguageTag = serde_json::from_str("\"mar_Deva\"").unwrap();
        assert_eq!(t, LanguageTag::marathi());
        assert!(serde_json::from_str::<LanguageTag>("\"x\"").is_err());
    }

    #[test]
    fn endpoint_defaults_and_validation() {
        let ep: EndpointConfig = toml::from_str("base_url = \"http://127.0.0.1:8080\"").unwrap();
        assert_eq!(ep, EndpointConfig::new("http://127.0.0.1:8080"));
        assert_eq!((ep.batch_size, ep.max_parallel), (16, 4));
        ep.validate().unwrap();
        for bad in [
            EndpointConfig { timeout_secs: 0.0, ..ep.clone() },
            EndpointConfig { max_parallel: 0, ..ep.clone() },
            EndpointConfig { batch_size: 0, ..ep.clone() },
            EndpointConfig { base_url: "localhost".into(), ..ep.clone() },
            EndpointConfig { auth_token_env: Some(String::new()), ..ep.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
        assert!(toml::from_str::<EndpointConfig>("base_url = \"http://x\"\nbogus = 1").is_err());
    }
}
