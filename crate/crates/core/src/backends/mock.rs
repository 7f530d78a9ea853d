use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BackendError, ChatModel, LanguageTag, Translator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockMode {
    Identity,
    Lookup,
}

/// Translator that either echoes its input or looks it up in a table.
#[derive(Debug, Clone, PartialEq)]
pub struct MockTranslator {
    mode: MockMode,
    table: Option<HashMap<String, String>>,
    passthrough: bool,
}

impl MockTranslator {
    pub fn new(mode: MockMode, table: Option<HashMap<String, String>>, passthrough: bool) -> Result<Self, BackendError> {
        if mode == MockMode::Lookup && table.is_none() {
            return Err(BackendError::Config("lookup mode requires a table".into()));
        }
        Ok(Self { mode, table, passthrough })
    }

    pub fn identity() -> Self {
        Self { mode: MockMode::Identity, table: None, passthrough: false }
    }

    pub fn lookup(table: HashMap<String, String>) -> Self {
        Self { mode: MockMode::Lookup, table: Some(table), passthrough: false }
    }

    pub fn from_pairs<I, S, T>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        Self::lookup(pairs.into_iter().map(|(s, t)| (s.into(), t.into())).collect())
    }

    /// Reads a two-column `source<TAB>target` file.
    pub fn from_tsv(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Config(format!("cannot read lookup table {}: {e}", path.display())))?;
        let mut table = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (s, t) = line.split_once('\t').ok_or_else(|| {
                BackendError::Config(format!("{}:{}: expected source<TAB>target", path.display(), n + 1))
            })?;
            table.insert(s.to_string(), t.to_string());
        }
        Ok(Self::lookup(table))
    }

    /// Unmapped sources come back unchanged instead of failing.
    pub fn with_passthrough(mut self, on: bool) -> Self {
        self.passthrough = on;
        self
    }

    pub fn mode(&self) -> MockMode {
        self.mode
    }

    fn one(&self, s: &str) -> Result<String, BackendError> {
        match (&self.mode, &self.table) {
            (MockMode::Identity, _) => Ok(s.to_string()),
            (MockMode::Lookup, Some(t)) => match t.get(s) {
                Some(v) => Ok(v.clone()),
                None if self.passthrough => Ok(s.to_string()),
                None => Err(BackendError::Unmapped(s.to_string())),
            },
            (MockMode::Lookup, None) => unreachable!("lookup mock without table"),
        }
    }
}

impl Translator for MockTranslator {
    fn translate_batch(&self, sources: &[String], _src: &LanguageTag, _tgt: &LanguageTag) -> Result<Vec<String>, BackendError> {
        if sources.is_empty() {
            return Err(BackendError::Precondition("translate: no inputs".into()));
        }
        sources.iter().map(|s| self.one(s)).collect()
    }
}

/// Chat model that returns the prompt.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoChat;

impl ChatModel for EchoChat {
    fn chat_complete(&self, prompt: &str) -> Result<String, BackendError> {
        if prompt.is_empty() {
            return Err(BackendError::Precondition("chat: empty prompt".into()));
        }
        Ok(prompt.to_string())
    }
}

type ReplyFn = dyn Fn(&str) -> Result<String, BackendError> + Send + Sync;

/// Chat model answering through a closure.
pub struct ScriptedChat(Box<ReplyFn>);

impl ScriptedChat {
    pub fn new(f: impl Fn(&str) -> Result<String, BackendError> + Send + Sync + 'static) -> Self {
        Self(Box::new(f))
    }

    pub fn constant(reply: impl Into<String>) -> Self {
        let reply = reply.into();
        Self::new(move |_| Ok(reply.clone()))
    }
}

impl fmt::Debug for ScriptedChat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScriptedChat(..)")
    }
}

impl ChatModel for ScriptedChat {
    fn chat_complete(&self, prompt: &str) -> Result<String, BackendError> {
        if prompt.is_empty() {
            return Err(BackendError::Precondition("chat: empty prompt".into()));
        }
        (self.0)(prompt)
    }
}
