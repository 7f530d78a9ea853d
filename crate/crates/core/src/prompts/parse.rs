use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{PromptError, Strategy};

pub const RESTORE_MARKER: &str = "Step 1 (Restoration):";
pub const TRANSLATE_MARKER: &str = "Step 2 (Translation):";
pub const DIRECT_MARKER: &str = "Marathi Translation (Devanagari Script):";

// A line that opens a new labeled field ends the current span.
static LABELED_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^[\s*_#>]*(Step \d+ \([^)\n]*\)|Reasoning|Explanation|Note|Input English|English Meant|English \((Meant|Written)\)|Marathi Translation[^:\n]*)[*_]*\s*:",
    )
    .unwrap()
});

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedReply {
    pub restored_english: Option<String>,
    pub marathi: String,
    pub raw: String,
}

impl ParsedReply {
    /// True when every letter of the Marathi span is Devanagari.
    pub fn is_devanagari(&self) -> bool {
        self.marathi
            .chars()
            .filter(|c| c.is_alphabetic())
            .all(|c| matches!(c, '\u{0900}'..='\u{097F}' | '\u{A8E0}'..='\u{A8FF}'))
    }
}

fn trim_markup(mut s: &str) -> &str {
    loop {
        let before = s;
        s = s.trim();
        if let Some(rest) = s.strip_prefix("```") {
            // drop an info string such as ```text
            s = match rest.find('\n') {
                Some(nl) if rest[..nl].chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') => &rest[nl + 1..],
                _ => rest,
            };
        }
        s = s.strip_suffix("```").unwrap_or(s);
        s = s.trim_matches(|c: char| c == '*' || c == '_' || c == '`' || c.is_whitespace());
        if s == before {
            return s;
        }
    }
}

fn span_after_last(raw: &str, marker: &'static str) -> Result<String, PromptError> {
    let start = raw
        .rfind(marker)
        .ok_or_else(|| PromptError::MissingMarker { marker, raw: raw.to_string() })?
        + marker.len();
    let rest = &raw[start..];
    let mut end = rest.len();
    let mut offset = rest.find('\n').map_or(rest.len(), |i| i + 1);
    while offset < rest.len() {
        let line_end = rest[offset..].find('\n').map_or(rest.len(), |i| offset + i + 1);
        if LABELED_LINE.is_match(&rest[offset..line_end]) {
            end = offset;
            break;
        }
        offset = line_end;
    }
    let span = trim_markup(&rest[..end]);
    if span.is_empty() {
        return Err(PromptError::EmptySpan { marker, raw: raw.to_string() });
    }
    Ok(span.to_string())
}

/// Extracts the answer spans from a model reply.
///
/// Each span starts after the last occurrence of its marker and runs to the
/// next labeled line or the end of the reply, so prompt echoes are skipped.
pub fn parse_reply(strategy: Strategy, raw: &str) -> Result<ParsedReply, PromptError> {
    if raw.trim().is_empty() {
        return Err(PromptError::EmptyReply);
    }
    let (restored_english, marathi) = if strategy.is_restore_then_translate() {
        (Some(span_after_last(raw, RESTORE_MARKER)?), span_after_last(raw, TRANSLATE_MARKER)?)
    } else {
        (None, span_after_last(raw, DIRECT_MARKER)?)
    };
    Ok(ParsedReply { restored_english, marathi, raw: raw.to_string() })
}
