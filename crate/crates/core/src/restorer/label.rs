use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RestorerError;

/// The mark attached to the slot after a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PunctLabel {
    None,
    Comma,
    Period,
    Question,
    Colon,
    Semicolon,
    Exclamation,
}

impl PunctLabel {
    pub fn surface(self) -> Option<char> {
        match self {
            PunctLabel::None => None,
            PunctLabel::Comma => Some(','),
            PunctLabel::Period => Some('.'),
            PunctLabel::Question => Some('?'),
            PunctLabel::Colon => Some(':'),
            PunctLabel::Semicolon => Some(';'),
            PunctLabel::Exclamation => Some('!'),
        }
    }

    pub fn from_surface(c: char) -> Option<Self> {
        match c {
            ',' => Some(PunctLabel::Comma),
            '.' => Some(PunctLabel::Period),
            '?' => Some(PunctLabel::Question),
            ':' => Some(PunctLabel::Colon),
            ';' => Some(PunctLabel::Semicolon),
            '!' => Some(PunctLabel::Exclamation),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PunctLabel::None => "NONE",
            PunctLabel::Comma => "COMMA",
            PunctLabel::Period => "PERIOD",
            PunctLabel::Question => "QUESTION",
            PunctLabel::Colon => "COLON",
            PunctLabel::Semicolon => "SEMICOLON",
            PunctLabel::Exclamation => "EXCLAMATION",
        }
    }
}

impl fmt::Display for PunctLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PunctLabel {
    type Err = RestorerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "NONE" => PunctLabel::None,
            "COMMA" => PunctLabel::Comma,
            "PERIOD" => PunctLabel::Period,
            "QUESTION" => PunctLabel::Question,
            "COLON" => PunctLabel::Colon,
            "SEMICOLON" => PunctLabel::Semicolon,
            "EXCLAMATION" => PunctLabel::Exclamation,
            other => return Err(RestorerError::UnknownLabel(other.to_string())),
        })
    }
}

/// Ordered label inventory; `NONE` is always first, which makes it the
/// winner of score ties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PunctLabel>", into = "Vec<PunctLabel>")]
pub struct LabelSet(Vec<PunctLabel>);

impl Default for LabelSet {
    fn default() -> Self {
        Self(vec![
            PunctLabel::None,
            PunctLabel::Comma,
            PunctLabel::Period,
            PunctLabel::Question,
            PunctLabel::Colon,
            PunctLabel::Semicolon,
        ])
    }
}

impl LabelSet {
    /// Builds a set from the given labels, moving `NONE` to the front and
    /// dropping duplicates while keeping first-seen order otherwise.
    pub fn new(labels: impl IntoIterator<Item = PunctLabel>) -> Self {
        let mut out = vec![PunctLabel::None];
        for l in labels {
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Self(out)
    }

    pub fn labels(&self) -> &[PunctLabel] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, label: PunctLabel) -> Option<usize> {
        self.0.iter().position(|&l| l == label)
    }

    pub fn contains(&self, label: PunctLabel) -> bool {
        self.0.contains(&label)
    }

    /// The label a surface mark maps to, `NONE` for marks outside the set.
    pub fn label_for_mark(&self, c: char) -> PunctLabel {
        PunctLabel::from_surface(c).filter(|l| self.contains(*l)).unwrap_or(PunctLabel::None)
    }
}

impl TryFrom<Vec<PunctLabel>> for LabelSet {
    type Error = String;

    fn try_from(v: Vec<PunctLabel>) -> Result<Self, Self::Error> {
        if v.first() != Some(&PunctLabel::None) {
            return Err("label set must start with NONE".into());
        }
        let set = LabelSet::new(v.iter().copied());
        if set.len() != v.len() {
            return Err("label set contains duplicates".into());
        }
        Ok(set)
    }
}

impl From<LabelSet> for Vec<PunctLabel> {
    fn from(s: LabelSet) -> Self {
        s.0
    }
}
