use std::collections::BTreeSet;

use super::CorpusError;

/// Marks stripped from source text by default.
///
/// The Viram mark inventory (comma, colon, hyphen, parentheses, quotation
/// marks, em dash, question mark, semicolon, slash) plus sentence-final
/// `.`/`!`, the en dash, the ellipsis, and typographic quote variants.
pub const DEFAULT_MARKS: &[char] = &[
    '.', ',', ';', ':', '?', '!', '"', '\'', '(', ')', '\u{2014}', '\u{2013}', '-', '/', '\u{2026}',
    '\u{2018}', '\u{2019}', '\u{201C}', '\u{201D}',
];

/// Marks preserved when they sit between two letters (`don't`, `state-of-the-art`).
pub const DEFAULT_INTRA_WORD_KEEP: &[char] = &['\'', '\u{2019}', '-'];

/// The set of punctuation marks a stripping pass removes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PunctuationInventory {
    marks: BTreeSet<char>,
    intra_word_keep: BTreeSet<char>,
}

impl Default for PunctuationInventory {
    fn default() -> Self {
        Self {
            marks: DEFAULT_MARKS.iter().copied().collect(),
            intra_word_keep: DEFAULT_INTRA_WORD_KEEP.iter().copied().collect(),
        }
    }
}

impl PunctuationInventory {
    pub fn new(
        marks: impl IntoIterator<Item = char>,
        intra_word_keep: impl IntoIterator<Item = char>,
    ) -> Result<Self, CorpusError> {
        let marks: BTreeSet<char> = marks.into_iter().collect();
        let intra_word_keep: BTreeSet<char> = intra_word_keep.into_iter().collect();
        if marks.is_empty() {
            return Err(CorpusError::InvalidInventory("mark set is empty".into()));
        }
        if let Some(c) = intra_word_keep.iter().find(|c| !marks.contains(c)) {
            return Err(CorpusError::InvalidInventory(format!(
                "intra-word mark {c:?} is not in the mark set"
            )));
        }
        if let Some(c) = marks.iter().find(|c| c.is_whitespace() || c.is_alphanumeric()) {
            return Err(CorpusError::InvalidInventory(format!(
                "{c:?} cannot be used as a punctuation mark"
            )));
        }
        Ok(Self { marks, intra_word_keep })
    }

    /// Builds an inventory from mark strings; every entry must be a single character.
    pub fn from_strings<S: AsRef<str>>(marks: &[S], intra_word_keep: &[S]) -> Result<Self, CorpusError> {
        fn single(s: &str) -> Result<char, CorpusError> {
            let mut it = s.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(CorpusError::InvalidInventory(format!(
                    "mark {s:?} must be exactly one character"
                ))),
            }
        }
        let marks = marks.iter().map(|s| single(s.as_ref())).collect::<Result<Vec<_>, _>>()?;
        let keep = intra_word_keep
            .iter()
            .map(|s| single(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(marks, keep)
    }

    /// Same mark set with intra-word preservation switched off.
    pub fn without_intra_word_keep(&self) -> Self {
        Self { marks: self.marks.clone(), intra_word_keep: BTreeSet::new() }
    }

    pub fn marks(&self) -> impl Iterator<Item = char> + '_ {
        self.marks.iter().copied()
    }

    pub fn intra_word_keep(&self) -> impl Iterator<Item = char> + '_ {
        self.intra_word_keep.iter().copied()
    }

    pub fn contains(&self, c: char) -> bool {
        self.marks.contains(&c)
    }

    /// For each character, whether a stripping pass removes it.
    pub(crate) fn removal_mask(&self, chars: &[char]) -> Vec<bool> {
        chars
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if !self.marks.contains(&c) {
                    return false;
                }
                if self.intra_word_keep.contains(&c) {
                    let before = i.checked_sub(1).map(|j| chars[j].is_alphabetic()).unwrap_or(false);
                    let after = chars.get(i + 1).map(|n| n.is_alphabetic()).unwrap_or(false);
                    if before && after {
                        return false;
                    }
                }
                true
            })
            .collect()
    }
}

/// Collapses whitespace runs to single spaces and trims both ends.
pub fn normalize_ws(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Removes every inventory mark from `text`.
///
/// A removed mark behaves like a space, so `and/or` becomes `and or` rather
/// than `andor`. Whitespace is then normalized.
pub fn strip_punctuation(text: &str, inventory: &PunctuationInventory) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mask = inventory.removal_mask(&chars);
    let replaced: String = chars
        .iter()
        .zip(mask)
        .map(|(&c, removed)| if removed { ' ' } else { c })
        .collect();
    normalize_ws(&replaced)
}
