use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

static PUNCT_AFTER_NON_DIGIT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(\P{N})(\p{P})").unwrap());
static PUNCT_BEFORE_NON_DIGIT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(\p{P})(\P{N})").unwrap());
static SYMBOL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(\p{S})").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tokenizer {
    /// Language-independent punctuation splitting (mteval-v14 international rules).
    #[default]
    Intl,
    Whitespace,
}

impl Tokenizer {
    pub fn tokenize(self, text: &str) -> Vec<String> {
        match self {
            Tokenizer::Intl => tokenize_intl(text),
            Tokenizer::Whitespace => text.split_whitespace().map(str::to_string).collect(),
        }
    }
}

/// Splits punctuation and symbols off words, then splits on whitespace.
///
/// A punctuation character is split off unless each of its neighbours is a
/// digit or the string boundary, so `3.14` stays whole. Letters, including
/// Devanagari combining signs, are never split.
pub fn tokenize_intl(text: &str) -> Vec<String> {
    let s = PUNCT_AFTER_NON_DIGIT.replace_all(text, "$1 $2 ");
    let s = PUNCT_BEFORE_NON_DIGIT.replace_all(&s, " $1 $2");
    let s = SYMBOL.replace_all(&s, " $1 ");
    s.split_whitespace().map(str::to_string).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Vec<String> {
        tokenize_intl(s)
    }

    #[test]
    fn splits_punctuation() {
        assert_eq!(t("Hello, world!"), ["Hello", ",", "world", "!"]);
    }

    #[test]
    fn keeps_decimal() {
        assert_eq!(t("3.14"), ["3.14"]);
        assert_eq!(t("1,000 people."), ["1,000", "people", "."]);
    }

    #[test]
    fn devanagari_sentence() {
        assert_eq!(
            t("जे पाहतो, त्यावर विश्वास ठेवतो; जे ऐकतो, त्याची नोंद घेतो."),
            ["जे", "पाहतो", ",", "त्यावर", "विश्वास", "ठेवतो", ";", "जे", "ऐकतो", ",", "त्याची", "नोंद", "घेतो", "."]
        );
        assert_eq!(t("तो आला।"), ["तो", "आला", "।"]);
    }

    #[test]
    fn symbols_are_split() {
        assert_eq!(t("a+b $5"), ["a", "+", "b", "$", "5"]);
    }

    #[test]
    fn whitespace_tokenizer() {
        assert_eq!(Tokenizer::Whitespace.tokenize(" a,  b "), ["a,", "b"]);
    }
}
