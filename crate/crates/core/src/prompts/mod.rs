//! Prompt templates for LLM translation, few-shot example handling, and
//! reply parsing.
//!
//! Templates are plain text with a `{sentence}` slot and, for the
//! three-shot strategies, an `{examples}` slot. Both are filled in a single
//! pass, so a sentence that itself contains `{examples}` is inserted
//! verbatim.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::LazyLock;

use regex::{Captures, Regex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{normalize_ws, strip_punctuation, BenchmarkInstance, PunctuationInventory};

mod parse;

pub use parse::{parse_reply, ParsedReply, DIRECT_MARKER, RESTORE_MARKER, TRANSLATE_MARKER};

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("{strategy} takes {expected} shot example(s), got {found}")]
    WrongShotCount { strategy: Strategy, expected: usize, found: usize },
    #[error("sentence is empty")]
    EmptySentence,
    #[error("invalid shot example: {0}")]
    InvalidShot(String),
    #[error("unknown shot id {0:?}")]
    UnknownShot(String),
    #[error("shot id {0:?} listed twice")]
    DuplicateShot(String),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("template {name}: {reason}")]
    Template { name: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("reply is empty")]
    EmptyReply,
    #[error("reply has no {marker:?} marker")]
    MissingMarker { marker: &'static str, raw: String },
    #[error("nothing follows the {marker:?} marker")]
    EmptySpan { marker: &'static str, raw: String },
}

impl PromptError {
    /// The model reply behind a parse failure.
    pub fn raw_reply(&self) -> Option<&str> {
        match self {
            PromptError::MissingMarker { raw, .. } | PromptError::EmptySpan { raw, .. } => Some(raw),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "zero_restore")]
    ZeroShotRestoreThenTranslate,
    #[serde(rename = "zero_direct")]
    ZeroShotDirect,
    #[serde(rename = "three_restore")]
    ThreeShotRestoreThenTranslate,
    #[serde(rename = "three_direct")]
    ThreeShotDirect,
    #[serde(rename = "oracle_direct")]
    OracleDirect,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::ZeroShotRestoreThenTranslate,
        Strategy::ZeroShotDirect,
        Strategy::ThreeShotRestoreThenTranslate,
        Strategy::ThreeShotDirect,
        Strategy::OracleDirect,
    ];

    /// Template file stem, also the name used in configs and on the CLI.
    pub fn template_name(self) -> &'static str {
        match self {
            Strategy::ZeroShotRestoreThenTranslate => "zero_restore",
            Strategy::ZeroShotDirect => "zero_direct",
            Strategy::ThreeShotRestoreThenTranslate => "three_restore",
            Strategy::ThreeShotDirect => "three_direct",
            Strategy::OracleDirect => "oracle_direct",
        }
    }

    pub fn is_restore_then_translate(self) -> bool {
        matches!(self, Strategy::ZeroShotRestoreThenTranslate | Strategy::ThreeShotRestoreThenTranslate)
    }

    pub fn shot_count(self) -> usize {
        match self {
            Strategy::ThreeShotRestoreThenTranslate | Strategy::ThreeShotDirect => 3,
            _ => 0,
        }
    }

    /// The oracle prompt is fed the punctuated sentence.
    pub fn uses_meant_input(self) -> bool {
        self == Strategy::OracleDirect
    }

    fn index(self) -> usize {
        Strategy::ALL.iter().position(|s| *s == self).expect("listed")
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.template_name())
    }
}

impl FromStr for Strategy {
    type Err = PromptError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.template_name() == s || st.template_name().replace('_', "-") == s)
            .ok_or_else(|| PromptError::UnknownStrategy(s.to_string()))
    }
}

/// An in-prompt demonstration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotExample {
    pub english_written: String,
    pub english_meant: String,
    pub marathi: String,
}

impl ShotExample {
    pub fn new(
        english_written: impl Into<String>,
        english_meant: impl Into<String>,
        marathi: impl Into<String>,
    ) -> Result<Self, PromptError> {
        let s = Self { english_written: english_written.into(), english_meant: english_meant.into(), marathi: marathi.into() };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        for (name, v) in [
            ("english_written", &self.english_written),
            ("english_meant", &self.english_meant),
            ("marathi", &self.marathi),
        ] {
            if v.trim().is_empty() {
                return Err(PromptError::InvalidShot(format!("{name} is empty")));
            }
        }
        let inv = PunctuationInventory::default();
        if strip_punctuation(&self.english_written, &inv) != strip_punctuation(&self.english_meant, &inv) {
            return Err(PromptError::InvalidShot(format!(
                "written and meant differ beyond punctuation: {:?} / {:?}",
                self.english_written, self.english_meant
            )));
        }
        Ok(())
    }
}

impl From<&BenchmarkInstance> for ShotExample {
    fn from(b: &BenchmarkInstance) -> Self {
        Self {
            english_written: b.english_written.clone(),
            english_meant: b.english_meant.clone(),
            marathi: b.marathi_meant.clone(),
        }
    }
}

/// Enumerated shot layout used inside the three-shot templates.
pub fn format_shots(shots: &[ShotExample]) -> String {
    shots
        .iter()
        .enumerate()
        .map(|(i, s)| {
            format!(
                "{}. Input English:\n{}\n\nEnglish Meant:\n{}\n\nMarathi Translation:\n{}",
                i + 1,
                s.english_written,
                s.english_meant,
                s.marathi
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

const EMBEDDED: [&str; 5] = [
    include_str!("../../templates/zero_restore.txt"),
    include_str!("../../templates/zero_direct.txt"),
    include_str!("../../templates/three_restore.txt"),
    include_str!("../../templates/three_direct.txt"),
    include_str!("../../templates/oracle_direct.txt"),
];

static SLOT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\{(sentence|examples)\}").unwrap());

/// One template per strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: [String; 5],
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::embedded()
    }
}

impl TemplateSet {
    /// The templates compiled into the library.
    pub fn embedded() -> Self {
        Self { templates: EMBEDDED.map(str::to_string) }
    }

    /// Reads `<dir>/<template_name>.txt` for every strategy.
    pub fn from_dir(dir: &Path) -> Result<Self, PromptError> {
        let mut templates: [String; 5] = Default::default();
        for st in Strategy::ALL {
            let path = dir.join(format!("{}.txt", st.template_name()));
            let text = std::fs::read_to_string(&path).map_err(|source| PromptError::Io { path, source })?;
            check_template(st, &text)?;
            templates[st.index()] = text;
        }
        Ok(Self { templates })
    }

    pub fn template(&self, strategy: Strategy) -> &str {
        &self.templates[strategy.index()]
    }

    pub fn render(&self, strategy: Strategy, sentence: &str, shots: &[ShotExample]) -> Result<String, PromptError> {
        if sentence.trim().is_empty() {
            return Err(PromptError::EmptySentence);
        }
        if shots.len() != strategy.shot_count() {
            return Err(PromptError::WrongShotCount { strategy, expected: strategy.shot_count(), found: shots.len() });
        }
        for s in shots {
            s.validate()?;
        }
        let examples = format_shots(shots);
        let out = SLOT.replace_all(self.template(strategy), |c: &Captures| match &c[1] {
            "sentence" => sentence.to_string(),
            _ => examples.clone(),
        });
        Ok(out.into_owned())
    }
}

fn check_template(st: Strategy, text: &str) -> Result<(), PromptError> {
    let bad = |reason: &str| PromptError::Template { name: st.template_name().into(), reason: reason.into() };
    if text.matches("{sentence}").count() != 1 {
        return Err(bad("needs exactly one {sentence} slot"));
    }
    let ex = text.matches("{examples}").count();
    match (st.shot_count(), ex) {
        (0, 0) | (3, 1) => Ok(()),
        (0, _) => Err(bad("zero-shot templates take no {examples} slot")),
        _ => Err(bad("three-shot templates need exactly one {examples} slot")),
    }
}

/// Renders with the embedded templates.
pub fn render_prompt(strategy: Strategy, sentence: &str, shots: &[ShotExample]) -> Result<String, PromptError> {
    TemplateSet::embedded().render(strategy, sentence, shots)
}

/// Splits `shot_ids` out of the benchmark.
///
/// Shots come back in `shot_ids` order; the evaluation set keeps benchmark
/// order.
pub fn select_and_exclude_shots(
    benchmark: &[BenchmarkInstance],
    shot_ids: &[String],
) -> Result<(Vec<ShotExample>, Vec<BenchmarkInstance>), PromptError> {
    let mut seen = HashSet::new();
    for id in shot_ids {
        if !seen.insert(id.as_str()) {
            return Err(PromptError::DuplicateShot(id.clone()));
        }
    }
    let shots = shot_ids
        .iter()
        .map(|id| {
            benchmark
                .iter()
                .find(|b| &b.id == id)
                .map(ShotExample::from)
                .ok_or_else(|| PromptError::UnknownShot(id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let eval = benchmark.iter().filter(|b| !seen.contains(b.id.as_str())).cloned().collect();
    Ok((shots, eval))
}

/// English (Meant) sides of the three demonstrations in the reference
/// few-shot prompts: colon, comma, semicolon.
pub const DEFAULT_SHOT_MEANT: [&str; 3] = [
    "These are the components required: motor brushes, bearings, and wiring.",
    "As the machine develops, the forms we use to record data from past projects will be amended.",
    "What we see, we believe; what we hear, we register.",
];

/// The three demonstrations of the reference few-shot prompts.
pub fn reference_shots() -> Vec<ShotExample> {
    let rows = [
        (
            "These are the components required motor brushes, bearings, and wiring.",
            DEFAULT_SHOT_MEANT[0],
            "आवश्यक असलेले घटक खालीलप्रमाणे आहेत: मोटार ब्रशेस, बेअरिंग्ज आणि वायरिंग.",
        ),
        (
            "As the machine develops the forms we use to record data from past projects will be amended.",
            DEFAULT_SHOT_MEANT[1],
            "जसजशी यंत्रणा विकसित होईल, तसतसे मागील प्रकल्पांतील डेटा रेकॉर्ड करण्यासाठी आम्ही वापरत असलेले फॉर्म्स सुधारित केले जातील.",
        ),
        (
            "What we see, we believe what we hear, we register",
            DEFAULT_SHOT_MEANT[2],
            "जे पाहतो, त्यावर विश्वास ठेवतो; जे ऐकतो, त्याची नोंद घेतो.",
        ),
    ];
    rows.iter().map(|&(w, m, t)| ShotExample { english_written: w.into(), english_meant: m.into(), marathi: t.into() }).collect()
}

/// Ids of the benchmark rows whose meant sentence matches
/// [`DEFAULT_SHOT_MEANT`], ignoring a trailing period.
pub fn default_shot_ids(benchmark: &[BenchmarkInstance]) -> Result<Vec<String>, PromptError> {
    let key = |s: &str| normalize_ws(s).trim_end_matches('.').to_string();
    DEFAULT_SHOT_MEANT
        .iter()
        .map(|m| {
            benchmark
                .iter()
                .find(|b| key(&b.english_meant) == key(m))
                .map(|b| b.id.clone())
                .ok_or_else(|| PromptError::UnknownShot(format!("<meant: {m}>")))
        })
        .collect()
}
