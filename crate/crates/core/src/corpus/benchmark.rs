use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::{normalize_ws, strip_punctuation, CorpusError, PunctuationInventory};

/// Punctuation category labels used by the Viram benchmark.
pub const PUNCTUATION_TYPES: &[&str] = &[
    "Comma",
    "Colon",
    "Semi Colon",
    "Hyphen",
    "Parentheses",
    "Quotation Marks",
    "Em Dash",
    "Question Mark",
    "Slash",
];

pub const TSV_HEADER: &str = "id\tenglish_written\tenglish_meant\tmarathi_meant\tpunctuation_type";

const FIELDS: [&str; 5] = ["id", "english_written", "english_meant", "marathi_meant", "punctuation_type"];

/// One benchmark row: the sentence as written, the sentence as meant, and
/// the Marathi translation of the meant reading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkInstance {
    pub id: String,
    pub english_written: String,
    pub english_meant: String,
    pub marathi_meant: String,
    pub punctuation_type: String,
}

impl BenchmarkInstance {
    pub fn validate(&self, inventory: &PunctuationInventory, strict_types: bool) -> Result<(), CorpusError> {
        let fail = |reason: String| CorpusError::Validation { id: self.id.clone(), reason };
        if self.id.trim().is_empty() {
            return Err(fail("empty id".into()));
        }
        for (name, value) in [
            ("english_written", &self.english_written),
            ("english_meant", &self.english_meant),
            ("marathi_meant", &self.marathi_meant),
        ] {
            if value.trim().is_empty() {
                return Err(fail(format!("{name} is empty")));
            }
        }
        if strict_types && !PUNCTUATION_TYPES.contains(&self.punctuation_type.as_str()) {
            return Err(fail(format!("unknown punctuation type {:?}", self.punctuation_type)));
        }
        let written = normalize_ws(&strip_punctuation(&self.english_written, inventory));
        let meant = normalize_ws(&strip_punctuation(&self.english_meant, inventory));
        if written != meant {
            return Err(fail(format!(
                "written and meant forms differ beyond punctuation: {written:?} vs {meant:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkFormat {
    Tsv,
    Jsonl,
}

impl BenchmarkFormat {
    /// Guesses the format from the file extension; anything but `.jsonl`/`.json` is TSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => Self::Jsonl,
            _ => Self::Tsv,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub inventory: PunctuationInventory,
    /// Reject punctuation types outside [`PUNCTUATION_TYPES`].
    pub strict_types: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { inventory: PunctuationInventory::default(), strict_types: true }
    }
}

pub fn load_benchmark(path: &Path, format: BenchmarkFormat) -> Result<Vec<BenchmarkInstance>, CorpusError> {
    load_benchmark_with(path, format, &LoadOptions::default())
}

pub fn load_benchmark_with(
    path: &Path,
    format: BenchmarkFormat,
    options: &LoadOptions,
) -> Result<Vec<BenchmarkInstance>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    let instances = parse_benchmark(&text, format, options)?;
    log::info!("loaded {} benchmark instances from {}", instances.len(), path.display());
    Ok(instances)
}

pub fn parse_benchmark(
    text: &str,
    format: BenchmarkFormat,
    options: &LoadOptions,
) -> Result<Vec<BenchmarkInstance>, CorpusError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let instances = match format {
        BenchmarkFormat::Tsv => parse_tsv(text)?,
        BenchmarkFormat::Jsonl => parse_jsonl(text)?,
    };
    let mut seen = std::collections::HashSet::new();
    for inst in &instances {
        if !seen.insert(inst.id.as_str()) {
            return Err(CorpusError::Validation { id: inst.id.clone(), reason: "duplicate id".into() });
        }
        inst.validate(&options.inventory, options.strict_types)?;
    }
    Ok(instances)
}

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

fn parse_tsv(text: &str) -> Result<Vec<BenchmarkInstance>, CorpusError> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l.trim_end_matches('\r'),
            None => return Ok(Vec::new()),
        }
    };
    if header != TSV_HEADER {
        return Err(CorpusError::BadHeader { expected: TSV_HEADER.into(), found: header.into() });
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() > FIELDS.len() {
            return Err(CorpusError::Malformed {
                line: idx + 1,
                message: format!("expected {} fields, found {}", FIELDS.len(), cols.len()),
            });
        }
        let field = |i: usize| -> Result<String, CorpusError> {
            cols.get(i).map(|s| nfc(s.trim())).ok_or_else(|| CorpusError::Malformed {
                line: idx + 1,
                message: format!("missing field `{}`", FIELDS[i]),
            })
        };
        out.push(BenchmarkInstance {
            id: field(0)?,
            english_written: field(1)?,
            english_meant: field(2)?,
            marathi_meant: field(3)?,
            punctuation_type: field(4)?,
        });
    }
    Ok(out)
}

fn parse_jsonl(text: &str) -> Result<Vec<BenchmarkInstance>, CorpusError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| CorpusError::Malformed { line: idx + 1, message };
        let value: BTreeMap<String, serde_json::Value> =
            serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        let mut fields = Vec::with_capacity(FIELDS.len());
        for name in FIELDS {
            let v = match value.get(name) {
                Some(serde_json::Value::String(s)) => nfc(s.trim()),
                Some(serde_json::Value::Number(n)) if name == "id" => n.to_string(),
                Some(_) => return Err(malformed(format!("field `{name}` must be a string"))),
                None => return Err(malformed(format!("missing field `{name}`"))),
            };
            fields.push(v);
        }
        let mut it = fields.into_iter();
        out.push(BenchmarkInstance {
            id: it.next().unwrap(),
            english_written: it.next().unwrap(),
            english_meant: it.next().unwrap(),
            marathi_meant: it.next().unwrap(),
            punctuation_type: it.next().unwrap(),
        });
    }
    Ok(out)
}

pub fn serialize_benchmark(instances: &[BenchmarkInstance], format: BenchmarkFormat) -> Result<String, CorpusError> {
    let mut out = String::new();
    match format {
        BenchmarkFormat::Tsv => {
            out.push_str(TSV_HEADER);
            out.push('\n');
            for inst in instances {
                let cols = [
                    &inst.id,
                    &inst.english_written,
                    &inst.english_meant,
                    &inst.marathi_meant,
                    &inst.punctuation_type,
                ];
                if let Some(bad) = cols.iter().find(|c| c.contains(['\t', '\n', '\r'])) {
                    return Err(CorpusError::Validation {
                        id: inst.id.clone(),
                        reason: format!("field {bad:?} contains a tab or newline"),
                    });
                }
                out.push_str(&cols.map(|c| c.as_str()).join("\t"));
                out.push('\n');
            }
        }
        BenchmarkFormat::Jsonl => {
            for inst in instances {
                out.push_str(&serde_json::to_string(inst).expect("benchmark rows serialize"));
                out.push('\n');
            }
        }
    }
    Ok(out)
}

pub fn save_benchmark(path: &Path, instances: &[BenchmarkInstance], format: BenchmarkFormat) -> Result<(), CorpusError> {
    let text = serialize_benchmark(instances, format)?;
    fs::write(path, text).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })
}

/// Counts instances per punctuation type, most frequent first (ties by name).
pub fn corpus_stats(instances: &[BenchmarkInstance]) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for inst in instances {
        *counts.entry(inst.punctuation_type.as_str()).or_default() += 1;
    }
    let mut out: Vec<(String, usize)> = counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}
