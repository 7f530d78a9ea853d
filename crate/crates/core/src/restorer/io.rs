//! Textual model file.
//!
//! ```text
//! {"format":"viramkit-restorer","format_version":1,"label_set":[...],"seed":7,"epochs":5,"trained":true}
//! a<TAB>feature<TAB>w_0 w_1 ... w_{L-1}     averaged weights
//! w<TAB>feature<TAB>w_0 w_1 ... w_{L-1}     raw final weights
//! ```
//!
//! Rows are sorted by kind then feature name, and weights are written in
//! shortest round-trip form, so saving a loaded model reproduces the file.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LabelSet, RestorerError, RestorerModel};

pub const FORMAT_NAME: &str = "viramkit-restorer";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    format_version: u32,
    label_set: LabelSet,
    seed: u64,
    epochs: usize,
    trained: bool,
}

fn write_rows(out: &mut String, kind: char, rows: &HashMap<String, Vec<f64>>) {
    let mut keys: Vec<&String> = rows.keys().collect();
    keys.sort();
    for k in keys {
        let ws: Vec<String> = rows[k].iter().map(|w| w.to_string()).collect();
        out.push(kind);
        out.push('\t');
        out.push_str(k);
        out.push('\t');
        out.push_str(&ws.join(" "));
        out.push('\n');
    }
}

impl RestorerModel {
    pub fn to_text(&self) -> String {
        let header = Header {
            format: FORMAT_NAME.into(),
            format_version: FORMAT_VERSION,
            label_set: self.label_set.clone(),
            seed: self.train_seed,
            epochs: self.epochs_trained,
            trained: self.averaged_weights.is_some(),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        if let Some(avg) = &self.averaged_weights {
            write_rows(&mut out, 'a', avg);
        }
        write_rows(&mut out, 'w', &self.weights);
        out
    }

    pub fn from_text(text: &str) -> Result<Self, RestorerError> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or_else(|| RestorerError::ModelParse { line: 1, message: "empty file".into() })?;
        let header: Header = serde_json::from_str(first)
            .map_err(|e| RestorerError::ModelParse { line: 1, message: format!("bad header: {e}") })?;
        if header.format != FORMAT_NAME {
            return Err(RestorerError::ModelParse { line: 1, message: format!("not a restorer model: {}", header.format) });
        }
        if header.format_version != FORMAT_VERSION {
            return Err(RestorerError::FormatVersion { expected: FORMAT_VERSION, found: header.format_version });
        }
        let n = header.label_set.len();
        let mut averaged = HashMap::new();
        let mut weights = HashMap::new();
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| RestorerError::ModelParse { line: idx + 1, message };
            let mut parts = line.splitn(3, '\t');
            let (kind, feat, ws) = match (parts.next(), parts.next(), parts.next()) {
                (Some(k), Some(f), Some(w)) => (k, f, w),
                _ => return Err(bad("expected three tab-separated columns".into())),
            };
            let row = ws
                .split(' ')
                .map(|w| w.parse::<f64>().map_err(|e| bad(format!("bad weight {w:?}: {e}"))))
                .collect::<Result<Vec<f64>, _>>()?;
            if row.len() != n {
                return Err(bad(format!("expected {n} weights, found {}", row.len())));
            }
            let target = match kind {
                "a" => &mut averaged,
                "w" => &mut weights,
                other => return Err(bad(format!("unknown row kind {other:?}"))),
            };
            if target.insert(feat.to_string(), row).is_some() {
                return Err(bad(format!("duplicate feature {feat:?}")));
            }
        }
        if !header.trained && !averaged.is_empty() {
            return Err(RestorerError::ModelParse { line: 1, message: "untrained model carries averaged weights".into() });
        }
        Ok(RestorerModel {
            label_set: header.label_set,
            weights,
            averaged_weights: header.trained.then_some(averaged),
            train_seed: header.seed,
            epochs_trained: header.epochs,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), RestorerError> {
        fs::write(path, self.to_text()).map_err(|source| RestorerError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self, RestorerError> {
        let text = fs::read_to_string(path).map_err(|source| RestorerError::Io { path: path.to_path_buf(), source })?;
        Self::from_text(&text)
    }
}
