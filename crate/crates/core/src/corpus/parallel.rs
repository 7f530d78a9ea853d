use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::{strip_punctuation, CorpusError, PunctuationInventory};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelPair {
    pub source: String,
    pub target: String,
}

impl ParallelPair {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Result<Self, CorpusError> {
        let pair = Self { source: source.into(), target: target.into() };
        if pair.source.trim().is_empty() || pair.target.trim().is_empty() {
            return Err(CorpusError::EmptyPair);
        }
        Ok(pair)
    }
}

/// How a parallel corpus was derived from its punctuated base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    /// Original data, punctuation intact.
    WithPunct,
    /// Every source stripped of punctuation.
    WithoutPunct,
    /// Base pairs followed by their stripped copies; twice the base size.
    Combined2x,
    /// Even indices keep punctuation, odd indices are stripped; base size.
    AlternateX,
}

impl VariantKind {
    pub const ALL: [VariantKind; 4] =
        [VariantKind::WithPunct, VariantKind::WithoutPunct, VariantKind::Combined2x, VariantKind::AlternateX];

    /// Short name used on the command line and in file names.
    pub fn cli_name(self) -> &'static str {
        match self {
            VariantKind::WithPunct => "with",
            VariantKind::WithoutPunct => "without",
            VariantKind::Combined2x => "combined2x",
            VariantKind::AlternateX => "alternate",
        }
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for VariantKind {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "with" | "with_punct" => Ok(VariantKind::WithPunct),
            "without" | "without_punct" => Ok(VariantKind::WithoutPunct),
            "combined2x" => Ok(VariantKind::Combined2x),
            "alternate" | "alternate_x" => Ok(VariantKind::AlternateX),
            other => Err(CorpusError::UnknownVariant(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub name: String,
    pub variant: VariantKind,
    pub pairs: Vec<ParallelPair>,
}

impl ParallelCorpus {
    pub fn new(name: impl Into<String>, pairs: Vec<ParallelPair>) -> Self {
        Self { name: name.into(), variant: VariantKind::WithPunct, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn stripped(pair: &ParallelPair, inventory: &PunctuationInventory) -> ParallelPair {
    ParallelPair { source: strip_punctuation(&pair.source, inventory), target: pair.target.clone() }
}

/// Derives one fine-tuning variant from a punctuated base corpus.
///
/// Targets are never modified. A stripped source may end up empty when the
/// original consisted only of marks; such pairs are kept so that corpus
/// sizes stay exact.
pub fn make_variant(
    base: &ParallelCorpus,
    kind: VariantKind,
    inventory: &PunctuationInventory,
) -> Result<ParallelCorpus, CorpusError> {
    if base.variant != VariantKind::WithPunct {
        return Err(CorpusError::NotPunctuatedBase(base.variant));
    }
    let pairs = match kind {
        VariantKind::WithPunct => base.pairs.clone(),
        VariantKind::WithoutPunct => base.pairs.iter().map(|p| stripped(p, inventory)).collect(),
        VariantKind::Combined2x => {
            let mut out = Vec::with_capacity(base.pairs.len() * 2);
            out.extend(base.pairs.iter().cloned());
            out.extend(base.pairs.iter().map(|p| stripped(p, inventory)));
            out
        }
        VariantKind::AlternateX => base
            .pairs
            .iter()
            .enumerate()
            .map(|(i, p)| if i % 2 == 0 { p.clone() } else { stripped(p, inventory) })
            .collect(),
    };
    Ok(ParallelCorpus { name: format!("{}_{}", base.name, kind.cli_name()), variant: kind, pairs })
}

/// Sidecar metadata written next to `<name>.src` / `<name>.tgt`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub name: String,
    pub variant: VariantKind,
    pub base: Option<String>,
    pub pairs: usize,
}

fn read_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    Ok(text.lines().map(|l| l.trim_end_matches('\r').nfc().collect()).collect())
}

/// Reads two aligned files into a `WithPunct` corpus named after the source file stem.
pub fn read_parallel(src: &Path, tgt: &Path) -> Result<ParallelCorpus, CorpusError> {
    let sources = read_lines(src)?;
    let targets = read_lines(tgt)?;
    if sources.len() != targets.len() {
        return Err(CorpusError::Misaligned { sources: sources.len(), targets: targets.len() });
    }
    let mut pairs = Vec::with_capacity(sources.len());
    for (i, (s, t)) in sources.into_iter().zip(targets).enumerate() {
        pairs.push(ParallelPair::new(s, t).map_err(|_| CorpusError::Malformed {
            line: i + 1,
            message: "empty source or target".into(),
        })?);
    }
    let name = src.file_stem().and_then(|s| s.to_str()).unwrap_or("corpus").to_string();
    Ok(ParallelCorpus::new(name, pairs))
}

/// Writes `<dir>/<name>.src`, `<dir>/<name>.tgt` and `<dir>/<name>.meta.json`.
pub fn write_parallel(corpus: &ParallelCorpus, base: Option<&str>, dir: &Path) -> Result<[PathBuf; 3], CorpusError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let src_path = dir.join(format!("{}.src", corpus.name));
    let tgt_path = dir.join(format!("{}.tgt", corpus.name));
    let meta_path = dir.join(format!("{}.meta.json", corpus.name));
    let mut src = String::new();
    let mut tgt = String::new();
    for p in &corpus.pairs {
        if p.source.contains('\n') || p.target.contains('\n') {
            return Err(CorpusError::Malformed { line: 0, message: "sentence contains a newline".into() });
        }
        src.push_str(&p.source);
        src.push('\n');
        tgt.push_str(&p.target);
        tgt.push('\n');
    }
    let meta = CorpusMeta {
        name: corpus.name.clone(),
        variant: corpus.variant,
        base: base.map(str::to_string),
        pairs: corpus.pairs.len(),
    };
    fs::write(&src_path, src).map_err(io(&src_path))?;
    fs::write(&tgt_path, tgt).map_err(io(&tgt_path))?;
    fs::write(&meta_path, serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n")
        .map_err(io(&meta_path))?;
    Ok([src_path, tgt_path, meta_path])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn base(n: usize) -> ParallelCorpus {
        let pairs = (0..n)
            .map(|i| ParallelPair::new(format!("Hello, world {i}; fine."), format!("नमस्कार, जग {i}.")).unwrap())
            .collect();
        ParallelCorpus::new("toy", pairs)
    }

    #[test]
    fn combined_doubles() {
        let inv = PunctuationInventory::default();
        let b = base(4);
        let v = make_variant(&b, VariantKind::Combined2x, &inv).unwrap();
        assert_eq!(v.len(), 8);
        assert_eq!(&v.pairs[..4], &b.pairs[..]);
        for (p, orig) in v.pairs[4..].iter().zip(&b.pairs) {
            assert_eq!(p.source, strip_punctuation(&orig.source, &inv));
            assert_eq!(p.target, orig.target);
        }
    }

    #[test]
    fn with_punct_is_identity() {
        let b = base(3);
        let v = make_variant(&b, VariantKind::WithPunct, &PunctuationInventory::default()).unwrap();
        assert_eq!(v.pairs, b.pairs);
    }

    #[test]
    fn alternate_parity() {
        let inv = PunctuationInventory::default();
        let b = base(4);
        let v = make_variant(&b, VariantKind::AlternateX, &inv).unwrap();
        for (i, (p, orig)) in v.pairs.iter().zip(&b.pairs).enumerate() {
            let expected = if i % 2 == 0 { orig.source.clone() } else { strip_punctuation(&orig.source, &inv) };
            assert_eq!(p.source, expected, "index {i}");
        }
    }

    #[test]
    fn rejects_derived_base() {
        let inv = PunctuationInventory::default();
        let v = make_variant(&base(2), VariantKind::WithoutPunct, &inv).unwrap();
        assert!(matches!(
            make_variant(&v, VariantKind::Combined2x, &inv),
            Err(CorpusError::NotPunctuatedBase(VariantKind::WithoutPunct))
        ));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in VariantKind::ALL {
            assert_eq!(k.cli_name().parse::<VariantKind>().unwrap(), k);
        }
        assert!("double".parse::<VariantKind>().is_err());
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let b = base(5);
        let [src, tgt, meta] = write_parallel(&b, None, dir.path()).unwrap();
        let back = read_parallel(&src, &tgt).unwrap();
        assert_eq!(back, b);
        let meta: CorpusMeta = serde_json::from_str(&fs::read_to_string(meta).unwrap()).unwrap();
        assert_eq!(meta.variant, VariantKind::WithPunct);
        assert_eq!(meta.pairs, 5);
    }

    #[test]
    fn misaligned_files_error() {
        let dir = tempfile::tempdir().unwrap();
        let s = dir.path().join("a.src");
        let t = dir.path().join("a.tgt");
        fs::write(&s, "a\nb\n").unwrap();
        fs::write(&t, "x\n").unwrap();
        assert!(matches!(read_parallel(&s, &t), Err(CorpusError::Misaligned { sources: 2, targets: 1 })));
    }

    proptest! {
        #[test]
        fn sizes_and_targets(sources in prop::collection::vec("[a-z]{1,5}[,.;]? [a-z]{1,5}[.?!]?", 1..20)) {
            let inv = PunctuationInventory::default();
            let pairs: Vec<_> = sources.iter().enumerate()
                .map(|(i, s)| ParallelPair::new(s.clone(), format!("t{i}")).unwrap())
                .collect();
            let b = ParallelCorpus::new("p", pairs);
            let mut base_targets: Vec<_> = b.pairs.iter().map(|p| p.target.clone()).collect();
            base_targets.sort();
            for kind in VariantKind::ALL {
                let v = make_variant(&b, kind, &inv).unwrap();
                let factor = if kind == VariantKind::Combined2x { 2 } else { 1 };
                prop_assert_eq!(v.len(), factor * b.len());
                let mut targets: Vec<_> = v.pairs.iter().map(|p| p.target.clone()).collect();
                targets.sort();
                let mut expected: Vec<_> = base_targets.iter().flat_map(|t| std::iter::repeat_n(t.clone(), factor)).collect();
                expected.sort();
                prop_assert_eq!(targets, expected);
            }
        }
    }
}
