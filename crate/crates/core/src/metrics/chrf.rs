use serde::{Deserialize, Serialize};

use super::ngram::OrderStats;
use super::{check_lengths, tokenize_intl, MetricConfig, MetricError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChrfScore {
    /// 0..100
    pub score: f64,
    pub beta: f64,
    /// F-beta per character order, then per word order; `None` when the
    /// order occurs on neither side.
    pub char_f: Vec<Option<f64>>,
    pub word_f: Vec<Option<f64>>,
}

fn f_beta(s: &OrderStats, beta: f64) -> Option<f64> {
    if s.hyp == 0 && s.reference == 0 {
        return None;
    }
    let p = if s.hyp == 0 { 0.0 } else { s.matches as f64 / s.hyp as f64 };
    let r = if s.reference == 0 { 0.0 } else { s.matches as f64 / s.reference as f64 };
    if p + r == 0.0 {
        return Some(0.0);
    }
    let b2 = beta * beta;
    Some((1.0 + b2) * p * r / (b2 * p + r))
}

/// Character n-grams (whitespace removed) and word n-grams (intl tokens)
/// are counted over the whole corpus; the score is the mean F-beta over
/// every order that occurs on at least one side.
pub fn chrf(hyps: &[String], refs: &[String], cfg: &MetricConfig) -> Result<ChrfScore, MetricError> {
    check_lengths(hyps.len(), refs.len())?;
    cfg.validate()?;
    let mut char_stats = vec![OrderStats::default(); cfg.chr_char_order];
    let mut word_stats = vec![OrderStats::default(); cfg.chr_word_order];
    for (h, r) in hyps.iter().zip(refs) {
        let hc: Vec<char> = h.chars().filter(|c| !c.is_whitespace()).collect();
        let rc: Vec<char> = r.chars().filter(|c| !c.is_whitespace()).collect();
        for (n, s) in char_stats.iter_mut().enumerate() {
            s.add(&hc, &rc, n + 1);
        }
        let hw = tokenize_intl(h);
        let rw = tokenize_intl(r);
        for (n, s) in word_stats.iter_mut().enumerate() {
            s.add(&hw, &rw, n + 1);
        }
    }
    let char_f: Vec<Option<f64>> = char_stats.iter().map(|s| f_beta(s, cfg.beta)).collect();
    let word_f: Vec<Option<f64>> = word_stats.iter().map(|s| f_beta(s, cfg.beta)).collect();
    let present: Vec<f64> = char_f.iter().chain(&word_f).flatten().copied().collect();
    let score = if present.is_empty() {
        0.0
    } else {
        100.0 * present.iter().sum::<f64>() / present.len() as f64
    };
    Ok(ChrfScore { score, beta: cfg.beta, char_f, word_f })
}
