use serde::{Deserialize, Serialize};

use super::ngram::OrderStats;
use super::{check_lengths, MetricConfig, MetricError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    /// 0..100
    pub score: f64,
    /// Per-order precisions after smoothing, 0..1; `None` for orders that
    /// neither side of the corpus reaches.
    pub precisions: Vec<Option<f64>>,
    pub brevity_penalty: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
    /// Every hypothesis was empty; the score is 0.
    pub empty_hypotheses: bool,
}

/// Corpus-level BLEU with exponential smoothing of zero-match orders.
///
/// n-gram statistics are summed over the corpus before precisions are
/// formed. The k-th order with no clipped match gets precision
/// `1 / (2^k * total)`. Orders absent from both hypotheses and references
/// are left out of the geometric mean; an order present only in the
/// references has precision 0 and drives the score to 0.
pub fn corpus_bleu(hyps: &[String], refs: &[String], cfg: &MetricConfig) -> Result<BleuScore, MetricError> {
    check_lengths(hyps.len(), refs.len())?;
    cfg.validate()?;
    let max_order = cfg.bleu_max_order;
    let mut stats = vec![OrderStats::default(); max_order];
    let mut hyp_len = 0;
    let mut ref_len = 0;
    for (h, r) in hyps.iter().zip(refs) {
        let ht = cfg.tokenizer.tokenize(h);
        let rt = cfg.tokenizer.tokenize(r);
        hyp_len += ht.len();
        ref_len += rt.len();
        for (n, s) in stats.iter_mut().enumerate() {
            s.add(&ht, &rt, n + 1);
        }
    }
    Ok(bleu_from_stats(&stats, hyp_len, ref_len))
}

pub(crate) fn bleu_from_stats(stats: &[OrderStats], hyp_len: usize, ref_len: usize) -> BleuScore {
    if hyp_len == 0 {
        return BleuScore {
            score: 0.0,
            precisions: vec![None; stats.len()],
            brevity_penalty: 0.0,
            hyp_len,
            ref_len,
            empty_hypotheses: true,
        };
    }
    let mut smooth = 1.0f64;
    let mut precisions = Vec::with_capacity(stats.len());
    let mut log_sum = 0.0;
    let mut used = 0usize;
    let mut zero = false;
    for s in stats {
        if s.hyp == 0 && s.reference == 0 {
            precisions.push(None);
            continue;
        }
        used += 1;
        let p = if s.hyp == 0 {
            0.0
        } else if s.matches == 0 {
            smooth *= 2.0;
            1.0 / (smooth * s.hyp as f64)
        } else {
            s.matches as f64 / s.hyp as f64
        };
        if p == 0.0 {
            zero = true;
        } else {
            log_sum += p.ln();
        }
        precisions.push(Some(p));
    }
    let bp = if hyp_len > ref_len { 1.0 } else { (1.0 - ref_len as f64 / hyp_len as f64).exp() };
    let score = if zero || used == 0 { 0.0 } else { 100.0 * bp * (log_sum / used as f64).exp() };
    BleuScore { score, precisions, brevity_penalty: bp, hyp_len, ref_len, empty_hypotheses: false }
}
