use serde::{Deserialize, Serialize};

use super::{LabelSet, LabeledSentence, PunctLabel, RestorerError, RestorerModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: PunctLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold slots carrying this label.
    pub support: usize,
    /// Slots predicted as this label.
    pub predicted: usize,
    /// Nothing was predicted as this label; precision is reported as 0.
    pub precision_undefined: bool,
    /// No gold slot carries this label; recall is reported as 0.
    pub recall_undefined: bool,
}

/// Slot-level restoration quality over non-`NONE` classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestorerEvaluation {
    pub per_class: Vec<ClassScores>,
    /// Mean F1 over classes that occur in gold or predictions.
    pub macro_f1: f64,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
    pub slots: usize,
}

impl RestorerEvaluation {
    pub fn class(&self, label: PunctLabel) -> Option<&ClassScores> {
        self.per_class.iter().find(|c| c.label == label)
    }
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Scores predicted label sequences against gold ones.
pub fn score_labels(
    label_set: &LabelSet,
    gold: &[Vec<PunctLabel>],
    predicted: &[Vec<PunctLabel>],
) -> Result<RestorerEvaluation, RestorerError> {
    if gold.len() != predicted.len() {
        return Err(RestorerError::LengthMismatch { expected: gold.len(), found: predicted.len() });
    }
    let n = label_set.len();
    let mut tp = vec![0usize; n];
    let mut gold_count = vec![0usize; n];
    let mut pred_count = vec![0usize; n];
    let mut slots = 0;
    for (g, p) in gold.iter().zip(predicted) {
        if g.len() != p.len() {
            return Err(RestorerError::LengthMismatch { expected: g.len(), found: p.len() });
        }
        for (&gl, &pl) in g.iter().zip(p) {
            let gi = label_set.index_of(gl).ok_or_else(|| RestorerError::UnknownLabel(gl.to_string()))?;
            let pi = label_set.index_of(pl).ok_or_else(|| RestorerError::UnknownLabel(pl.to_string()))?;
            gold_count[gi] += 1;
            pred_count[pi] += 1;
            if gi == pi {
                tp[gi] += 1;
            }
            slots += 1;
        }
    }

    let mut per_class = Vec::new();
    let mut macro_sum = 0.0;
    let mut macro_n = 0usize;
    for (i, &label) in label_set.labels().iter().enumerate().skip(1) {
        let (precision, precision_undefined) = ratio(tp[i], pred_count[i]);
        let (recall, recall_undefined) = ratio(tp[i], gold_count[i]);
        let f = f1(precision, recall);
        if gold_count[i] > 0 || pred_count[i] > 0 {
            macro_sum += f;
            macro_n += 1;
        }
        per_class.push(ClassScores {
            label,
            precision,
            recall,
            f1: f,
            support: gold_count[i],
            predicted: pred_count[i],
            precision_undefined,
            recall_undefined,
        });
    }

    let tp_all: usize = tp[1..].iter().sum();
    let pred_all: usize = pred_count[1..].iter().sum();
    let gold_all: usize = gold_count[1..].iter().sum();
    let (micro_precision, micro_recall, micro_f1, macro_f1) = if pred_all == 0 && gold_all == 0 {
        // nothing to insert and nothing inserted
        (1.0, 1.0, 1.0, 1.0)
    } else {
        let (p, _) = ratio(tp_all, pred_all);
        let (r, _) = ratio(tp_all, gold_all);
        (p, r, f1(p, r), macro_sum / macro_n as f64)
    };

    Ok(RestorerEvaluation { per_class, macro_f1, micro_precision, micro_recall, micro_f1, slots })
}

pub fn evaluate_restorer(model: &RestorerModel, heldout: &[LabeledSentence]) -> Result<RestorerEvaluation, RestorerError> {
    if heldout.is_empty() {
        return Err(RestorerError::EmptyCorpus);
    }
    let mut gold = Vec::with_capacity(heldout.len());
    let mut predicted = Vec::with_capacity(heldout.len());
    for s in heldout {
        predicted.push(model.predict(s.tokens())?);
        gold.push(s.labels().to_vec());
    }
    score_labels(model.label_set(), &gold, &predicted)
}
