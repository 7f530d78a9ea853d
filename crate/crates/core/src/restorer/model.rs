//! Per-slot multiclass averaged perceptron.
//!
//! Training keeps integer weights and lazily accumulated totals, so the
//! averaged weights depend only on the update sequence. The update sequence
//! depends only on the corpus and the seed, which makes training
//! bit-reproducible.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::features::extract_features;
use super::{LabelSet, LabeledSentence, PunctLabel, RestorerError};

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub seed: u64,
    pub label_set: LabelSet,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 5, seed: 7, label_set: LabelSet::default() }
    }
}

/// A trained (or explicitly zero) restoration model.
///
/// Weight rows are indexed by position in `label_set`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestorerModel {
    pub(crate) label_set: LabelSet,
    pub(crate) weights: HashMap<String, Vec<f64>>,
    pub(crate) averaged_weights: Option<HashMap<String, Vec<f64>>>,
    pub(crate) train_seed: u64,
    pub(crate) epochs_trained: usize,
}

#[derive(Default)]
struct Param {
    weight: Vec<i64>,
    total: Vec<i64>,
    stamp: Vec<u64>,
}

impl Param {
    fn new(n: usize) -> Self {
        Self { weight: vec![0; n], total: vec![0; n], stamp: vec![0; n] }
    }

    fn bump(&mut self, label: usize, delta: i64, step: u64) {
        self.total[label] += (step - self.stamp[label]) as i64 * self.weight[label];
        self.stamp[label] = step;
        self.weight[label] += delta;
    }
}

fn argmax(scores: &[f64]) -> usize {
    // strict comparison keeps the earliest label on ties
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn train(corpus: &[LabeledSentence], config: &TrainConfig) -> Result<RestorerModel, RestorerError> {
    if corpus.is_empty() {
        return Err(RestorerError::EmptyCorpus);
    }
    if config.epochs == 0 {
        return Err(RestorerError::InvalidConfig("epochs must be at least 1".into()));
    }
    let labels = &config.label_set;
    let n = labels.len();

    // gold label indices and feature lists, computed once
    let mut slots: Vec<Vec<(usize, Vec<String>)>> = Vec::with_capacity(corpus.len());
    for sent in corpus {
        let mut row = Vec::with_capacity(sent.len());
        for (i, label) in sent.labels().iter().enumerate() {
            let gold = labels.index_of(*label).ok_or_else(|| RestorerError::UnknownLabel(label.to_string()))?;
            row.push((gold, extract_features(sent.tokens(), i).names().to_vec()));
        }
        slots.push(row);
    }

    let mut params: HashMap<String, Param> = HashMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut step: u64 = 0;
    let mut scores = vec![0.0; n];

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut mistakes = 0usize;
        for &s in &order {
            for (gold, feats) in &slots[s] {
                scores.iter_mut().for_each(|x| *x = 0.0);
                for f in feats {
                    if let Some(p) = params.get(f) {
                        for (acc, w) in scores.iter_mut().zip(&p.weight) {
                            *acc += *w as f64;
                        }
                    }
                }
                let guess = argmax(&scores);
                if guess != *gold {
                    mistakes += 1;
                    for f in feats {
                        let p = params.entry(f.clone()).or_insert_with(|| Param::new(n));
                        p.bump(*gold, 1, step);
                        p.bump(guess, -1, step);
                    }
                }
                step += 1;
            }
        }
        log::debug!("epoch {}: {} slot mistakes", epoch + 1, mistakes);
    }

    let mut weights = HashMap::with_capacity(params.len());
    let mut averaged = HashMap::with_capacity(params.len());
    for (feat, mut p) in params {
        for l in 0..n {
            p.bump(l, 0, step);
        }
        let avg: Vec<f64> = p.total.iter().map(|&t| t as f64 / step as f64).collect();
        if avg.iter().any(|&w| w != 0.0) {
            averaged.insert(feat.clone(), avg);
        }
        weights.insert(feat, p.weight.iter().map(|&w| w as f64).collect());
    }

    Ok(RestorerModel {
        label_set: labels.clone(),
        weights,
        averaged_weights: Some(averaged),
        train_seed: config.seed,
        epochs_trained: config.epochs,
    })
}

impl RestorerModel {
    /// A model whose averaged weights are all zero; it predicts `NONE` everywhere.
    pub fn zero(label_set: LabelSet) -> Self {
        Self {
            label_set,
            weights: HashMap::new(),
            averaged_weights: Some(HashMap::new()),
            train_seed: 0,
            epochs_trained: 0,
        }
    }

    /// A model that has not been trained; prediction fails.
    pub fn untrained(label_set: LabelSet) -> Self {
        Self { averaged_weights: None, ..Self::zero(label_set) }
    }

    pub fn label_set(&self) -> &LabelSet {
        &self.label_set
    }

    pub fn train_seed(&self) -> u64 {
        self.train_seed
    }

    pub fn epochs_trained(&self) -> usize {
        self.epochs_trained
    }

    pub fn is_trained(&self) -> bool {
        self.averaged_weights.is_some()
    }

    pub fn weights(&self) -> &HashMap<String, Vec<f64>> {
        &self.weights
    }

    pub fn averaged_weights(&self) -> Option<&HashMap<String, Vec<f64>>> {
        self.averaged_weights.as_ref()
    }

    pub fn predict(&self, tokens: &[String]) -> Result<Vec<PunctLabel>, RestorerError> {
        let averaged = self.averaged_weights.as_ref().ok_or(RestorerError::Untrained)?;
        if tokens.is_empty() {
            return Err(RestorerError::EmptyInput);
        }
        let labels = self.label_set.labels();
        let mut scores = vec![0.0; labels.len()];
        let mut out = Vec::with_capacity(tokens.len());
        for i in 0..tokens.len() {
            scores.iter_mut().for_each(|x| *x = 0.0);
            for f in extract_features(tokens, i).names() {
                if let Some(row) = averaged.get(f) {
                    for (acc, w) in scores.iter_mut().zip(row) {
                        *acc += w;
                    }
                }
            }
            out.push(labels[argmax(&scores)]);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::restorer::derive_labels;
    use crate::corpus::PunctuationInventory;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn corpus(lines: &[&str]) -> Vec<LabeledSentence> {
        let inv = PunctuationInventory::default();
        lines.iter().map(|l| derive_labels(l, &inv, &LabelSet::default()).unwrap()).collect()
    }

    #[test]
    fn all_none_supervision_predicts_none() {
        let c = corpus(&["a b c", "d e", "f g h i"]);
        let m = train(&c, &TrainConfig::default()).unwrap();
        for s in &c {
            assert!(m.predict(s.tokens()).unwrap().iter().all(|l| *l == PunctLabel::None));
        }
    }

    #[test]
    fn zero_model_ties_to_none() {
        let m = RestorerModel::zero(LabelSet::default());
        assert_eq!(m.predict(&toks("x y z")).unwrap(), vec![PunctLabel::None; 3]);
    }

    #[test]
    fn untrained_and_empty_errors() {
        let m = RestorerModel::untrained(LabelSet::default());
        assert!(matches!(m.predict(&toks("x")), Err(RestorerError::Untrained)));
        let z = RestorerModel::zero(LabelSet::default());
        assert!(matches!(z.predict(&[]), Err(RestorerError::EmptyInput)));
    }

    #[test]
    fn training_errors() {
        assert!(matches!(train(&[], &TrainConfig::default()), Err(RestorerError::EmptyCorpus)));
        let c = corpus(&["a b."]);
        let cfg = TrainConfig { epochs: 0, ..Default::default() };
        assert!(matches!(train(&c, &cfg), Err(RestorerError::InvalidConfig(_))));
        let cfg = TrainConfig { label_set: LabelSet::new([PunctLabel::Comma]), ..Default::default() };
        match train(&c, &cfg) {
            Err(RestorerError::UnknownLabel(l)) => assert_eq!(l, "PERIOD"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reproducible() {
        let c = corpus(&["we came, we saw.", "it rained but we played.", "why not?", "first: second."]);
        let a = train(&c, &TrainConfig::default()).unwrap();
        let b = train(&c, &TrainConfig::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.is_trained());
        let p = a.predict(&toks("we came we saw")).unwrap();
        assert_eq!(p, a.predict(&toks("we came we saw")).unwrap());
        assert_eq!(p.len(), 4);
    }
}
