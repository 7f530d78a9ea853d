use std::collections::HashMap;
use std::hash::Hash;

/// n-gram counts for one order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramCounts<T: Eq + Hash> {
    pub order: usize,
    pub counts: HashMap<Vec<T>, usize>,
}

impl<T: Eq + Hash + Clone> NGramCounts<T> {
    pub fn from_units(units: &[T], order: usize) -> Self {
        let mut counts: HashMap<Vec<T>, usize> = HashMap::new();
        if order > 0 && units.len() >= order {
            for w in units.windows(order) {
                *counts.entry(w.to_vec()).or_default() += 1;
            }
        }
        Self { order, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Sum over n-grams of `min(self, other)`.
    pub fn clipped_matches(&self, other: &Self) -> usize {
        self.counts
            .iter()
            .map(|(g, &c)| other.counts.get(g).map(|&r| r.min(c)).unwrap_or(0))
            .sum()
    }
}

/// Hypothesis total, reference total and clipped matches for one order,
/// accumulated over a corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OrderStats {
    pub hyp: usize,
    pub reference: usize,
    pub matches: usize,
}

impl OrderStats {
    pub fn add<T: Eq + Hash + Clone>(&mut self, hyp: &[T], reference: &[T], order: usize) {
        let h = NGramCounts::from_units(hyp, order);
        let r = NGramCounts::from_units(reference, order);
        self.hyp += h.total();
        self.reference += r.total();
        self.matches += h.clipped_matches(&r);
    }
}
