#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use viramkit::corpus::{strip_punctuation, BenchmarkInstance, PunctuationInventory};
use viramkit::restorer::RestorerModel;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

pub fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

pub fn read_lines(name: &str) -> Vec<String> {
    std::fs::read_to_string(fixture(name)).unwrap().lines().map(str::to_string).collect()
}

// Brute-force n-gram oracle: plain vectors, linear scans, no shared code with the crate.

fn grams<T: Clone + PartialEq>(units: &[T], n: usize) -> Vec<Vec<T>> {
    if units.len() < n {
        return Vec::new();
    }
    (0..=units.len() - n).map(|i| units[i..i + n].to_vec()).collect()
}

fn count<T: PartialEq>(xs: &[Vec<T>], g: &[T]) -> usize {
    xs.iter().filter(|x| x.as_slice() == g).count()
}

/// (clipped matches, hyp total, ref total)
fn clipped<T: Clone + PartialEq>(h: &[T], r: &[T], n: usize) -> (usize, usize, usize) {
    let hg = grams(h, n);
    let rg = grams(r, n);
    let mut distinct: Vec<Vec<T>> = Vec::new();
    for g in &hg {
        if !distinct.contains(g) {
            distinct.push(g.clone());
        }
    }
    let m = distinct.iter().map(|g| count(&hg, g).min(count(&rg, g))).sum();
    (m, hg.len(), rg.len())
}

pub fn oracle_bleu(hyps: &[String], refs: &[String]) -> f64 {
    let tok = |s: &String| s.split_whitespace().map(str::to_string).collect::<Vec<_>>();
    let mut m = [0usize; 4];
    let mut ht = [0usize; 4];
    let mut rt = [0usize; 4];
    let (mut hl, mut rl) = (0, 0);
    for (h, r) in hyps.iter().zip(refs) {
        let (h, r) = (tok(h), tok(r));
        hl += h.len();
        rl += r.len();
        for n in 1..=4 {
            let (a, b, c) = clipped(&h, &r, n);
            m[n - 1] += a;
            ht[n - 1] += b;
            rt[n - 1] += c;
        }
    }
    if hl == 0 {
        return 0.0;
    }
    let mut logs = Vec::new();
    let mut k = 1.0;
    for n in 0..4 {
        if ht[n] == 0 && rt[n] == 0 {
            continue;
        }
        if ht[n] == 0 {
            return 0.0;
        }
        let p = if m[n] == 0 {
            k *= 2.0;
            1.0 / (k * ht[n] as f64)
        } else {
            m[n] as f64 / ht[n] as f64
        };
        logs.push(p.ln());
    }
    let bp = if hl > rl { 1.0 } else { (1.0 - rl as f64 / hl as f64).exp() };
    100.0 * bp * (logs.iter().sum::<f64>() / logs.len() as f64).exp()
}

pub fn oracle_chrf(hyps: &[String], refs: &[String], beta: f64) -> f64 {
    let mut fs = Vec::new();
    let mut push = |stats: Vec<(usize, usize, usize)>| {
        for (m, h, r) in stats {
            if h == 0 && r == 0 {
                continue;
            }
            let p = if h == 0 { 0.0 } else { m as f64 / h as f64 };
            let rc = if r == 0 { 0.0 } else { m as f64 / r as f64 };
            let b2 = beta * beta;
            fs.push(if p + rc == 0.0 { 0.0 } else { (1.0 + b2) * p * rc / (b2 * p + rc) });
        }
    };
    let mut chars = vec![(0, 0, 0); 6];
    let mut words = vec![(0, 0, 0); 2];
    for (h, r) in hyps.iter().zip(refs) {
        let hc: Vec<char> = h.chars().filter(|c| !c.is_whitespace()).collect();
        let rc: Vec<char> = r.chars().filter(|c| !c.is_whitespace()).collect();
        for n in 1..=6 {
            let (a, b, c) = clipped(&hc, &rc, n);
            chars[n - 1].0 += a;
            chars[n - 1].1 += b;
            chars[n - 1].2 += c;
        }
        let hw: Vec<&str> = h.split_whitespace().collect();
        let rw: Vec<&str> = r.split_whitespace().collect();
        for n in 1..=2 {
            let (a, b, c) = clipped(&hw, &rw, n);
            words[n - 1].0 += a;
            words[n - 1].1 += b;
            words[n - 1].2 += c;
        }
    }
    push(chars);
    push(words);
    if fs.is_empty() {
        0.0
    } else {
        100.0 * fs.iter().sum::<f64>() / fs.len() as f64
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

// Rule corpus: a comma before every "but", a period at the end, nothing else.

const WORDS: [&str; 24] = [
    "we", "they", "went", "home", "it", "rained", "the", "dog", "barked", "she", "laughed", "ran", "fast", "cold",
    "water", "tried", "hard", "lost", "slowly", "market", "closed", "late", "train", "came",
];

pub fn rule_sentence(rng: &mut impl Rng) -> String {
    let clause = |rng: &mut dyn rand::RngCore| {
        let n = rng.random_range(2..=5);
        (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
    };
    let mut s = clause(rng);
    for _ in 0..rng.random_range(0..=2) {
        s.push_str(", but ");
        s.push_str(&clause(rng));
    }
    s.push('.');
    s
}

pub fn rule_corpus(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rule_sentence(&mut rng)).collect()
}

/// Rule sentences as benchmark rows; the Marathi side is a tagged copy so
/// a lookup translator maps each meant sentence to a distinct target.
pub fn rule_benchmark(n: usize, seed: u64) -> Vec<BenchmarkInstance> {
    let inv = PunctuationInventory::default();
    let mut seen = std::collections::HashSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let meant = rule_sentence(&mut rng);
        if !meant.contains(", but") || !seen.insert(meant.clone()) {
            continue;
        }
        out.push(BenchmarkInstance {
            id: format!("r{:03}", out.len() + 1),
            english_written: strip_punctuation(&meant, &inv),
            marathi_meant: format!("मराठी {meant}"),
            english_meant: meant,
            punctuation_type: "Comma".into(),
        });
    }
    out
}

/// A hand-weighted model encoding the rule exactly.
pub fn perfect_rule_model() -> RestorerModel {
    let text = "{\"format\":\"viramkit-restorer\",\"format_version\":1,\
\"label_set\":[\"NONE\",\"COMMA\",\"PERIOD\",\"QUESTION\",\"COLON\",\"SEMICOLON\"],\"seed\":7,\"epochs\":0,\"trained\":true}\n\
a\tat_end=true\t0 0 4 0 0 0\n\
a\tbias\t1 0 0 0 0 0\n\
a\tnext=but\t0 4 0 0 0 0\n";
    RestorerModel::from_text(text).unwrap()
}
