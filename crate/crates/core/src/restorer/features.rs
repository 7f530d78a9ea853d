/// Sentinel used for neighbours that fall outside the sentence.
pub const BOUNDARY: &str = "__BOUNDARY__";

/// Binary indicator features for one slot, in template order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector(Vec<String>);

impl FeatureVector {
    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|f| f == name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn lower_at(tokens: &[String], i: Option<usize>) -> String {
    match i.and_then(|i| tokens.get(i)) {
        Some(t) => t.to_lowercase(),
        None => BOUNDARY.to_string(),
    }
}

fn suffix(word: &str, n: usize) -> String {
    let chars: Vec<char> = word.chars().collect();
    chars[chars.len().saturating_sub(n)..].iter().collect()
}

fn capitalized(token: &str) -> bool {
    token.chars().next().map(char::is_uppercase).unwrap_or(false)
}

fn length_bucket(n: usize) -> &'static str {
    match n {
        0..=3 => "1-3",
        4..=7 => "4-7",
        8..=15 => "8-15",
        16..=31 => "16-31",
        _ => "32+",
    }
}

/// Features describing the slot right after `tokens[i]`.
///
/// Panics if `i` is out of range.
pub fn extract_features(tokens: &[String], i: usize) -> FeatureVector {
    assert!(i < tokens.len(), "slot {i} out of range for {} tokens", tokens.len());
    let word = tokens[i].to_lowercase();
    let prev = lower_at(tokens, i.checked_sub(1));
    let next = lower_at(tokens, Some(i + 1));
    let next2 = lower_at(tokens, Some(i + 2));
    let at_end = i + 1 == tokens.len();
    let next_cap = match tokens.get(i + 1) {
        Some(t) => if capitalized(t) { "1" } else { "0" },
        None => BOUNDARY,
    };

    let mut out = vec![
        "bias".to_string(),
        format!("word={word}"),
        format!("prev={prev}"),
        format!("next={next}"),
        format!("next2={next2}"),
        format!("word+next={word}|{next}"),
        format!("prev+word={prev}|{word}"),
        format!("suffix2={}", suffix(&word, 2)),
        format!("suffix3={}", suffix(&word, 3)),
        format!("cap={}", if capitalized(&tokens[i]) { 1 } else { 0 }),
        format!("next_cap={next_cap}"),
        format!("at_end={at_end}"),
        format!("len={}", length_bucket(tokens.len())),
    ];
    out.dedup();
    FeatureVector(out)
}
