//! Tokenization, stop-word removal and Porter stemming.
//!
//! Documents are lowercased and split on non-alphanumeric characters.
//! Stop words come from the fixed 170-word list shipped in
//! `resources/stopwords_english.txt` (one word per line); stemming follows
//! Porter's 1980 algorithm.

use std::collections::HashSet;
use std::sync::OnceLock;

use crate::data::TextCorpus;

const STOPWORDS_RAW: &str = include_str!("../../resources/stopwords_english.txt");

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS_RAW.lines().map(str::trim).filter(|w| !w.is_empty()).collect())
}

/// A corpus reduced to stemmed token lists; labels ride along unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedCorpus {
    pub name: String,
    pub documents: Vec<Vec<String>>,
    pub labels: Vec<bool>,
}

impl TokenizedCorpus {
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// Lowercase, strip punctuation, drop stop words, stem. Deterministic and
/// order-preserving; empty documents yield empty token lists.
pub fn tokenize_and_stem(corpus: &TextCorpus) -> TokenizedCorpus {
    TokenizedCorpus {
        name: corpus.name.clone(),
        documents: corpus.documents.iter().map(|d| tokenize_document(d)).collect(),
        labels: corpus.labels.clone(),
    }
}

/// Token pipeline for a single document.
pub fn tokenize_document(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    lower
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter(|t| !stopwords().contains(t))
        .map(porter_stem)
        .collect()
}

// --- Porter stemmer -------------------------------------------------------

fn is_consonant(word: &[u8], i: usize) -> bool {
    match word[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(word, i - 1),
        _ => true,
    }
}

/// The measure m: number of vowel-consonant sequences in [C](VC)^m[V].
fn measure(word: &[u8]) -> usize {
    let mut m = 0;
    let mut i = 0;
    let n = word.len();
    while i < n && is_consonant(word, i) {
        i += 1;
    }
    loop {
        // at a vowel run (or end)
        while i < n && !is_consonant(word, i) {
            i += 1;
        }
        if i == n {
            return m;
        }
        // a consonant run after a vowel run closes one VC
        while i < n && is_consonant(word, i) {
            i += 1;
        }
        m += 1;
    }
}

fn contains_vowel(word: &[u8]) -> bool {
    (0..word.len()).any(|i| !is_consonant(word, i))
}

fn ends_double_consonant(word: &[u8]) -> bool {
    let n = word.len();
    n >= 2 && word[n - 1] == word[n - 2] && is_consonant(word, n - 1)
}

/// consonant-vowel-consonant ending where the final consonant is not w, x
/// or y.
fn ends_cvc(word: &[u8]) -> bool {
    let n = word.len();
    n >= 3
        && is_consonant(word, n - 3)
        && !is_consonant(word, n - 2)
        && is_consonant(word, n - 1)
        && !matches!(word[n - 1], b'w' | b'x' | b'y')
}

/// Within a rule set, apply the longest-matching suffix whose condition
/// holds on the stem; per Porter, once the longest suffix matches no
/// shorter suffix is tried even if the condition fails.
fn apply_rules(
    word: &mut Vec<u8>,
    rules: &[(&str, &str)],
    condition: impl Fn(&[u8]) -> bool,
) -> bool {
    for (suffix, replacement) in rules {
        if word.ends_with(suffix.as_bytes()) {
            let stem_len = word.len() - suffix.len();
            if condition(&word[..stem_len]) {
                word.truncate(stem_len);
                word.extend_from_slice(replacement.as_bytes());
                return true;
            }
            return false;
        }
    }
    false
}

/// Porter's 1980 stemming algorithm.
pub fn porter_stem(token: &str) -> String {
    if token.len() <= 2 || !token.is_ascii() {
        return token.to_string();
    }
    let mut w: Vec<u8> = token.bytes().collect();

    // step 1a
    if w.ends_with(b"sses") {
        w.truncate(w.len() - 2);
    } else if w.ends_with(b"ies") {
        w.truncate(w.len() - 2);
    } else if !w.ends_with(b"ss") && w.ends_with(b"s") {
        w.truncate(w.len() - 1);
    }

    // step 1b
    let mut cleanup = false;
    if w.ends_with(b"eed") {
        if measure(&w[..w.len() - 3]) > 0 {
            w.truncate(w.len() - 1);
        }
    } else if w.ends_with(b"ed") && contains_vowel(&w[..w.len() - 2]) {
        w.truncate(w.len() - 2);
        cleanup = true;
    } else if w.ends_with(b"ing") && contains_vowel(&w[..w.len() - 3]) {
        w.truncate(w.len() - 3);
        cleanup = true;
    }
    if cleanup {
        if w.ends_with(b"at") || w.ends_with(b"bl") || w.ends_with(b"iz") {
            w.push(b'e');
        } else if ends_double_consonant(&w) && !matches!(w.last(), Some(b'l' | b's' | b'z')) {
            w.truncate(w.len() - 1);
        } else if measure(&w) == 1 && ends_cvc(&w) {
            w.push(b'e');
        }
    }

    // step 1c
    if w.ends_with(b"y") && contains_vowel(&w[..w.len() - 1]) {
        let n = w.len();
        w[n - 1] = b'i';
    }

    // step 2
    apply_rules(
        &mut w,
        &[
            ("ational", "ate"),
            ("ization", "ize"),
            ("iveness", "ive"),
            ("fulness", "ful"),
            ("ousness", "ous"),
            ("tional", "tion"),
            ("biliti", "ble"),
            ("entli", "ent"),
            ("ousli", "ous"),
            ("ation", "ate"),
            ("alism", "al"),
            ("aliti", "al"),
            ("iviti", "ive"),
            ("enci", "ence"),
            ("anci", "ance"),
            ("izer", "ize"),
            ("abli", "able"),
            ("alli", "al"),
            ("ator", "ate"),
            ("logi", "log"),
            ("eli", "e"),
        ],
        |stem| measure(stem) > 0,
    );

    // step 3
    apply_rules(
        &mut w,
        &[
            ("icate", "ic"),
            ("ative", ""),
            ("alize", "al"),
            ("iciti", "ic"),
            ("ical", "ic"),
            ("ful", ""),
            ("ness", ""),
        ],
        |stem| measure(stem) > 0,
    );

    // step 4 (the "ion" rule additionally needs the stem to end s or t)
    let applied = apply_rules(
        &mut w,
        &[
            ("ement", ""),
            ("ance", ""),
            ("ence", ""),
            ("able", ""),
            ("ible", ""),
            ("ment", ""),
            ("ant", ""),
            ("ent", ""),
            ("ism", ""),
            ("ate", ""),
            ("iti", ""),
            ("ous", ""),
            ("ive", ""),
            ("ize", ""),
            ("al", ""),
            ("er", ""),
            ("ic", ""),
            ("ou", ""),
        ],
        |stem| measure(stem) > 1,
    );
    if !applied && w.ends_with(b"ion") {
        let stem_len = w.len() - 3;
        let stem = &w[..stem_len];
        if measure(stem) > 1 && matches!(stem.last(), Some(b's' | b't')) {
            w.truncate(stem_len);
        }
    }

    // step 5a
    if w.ends_with(b"e") {
        let stem = &w[..w.len() - 1];
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            w.truncate(w.len() - 1);
        }
    }
    // step 5b
    if measure(&w) > 1 && ends_double_consonant(&w) && w.ends_with(b"l") {
        w.truncate(w.len() - 1);
    }

    String::from_utf8(w).unwrap_or_else(|_| token.to_string())
}
