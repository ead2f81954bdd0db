//! Count, tf-idf and feature-hashing vectorizers over tokenized corpora.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::preprocess::scalers::{normalize_row, RowNorm};
use crate::preprocess::text::TokenizedCorpus;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VecNorm {
    None,
    L1,
    L2,
}

impl VecNorm {
    fn apply(self, row: Vec<f64>) -> Vec<f64> {
        match self {
            VecNorm::None => row,
            VecNorm::L1 => normalize_row(&row, RowNorm::L1),
            VecNorm::L2 => normalize_row(&row, RowNorm::L2),
        }
    }
}

/// Vocabulary with document frequencies from the training corpus; tokens
/// outside `min_df..=max_df` document counts are dropped. The vocabulary is
/// ordered lexicographically so feature indices are reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    pub index: BTreeMap<String, usize>,
    pub doc_freq: Vec<usize>,
    pub n_docs: usize,
}

pub fn build_vocabulary(corpus: &TokenizedCorpus, min_df: usize, max_df: usize) -> Result<Vocabulary> {
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in &corpus.documents {
        let mut seen: Vec<&str> = doc.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let mut index = BTreeMap::new();
    let mut doc_freq = Vec::new();
    for (token, count) in df {
        if count >= min_df && count <= max_df {
            index.insert(token.to_string(), doc_freq.len());
            doc_freq.push(count);
        }
    }
    if index.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    Ok(Vocabulary { index, doc_freq, n_docs: corpus.len() })
}

pub fn count_rows(vocab: &Vocabulary, corpus: &TokenizedCorpus) -> Vec<Vec<f64>> {
    corpus
        .documents
        .iter()
        .map(|doc| {
            let mut row = vec![0.0; vocab.index.len()];
            for token in doc {
                if let Some(&j) = vocab.index.get(token) {
                    row[j] += 1.0;
                }
            }
            row
        })
        .collect()
}

/// Smoothed idf: ln((1+n)/(1+df)) + 1.
pub fn idf_weights(vocab: &Vocabulary) -> Vec<f64> {
    vocab
        .doc_freq
        .iter()
        .map(|&df| ((1.0 + vocab.n_docs as f64) / (1.0 + df as f64)).ln() + 1.0)
        .collect()
}

pub fn tfidf_rows(
    vocab: &Vocabulary,
    idf: &[f64],
    corpus: &TokenizedCorpus,
    norm: VecNorm,
) -> Vec<Vec<f64>> {
    count_rows(vocab, corpus)
        .into_iter()
        .map(|row| {
            let weighted: Vec<f64> = row.iter().zip(idf).map(|(tf, w)| tf * w).collect();
            norm.apply(weighted)
        })
        .collect()
}

/// FNV-1a, the stable token hash behind the hashing vectorizer.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Bucket token counts into a fixed number of features. No sign flipping,
/// so entries stay non-negative.
pub fn hashing_rows(corpus: &TokenizedCorpus, n_features: usize, norm: VecNorm) -> Vec<Vec<f64>> {
    corpus
        .documents
        .iter()
        .map(|doc| {
            let mut row = vec![0.0; n_features];
            for token in doc {
                let j = (fnv1a(token.as_bytes()) % n_features as u64) as usize;
                row[j] += 1.0;
            }
            norm.apply(row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tokens(docs: &[&str]) -> TokenizedCorpus {
        TokenizedCorpus {
            name: "t".into(),
            documents: docs
                .iter()
                .map(|d| d.split_whitespace().map(str::to_string).collect())
                .collect(),
            labels: vec![false; docs.len()],
        }
    }

    #[test]
    fn min_df_filters_rare_tokens() {
        let c = tokens(&["a b", "a c"]);
        let v = build_vocabulary(&c, 2, 1000).unwrap();
        assert_eq!(v.index.len(), 1);
        assert!(v.index.contains_key("a"));
    }

    #[test]
    fn max_df_filters_ubiquitous_tokens() {
        let c = tokens(&["a b", "a c", "a d"]);
        let v = build_vocabulary(&c, 1, 2).unwrap();
        assert!(!v.index.contains_key("a"));
        assert_eq!(v.index.len(), 3);
    }

    #[test]
    fn empty_vocabulary_is_an_error() {
        let c = tokens(&["a", "a"]);
        assert!(matches!(build_vocabulary(&c, 3, 1000), Err(Error::EmptyVocabulary)));
    }

    #[test]
    fn counts_are_per_document_token_tallies() {
        let c = tokens(&["a b a", "b"]);
        let v = build_vocabulary(&c, 1, 10).unwrap();
        let rows = count_rows(&v, &c);
        // vocabulary sorted: a=0, b=1
        assert_eq!(rows, vec![vec![2.0, 1.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn tfidf_l2_rows_have_unit_norm_or_are_zero() {
        let c = tokens(&["a b a", "b c", ""]);
        let v = build_vocabulary(&c, 1, 10).unwrap();
        let idf = idf_weights(&v);
        let rows = tfidf_rows(&v, &idf, &c, VecNorm::L2);
        for row in &rows[..2] {
            let n: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-12);
        }
        assert!(rows[2].iter().all(|&v| v == 0.0));
        // hand-check the idf of token "b" (df=2, n=3): ln(4/3)+1
        let j = v.index["b"];
        assert_abs_diff_eq!(idf[j], (4.0f64 / 3.0).ln() + 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hashing_has_fixed_dimension_and_nonnegative_entries() {
        let c = tokens(&["alpha beta gamma", "delta epsilon"]);
        let rows = hashing_rows(&c, 1000, VecNorm::None);
        assert!(rows.iter().all(|r| r.len() == 1000));
        assert!(rows.iter().flatten().all(|&v| v >= 0.0));
        assert_eq!(rows[0].iter().sum::<f64>(), 3.0);
        // same text hashes identically
        let again = hashing_rows(&c, 1000, VecNorm::None);
        assert_eq!(rows, again);
    }
}
