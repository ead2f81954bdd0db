//! Latent Dirichlet allocation producing per-document topic distributions.
//!
//! The default inference is collapsed Gibbs sampling with a fixed sweep
//! budget. An online variational-Bayes mode is also selectable; it is the
//! only consumer of the `learning_decay`, `learning_offset` and
//! `batch_size` options — under Gibbs those three are accepted, recorded
//! in the spec, and deliberately ignored.
//!
//! Every output row is a length-`n_topics` non-negative vector summing to
//! one; documents with no in-vocabulary tokens get the uniform
//! distribution.

use std::collections::BTreeMap;

use rand::prelude::*;

use crate::error::{Error, Result};
use crate::preprocess::text::TokenizedCorpus;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdaMode {
    Gibbs,
    OnlineVariational,
}

#[derive(Debug, Clone)]
pub struct LdaOptions {
    pub n_topics: usize,
    pub doc_topic_prior: f64,
    pub topic_word_prior: f64,
    /// Gibbs sweeps over the corpus
    pub iterations: usize,
    pub mode: LdaMode,
    pub learning_decay: f64,
    pub learning_offset: f64,
    pub batch_size: usize,
}

impl Default for LdaOptions {
    fn default() -> Self {
        LdaOptions {
            n_topics: 10,
            doc_topic_prior: 0.1,
            topic_word_prior: 0.01,
            iterations: 200,
            mode: LdaMode::Gibbs,
            learning_decay: 0.7,
            learning_offset: 10.0,
            batch_size: 256,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LdaModel {
    vocab: BTreeMap<String, usize>,
    /// Gibbs: topic-word counts; variational: the lambda matrix.
    topic_word: Vec<Vec<f64>>,
    topic_totals: Vec<f64>,
    options: LdaOptions,
}

fn doc_word_ids(vocab: &BTreeMap<String, usize>, doc: &[String]) -> Vec<usize> {
    doc.iter().filter_map(|t| vocab.get(t).copied()).collect()
}

fn digamma(mut x: f64) -> f64 {
    let mut result = 0.0;
    while x < 12.0 {
        result -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    result + x.ln() - 0.5 * inv - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0))
}

impl LdaModel {
    pub fn fit(corpus: &TokenizedCorpus, options: LdaOptions, seed: u64) -> Result<Self> {
        if options.n_topics < 2 {
            return Err(Error::InvalidParam(format!(
                "LDA needs at least 2 topics, got {}",
                options.n_topics
            )));
        }
        if corpus.is_empty() {
            return Err(Error::InvalidData("cannot fit LDA on an empty corpus".into()));
        }
        let mut vocab = BTreeMap::new();
        for doc in &corpus.documents {
            for token in doc {
                let next = vocab.len();
                vocab.entry(token.clone()).or_insert(next);
            }
        }
        if vocab.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        match options.mode {
            LdaMode::Gibbs => Self::fit_gibbs(corpus, vocab, options, seed),
            LdaMode::OnlineVariational => Self::fit_variational(corpus, vocab, options, seed),
        }
    }

    fn fit_gibbs(
        corpus: &TokenizedCorpus,
        vocab: BTreeMap<String, usize>,
        options: LdaOptions,
        seed: u64,
    ) -> Result<Self> {
        let k = options.n_topics;
        let v = vocab.len();
        let alpha = options.doc_topic_prior.max(1e-6);
        let beta = options.topic_word_prior.max(1e-6);
        let docs: Vec<Vec<usize>> =
            corpus.documents.iter().map(|d| doc_word_ids(&vocab, d)).collect();

        let mut rng = StdRng::seed_from_u64(seed);
        let mut topic_word = vec![vec![0.0f64; v]; k];
        let mut topic_totals = vec![0.0f64; k];
        let mut doc_topic = vec![vec![0.0f64; k]; docs.len()];
        let mut assignments: Vec<Vec<usize>> = docs
            .iter()
            .map(|doc| doc.iter().map(|_| rng.gen_range(0..k)).collect())
            .collect();
        for (d, doc) in docs.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let z = assignments[d][i];
                topic_word[z][w] += 1.0;
                topic_totals[z] += 1.0;
                doc_topic[d][z] += 1.0;
            }
        }

        let mut weights = vec![0.0f64; k];
        for _ in 0..options.iterations {
            for (d, doc) in docs.iter().enumerate() {
                for (i, &w) in doc.iter().enumerate() {
                    let old = assignments[d][i];
                    topic_word[old][w] -= 1.0;
                    topic_totals[old] -= 1.0;
                    doc_topic[d][old] -= 1.0;

                    let mut total = 0.0;
                    for t in 0..k {
                        let p = (doc_topic[d][t] + alpha) * (topic_word[t][w] + beta)
                            / (topic_totals[t] + beta * v as f64);
                        total += p;
                        weights[t] = total;
                    }
                    let u: f64 = rng.gen_range(0.0..total);
                    let new = weights.partition_point(|&cum| cum <= u).min(k - 1);

                    assignments[d][i] = new;
                    topic_word[new][w] += 1.0;
                    topic_totals[new] += 1.0;
                    doc_topic[d][new] += 1.0;
                }
            }
        }
        Ok(LdaModel { vocab, topic_word, topic_totals, options })
    }

    fn fit_variational(
        corpus: &TokenizedCorpus,
        vocab: BTreeMap<String, usize>,
        options: LdaOptions,
        seed: u64,
    ) -> Result<Self> {
        let k = options.n_topics;
        let v = vocab.len();
        let beta = options.topic_word_prior.max(1e-6);
        let n_docs = corpus.len();
        let docs: Vec<Vec<(usize, f64)>> = corpus
            .documents
            .iter()
            .map(|d| {
                let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
                for &w in &doc_word_ids(&vocab, d) {
                    *counts.entry(w).or_insert(0.0) += 1.0;
                }
                counts.into_iter().collect()
            })
            .collect();

        let mut rng = StdRng::seed_from_u64(seed);
        let mut lambda: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..v).map(|_| 100.0 + rng.gen_range(0.0..1.0)).collect())
            .collect();

        let batch = options.batch_size.max(1);
        let mut update = 0usize;
        for chunk in docs.chunks(batch) {
            let elog_beta = expect_log_dirichlet(&lambda);
            let mut sstats = vec![vec![0.0f64; v]; k];
            for doc in chunk {
                let gamma = e_step(doc, &elog_beta, &options, &mut sstats);
                let _ = gamma;
            }
            let rho = (options.learning_offset + update as f64).powf(-options.learning_decay);
            let scale = n_docs as f64 / chunk.len() as f64;
            for t in 0..k {
                for w in 0..v {
                    lambda[t][w] = (1.0 - rho) * lambda[t][w] + rho * (beta + scale * sstats[t][w]);
                }
            }
            update += 1;
        }
        let topic_totals: Vec<f64> = lambda.iter().map(|row| row.iter().sum()).collect();
        Ok(LdaModel { vocab, topic_word: lambda, topic_totals, options })
    }

    /// Doc-topic distributions for a corpus; rows sum to one.
    pub fn transform(&self, corpus: &TokenizedCorpus, seed: u64) -> Vec<Vec<f64>> {
        match self.options.mode {
            LdaMode::Gibbs => self.transform_gibbs(corpus, seed),
            LdaMode::OnlineVariational => self.transform_variational(corpus),
        }
    }

    /// Fold-in sampling: global topic-word counts stay frozen; only the
    /// document's own topic counts evolve.
    fn transform_gibbs(&self, corpus: &TokenizedCorpus, seed: u64) -> Vec<Vec<f64>> {
        let k = self.options.n_topics;
        let v = self.vocab.len();
        let alpha = self.options.doc_topic_prior.max(1e-6);
        let beta = self.options.topic_word_prior.max(1e-6);
        let sweeps = 50;
        let mut rng = StdRng::seed_from_u64(seed);

        corpus
            .documents
            .iter()
            .map(|doc| {
                let words = doc_word_ids(&self.vocab, doc);
                if words.is_empty() {
                    return vec![1.0 / k as f64; k];
                }
                let mut local = vec![0.0f64; k];
                let mut z: Vec<usize> = words.iter().map(|_| rng.gen_range(0..k)).collect();
                for &t in &z {
                    local[t] += 1.0;
                }
                let mut weights = vec![0.0f64; k];
                for _ in 0..sweeps {
                    for (i, &w) in words.iter().enumerate() {
                        local[z[i]] -= 1.0;
                        let mut total = 0.0;
                        for t in 0..k {
                            let p = (local[t] + alpha) * (self.topic_word[t][w] + beta)
                                / (self.topic_totals[t] + beta * v as f64);
                            total += p;
                            weights[t] = total;
                        }
                        let u: f64 = rng.gen_range(0.0..total);
                        let new = weights.partition_point(|&cum| cum <= u).min(k - 1);
                        z[i] = new;
                        local[new] += 1.0;
                    }
                }
                let denom = words.len() as f64 + k as f64 * alpha;
                local.iter().map(|&c| (c + alpha) / denom).collect()
            })
            .collect()
    }

    fn transform_variational(&self, corpus: &TokenizedCorpus) -> Vec<Vec<f64>> {
        let k = self.options.n_topics;
        let elog_beta = expect_log_dirichlet(&self.topic_word);
        corpus
            .documents
            .iter()
            .map(|doc| {
                let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
                for &w in &doc_word_ids(&self.vocab, doc) {
                    *counts.entry(w).or_insert(0.0) += 1.0;
                }
                let pairs: Vec<(usize, f64)> = counts.into_iter().collect();
                if pairs.is_empty() {
                    return vec![1.0 / k as f64; k];
                }
                let mut sink = vec![vec![0.0f64; 0]; 0];
                let gamma = e_step(&pairs, &elog_beta, &self.options, &mut sink);
                let total: f64 = gamma.iter().sum();
                gamma.iter().map(|&g| g / total).collect()
            })
            .collect()
    }

    pub fn n_topics(&self) -> usize {
        self.options.n_topics
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocab.len()
    }
}

fn expect_log_dirichlet(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|row| {
            let total: f64 = row.iter().sum();
            let dg_total = digamma(total);
            row.iter().map(|&v| digamma(v) - dg_total).collect()
        })
        .collect()
}

/// Variational E-step for one document; returns gamma and accumulates
/// sufficient statistics when `sstats` is non-empty.
fn e_step(
    doc: &[(usize, f64)],
    elog_beta: &[Vec<f64>],
    options: &LdaOptions,
    sstats: &mut Vec<Vec<f64>>,
) -> Vec<f64> {
    let k = options.n_topics;
    let alpha = options.doc_topic_prior.max(1e-6);
    let mut gamma = vec![1.0f64; k];
    let mut phi = vec![vec![0.0f64; k]; doc.len()];
    for _ in 0..50 {
        let dg_sum = digamma(gamma.iter().sum());
        let elog_theta: Vec<f64> = gamma.iter().map(|&g| digamma(g) - dg_sum).collect();
        let mut new_gamma = vec![alpha; k];
        for (i, &(w, count)) in doc.iter().enumerate() {
            let mut row: Vec<f64> = (0..k).map(|t| (elog_theta[t] + elog_beta[t][w]).exp()).collect();
            let norm: f64 = row.iter().sum::<f64>().max(1e-300);
            for v in &mut row {
                *v /= norm;
            }
            for t in 0..k {
                new_gamma[t] += count * row[t];
            }
            phi[i] = row;
        }
        let delta: f64 =
            gamma.iter().zip(&new_gamma).map(|(a, b)| (a - b).abs()).sum::<f64>() / k as f64;
        gamma = new_gamma;
        if delta < 1e-3 {
            break;
        }
    }
    if !sstats.is_empty() {
        for (i, &(w, count)) in doc.iter().enumerate() {
            for t in 0..options.n_topics {
                sstats[t][w] += count * phi[i][t];
            }
        }
    }
    gamma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TextCorpus;
    use crate::preprocess::text::tokenize_and_stem;

    fn corpus(docs: &[&str]) -> TokenizedCorpus {
        let c = TextCorpus::new(
            "lda",
            docs.iter().map(|d| d.to_string()).collect(),
            vec![false; docs.len()],
        )
        .unwrap();
        tokenize_and_stem(&c)
    }

    #[test]
    fn digamma_known_values() {
        // psi(1) = -gamma, psi(0.5) = -gamma - 2 ln 2
        let euler = 0.5772156649015329;
        assert!((digamma(1.0) + euler).abs() < 1e-10);
        assert!((digamma(0.5) + euler + 2.0 * std::f64::consts::LN_2).abs() < 1e-10);
        // recurrence: psi(x+1) = psi(x) + 1/x
        assert!((digamma(4.2) - digamma(3.2) - 1.0 / 3.2).abs() < 1e-10);
    }

    #[test]
    fn rows_are_distributions_of_the_requested_width() {
        let c = corpus(&[
            "spacecraft command telemetry uplink",
            "memory leak crash pointer",
            "command uplink spacecraft antenna",
            "pointer crash segfault memory",
        ]);
        for mode in [LdaMode::Gibbs, LdaMode::OnlineVariational] {
            let opts = LdaOptions { n_topics: 10, iterations: 60, mode, ..Default::default() };
            let model = LdaModel::fit(&c, opts, 3).unwrap();
            let rows = model.transform(&c, 4);
            assert_eq!(rows.len(), 4);
            for row in &rows {
                assert_eq!(row.len(), 10);
                assert!(row.iter().all(|&v| v >= 0.0));
                let sum: f64 = row.iter().sum();
                assert!((sum - 1.0).abs() <= 1e-9, "row sums to {sum}");
            }
        }
    }

    #[test]
    fn disjoint_vocabularies_get_different_dominant_topics() {
        // two documents with no words in common, long sampling
        let c = corpus(&[
            "engine thruster nozzle fuel engine thruster nozzle fuel engine thruster",
            "database query index table database query index table database query",
        ]);
        let opts = LdaOptions { n_topics: 2, iterations: 300, ..Default::default() };
        let model = LdaModel::fit(&c, opts, 7).unwrap();
        let rows = model.transform(&c, 8);
        let argmax = |r: &Vec<f64>| if r[0] >= r[1] { 0 } else { 1 };
        assert_ne!(argmax(&rows[0]), argmax(&rows[1]));
    }

    #[test]
    fn unseen_or_empty_documents_fall_back_to_uniform() {
        let train = corpus(&["alpha beta gamma", "beta gamma delta"]);
        let opts = LdaOptions { n_topics: 4, iterations: 30, ..Default::default() };
        let model = LdaModel::fit(&train, opts, 1).unwrap();
        let test = corpus(&["zzz qqq www", ""]);
        let rows = model.transform(&test, 2);
        for row in rows {
            assert!(row.iter().all(|&v| (v - 0.25).abs() < 1e-12));
        }
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let c = corpus(&["alpha beta"]);
        let opts = LdaOptions { n_topics: 1, ..Default::default() };
        assert!(LdaModel::fit(&c, opts, 0).is_err());
        let empty_tokens = corpus(&["", ""]);
        assert!(matches!(
            LdaModel::fit(&empty_tokens, LdaOptions::default(), 0),
            Err(Error::EmptyVocabulary)
        ));
    }

    #[test]
    fn gibbs_fit_is_deterministic_under_seed() {
        let c = corpus(&["alpha beta gamma beta", "gamma delta alpha", "delta delta beta"]);
        let opts = LdaOptions { n_topics: 3, iterations: 40, ..Default::default() };
        let a = LdaModel::fit(&c, opts.clone(), 5).unwrap().transform(&c, 6);
        let b = LdaModel::fit(&c, opts, 5).unwrap().transform(&c, 6);
        assert_eq!(a, b);
    }
}
