//! The data pre-processing option space: numeric transforms and SMOTE for
//! defect data; vectorizers and LDA for text.
//!
//! A [`PreprocSpec`] names one preprocessor plus its parameters; [`fit`]
//! captures training-side statistics into a [`FittedTransform`] and
//! [`apply`] replays them without ever re-fitting. Text preprocessors
//! consume tokenized corpora and emit numeric datasets, so a fitted
//! transform always produces a [`Dataset`] for the learners.

pub mod lda;
pub mod scalers;
pub mod smote;
pub mod text;
pub mod vectorize;

pub use smote::smote;
pub use text::{tokenize_and_stem, TokenizedCorpus};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, TextCorpus};
use crate::domain::{validate_params, Domain, ParamDomain, ParamValue};
use crate::error::{Error, Result};
use lda::{LdaMode, LdaModel, LdaOptions};
use scalers::{RowNorm, ScalerState};
use vectorize::{VecNorm, Vocabulary};

/// Input to a preprocessor: either tabular rows or a tokenized corpus.
#[derive(Debug, Clone)]
pub enum TaskData {
    Tabular(Dataset),
    Text(TokenizedCorpus),
}

impl TaskData {
    pub fn labels(&self) -> &[bool] {
        match self {
            TaskData::Tabular(d) => &d.labels,
            TaskData::Text(c) => &c.labels,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            TaskData::Tabular(d) => d.len(),
            TaskData::Text(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn name(&self) -> &str {
        match self {
            TaskData::Tabular(d) => &d.name,
            TaskData::Text(c) => &c.name,
        }
    }
}

/// The preprocessors of the tuning space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PreprocKind {
    StandardScaler,
    MinMaxScaler,
    MaxAbsScaler,
    RobustScaler,
    KernelCenterer,
    QuantileTransformer,
    Normalizer,
    Binarizer,
    Smote,
    CountVectorizer,
    TfidfVectorizer,
    HashingVectorizer,
    Lda,
    NoPreproc,
}

impl PreprocKind {
    /// The preprocessor choices offered for the defect task: the nine
    /// tunable entries plus the do-nothing option.
    pub fn defect_kinds() -> [PreprocKind; 10] {
        [
            PreprocKind::StandardScaler,
            PreprocKind::MinMaxScaler,
            PreprocKind::MaxAbsScaler,
            PreprocKind::RobustScaler,
            PreprocKind::KernelCenterer,
            PreprocKind::QuantileTransformer,
            PreprocKind::Normalizer,
            PreprocKind::Binarizer,
            PreprocKind::Smote,
            PreprocKind::NoPreproc,
        ]
    }

    /// The vectorizers offered for the text task.
    pub fn text_kinds() -> [PreprocKind; 4] {
        [
            PreprocKind::CountVectorizer,
            PreprocKind::TfidfVectorizer,
            PreprocKind::HashingVectorizer,
            PreprocKind::Lda,
        ]
    }

    pub fn is_text(self) -> bool {
        matches!(
            self,
            PreprocKind::CountVectorizer
                | PreprocKind::TfidfVectorizer
                | PreprocKind::HashingVectorizer
                | PreprocKind::Lda
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            PreprocKind::StandardScaler => "StandardScaler",
            PreprocKind::MinMaxScaler => "MinMaxScaler",
            PreprocKind::MaxAbsScaler => "MaxAbsScaler",
            PreprocKind::RobustScaler => "RobustScaler",
            PreprocKind::KernelCenterer => "KernelCenterer",
            PreprocKind::QuantileTransformer => "QuantileTransformer",
            PreprocKind::Normalizer => "Normalizer",
            PreprocKind::Binarizer => "Binarizer",
            PreprocKind::Smote => "SMOTE",
            PreprocKind::CountVectorizer => "CountVectorizer",
            PreprocKind::TfidfVectorizer => "TfidfVectorizer",
            PreprocKind::HashingVectorizer => "HashingVectorizer",
            PreprocKind::Lda => "LatentDirichletAllocation",
            PreprocKind::NoPreproc => "NoPreproc",
        }
    }

    /// Tunable ranges for this preprocessor.
    pub fn param_domains(self) -> Vec<ParamDomain> {
        match self {
            PreprocKind::StandardScaler
            | PreprocKind::MinMaxScaler
            | PreprocKind::MaxAbsScaler
            | PreprocKind::KernelCenterer
            | PreprocKind::NoPreproc => vec![],
            PreprocKind::RobustScaler => vec![
                ParamDomain::new("quantile_lo", Domain::Int { lo: 0, hi: 50 }),
                ParamDomain::new("quantile_hi", Domain::Int { lo: 51, hi: 100 }),
            ],
            PreprocKind::QuantileTransformer => vec![
                ParamDomain::new("n_quantiles", Domain::Int { lo: 100, hi: 1000 }),
                ParamDomain::new("subsample", Domain::Int { lo: 1000, hi: 100_000 }),
                ParamDomain::new("output_distribution", Domain::cat(["normal", "uniform"])),
            ],
            PreprocKind::Normalizer => {
                vec![ParamDomain::new("norm", Domain::cat(["l1", "l2", "max"]))]
            }
            PreprocKind::Binarizer => {
                vec![ParamDomain::new("threshold", Domain::Real { lo: 0.0, hi: 100.0 })]
            }
            PreprocKind::Smote => vec![
                ParamDomain::new("n_neighbors", Domain::Int { lo: 1, hi: 20 }),
                ParamDomain::new("n_synthetics", Domain::IntChoice(vec![50, 100, 200, 400])),
                ParamDomain::new("minkowski_exponent", Domain::Real { lo: 0.1, hi: 5.0 }),
            ],
            PreprocKind::CountVectorizer => vec![
                ParamDomain::new("max_df", Domain::Int { lo: 100, hi: 1000 }),
                ParamDomain::new("min_df", Domain::Int { lo: 1, hi: 10 }),
            ],
            PreprocKind::TfidfVectorizer => vec![
                ParamDomain::new("max_df", Domain::Int { lo: 100, hi: 1000 }),
                ParamDomain::new("min_df", Domain::Int { lo: 1, hi: 10 }),
                ParamDomain::new("norm", Domain::cat(["l1", "l2", "none"])),
            ],
            PreprocKind::HashingVectorizer => vec![
                ParamDomain::new(
                    "n_features",
                    Domain::IntChoice(vec![1000, 2000, 4000, 6000, 8000, 10000]),
                ),
                ParamDomain::new("norm", Domain::cat(["l1", "l2", "none"])),
            ],
            PreprocKind::Lda => vec![
                ParamDomain::new("n_components", Domain::Int { lo: 10, hi: 50 }),
                ParamDomain::new("doc_topic_prior", Domain::Real { lo: 1e-6, hi: 1.0 }),
                ParamDomain::new("topic_word_prior", Domain::Real { lo: 1e-6, hi: 1.0 }),
                ParamDomain::new("learning_decay", Domain::Real { lo: 0.51, hi: 1.0 }),
                ParamDomain::new("learning_offset", Domain::Real { lo: 1.0, hi: 50.0 }),
                ParamDomain::new("batch_size", Domain::IntChoice(vec![150, 180, 210, 250, 300])),
                // inference-mode switch; not part of the tuned space
                ParamDomain::new("inference", Domain::cat(["gibbs", "online"])),
            ],
        }
    }
}

/// A preprocessor plus its parameter settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocSpec {
    pub kind: PreprocKind,
    pub params: BTreeMap<String, ParamValue>,
}

impl PreprocSpec {
    pub fn new(kind: PreprocKind, params: BTreeMap<String, ParamValue>) -> Result<Self> {
        let spec = PreprocSpec { kind, params };
        spec.validate()?;
        Ok(spec)
    }

    pub fn plain(kind: PreprocKind) -> Self {
        PreprocSpec { kind, params: BTreeMap::new() }
    }

    pub fn validate(&self) -> Result<()> {
        validate_params(self.kind.name(), self.params.iter(), &self.kind.param_domains())
    }

    fn real(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).and_then(|v| v.as_f64()).unwrap_or(default)
    }

    fn int(&self, name: &str, default: i64) -> i64 {
        self.params.get(name).and_then(|v| v.as_i64()).unwrap_or(default)
    }

    fn cat<'a>(&'a self, name: &str, default: &'a str) -> &'a str {
        self.params.get(name).and_then(|v| v.as_str()).unwrap_or(default)
    }

    fn vec_norm(&self, default: &str) -> Result<VecNorm> {
        match self.cat("norm", default) {
            "l1" => Ok(VecNorm::L1),
            "l2" => Ok(VecNorm::L2),
            "none" => Ok(VecNorm::None),
            other => Err(Error::InvalidParam(format!("norm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
enum FitState {
    Identity,
    Scaler(ScalerState),
    /// SMOTE is an augmentation, not a statistic: applying replays the
    /// recorded seed on whatever dataset it is handed.
    Smote { seed: u64 },
    Vocab { vocab: Vocabulary, idf: Option<Vec<f64>>, norm: VecNorm },
    Hashing { n_features: usize, norm: VecNorm },
    Lda { model: Box<LdaModel>, transform_seed: u64 },
}

/// Fitted preprocessing statistics; immutable, applying never re-fits.
#[derive(Debug, Clone)]
pub struct FittedTransform {
    pub spec: PreprocSpec,
    fitted_width: Option<usize>,
    state: FitState,
}

/// Capture the transform's statistics from training data.
pub fn fit(spec: &PreprocSpec, train: &TaskData, seed: u64) -> Result<FittedTransform> {
    spec.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidData(format!("cannot fit {} on empty data", spec.kind.name())));
    }
    match (spec.kind.is_text(), train) {
        (true, TaskData::Tabular(_)) => {
            return Err(Error::Incompatible(format!(
                "{} applies to text corpora, got tabular data",
                spec.kind.name()
            )))
        }
        (false, TaskData::Text(_)) => {
            return Err(Error::Incompatible(format!(
                "{} applies to tabular data, got a text corpus",
                spec.kind.name()
            )))
        }
        _ => {}
    }

    let (state, width) = match (spec.kind, train) {
        (PreprocKind::NoPreproc, TaskData::Tabular(d)) => {
            (FitState::Identity, Some(d.n_features()))
        }
        (PreprocKind::StandardScaler, TaskData::Tabular(d)) => {
            (FitState::Scaler(scalers::fit_standard(&d.rows)), Some(d.n_features()))
        }
        (PreprocKind::MinMaxScaler, TaskData::Tabular(d)) => {
            (FitState::Scaler(scalers::fit_minmax(&d.rows)), Some(d.n_features()))
        }
        (PreprocKind::MaxAbsScaler, TaskData::Tabular(d)) => {
            (FitState::Scaler(scalers::fit_maxabs(&d.rows)), Some(d.n_features()))
        }
        (PreprocKind::RobustScaler, TaskData::Tabular(d)) => {
            let lo = spec.int("quantile_lo", 25) as f64;
            let hi = spec.int("quantile_hi", 75) as f64;
            (FitState::Scaler(scalers::fit_robust(&d.rows, lo, hi)), Some(d.n_features()))
        }
        (PreprocKind::KernelCenterer, TaskData::Tabular(d)) => {
            (FitState::Scaler(scalers::fit_kernel_centerer(&d.rows)), Some(d.n_features()))
        }
        (PreprocKind::QuantileTransformer, TaskData::Tabular(d)) => {
            let n_q = spec.int("n_quantiles", 1000) as usize;
            let sub = spec.int("subsample", 100_000) as usize;
            let normal = spec.cat("output_distribution", "uniform") == "normal";
            (
                FitState::Scaler(scalers::fit_quantile(&d.rows, n_q, sub, normal, seed)),
                Some(d.n_features()),
            )
        }
        (PreprocKind::Normalizer, TaskData::Tabular(d)) => {
            let norm = match spec.cat("norm", "l2") {
                "l1" => RowNorm::L1,
                "l2" => RowNorm::L2,
                "max" => RowNorm::Max,
                other => return Err(Error::InvalidParam(format!("norm '{other}'"))),
            };
            (FitState::Scaler(ScalerState::Normalizer { norm }), Some(d.n_features()))
        }
        (PreprocKind::Binarizer, TaskData::Tabular(d)) => (
            FitState::Scaler(ScalerState::Binarizer { threshold: spec.real("threshold", 0.0) }),
            Some(d.n_features()),
        ),
        (PreprocKind::Smote, TaskData::Tabular(d)) => {
            (FitState::Smote { seed }, Some(d.n_features()))
        }
        (PreprocKind::CountVectorizer, TaskData::Text(c)) => {
            let vocab = vectorize::build_vocabulary(
                c,
                spec.int("min_df", 1) as usize,
                spec.int("max_df", i64::MAX >> 1) as usize,
            )?;
            (FitState::Vocab { vocab, idf: None, norm: VecNorm::None }, None)
        }
        (PreprocKind::TfidfVectorizer, TaskData::Text(c)) => {
            let vocab = vectorize::build_vocabulary(
                c,
                spec.int("min_df", 1) as usize,
                spec.int("max_df", i64::MAX >> 1) as usize,
            )?;
            let idf = vectorize::idf_weights(&vocab);
            (FitState::Vocab { vocab, idf: Some(idf), norm: spec.vec_norm("l2")? }, None)
        }
        (PreprocKind::HashingVectorizer, TaskData::Text(_)) => (
            FitState::Hashing {
                n_features: spec.int("n_features", 1000) as usize,
                norm: spec.vec_norm("none")?,
            },
            None,
        ),
        (PreprocKind::Lda, TaskData::Text(c)) => {
            let mode = match spec.cat("inference", "gibbs") {
                "online" => LdaMode::OnlineVariational,
                _ => LdaMode::Gibbs,
            };
            let options = LdaOptions {
                n_topics: spec.int("n_components", 10) as usize,
                doc_topic_prior: spec.real("doc_topic_prior", 0.1),
                topic_word_prior: spec.real("topic_word_prior", 0.01),
                iterations: 200,
                mode,
                learning_decay: spec.real("learning_decay", 0.7),
                learning_offset: spec.real("learning_offset", 10.0),
                batch_size: spec.int("batch_size", 256) as usize,
            };
            let model = LdaModel::fit(c, options, seed)?;
            (FitState::Lda { model: Box::new(model), transform_seed: seed.wrapping_add(1) }, None)
        }
        _ => unreachable!("kind/data compatibility checked above"),
    };
    Ok(FittedTransform { spec: spec.clone(), fitted_width: width, state })
}

/// Apply a fitted transform; labels (and LOC for tabular data) pass
/// through unchanged.
pub fn apply(ft: &FittedTransform, data: &TaskData) -> Result<Dataset> {
    match (&ft.state, data) {
        (FitState::Identity, TaskData::Tabular(d)) => {
            check_width(ft, d)?;
            Ok(d.clone())
        }
        (FitState::Scaler(state), TaskData::Tabular(d)) => {
            check_width(ft, d)?;
            let rows = scalers::apply_scaler(state, &d.rows);
            Dataset::new(
                d.name.clone(),
                d.feature_names.clone(),
                rows,
                d.labels.clone(),
                d.loc.clone(),
            )
        }
        (FitState::Smote { seed }, TaskData::Tabular(d)) => {
            check_width(ft, d)?;
            let k = ft.spec.int("n_neighbors", 5) as usize;
            let m = ft.spec.int("n_synthetics", 100) as usize;
            let r = ft.spec.real("minkowski_exponent", 2.0);
            smote::smote(d, k, m, r, *seed)
        }
        (FitState::Vocab { vocab, idf, norm }, TaskData::Text(c)) => {
            let rows = match idf {
                Some(idf) => vectorize::tfidf_rows(vocab, idf, c, *norm),
                None => vectorize::count_rows(vocab, c),
            };
            let names: Vec<String> = vocab.index.keys().cloned().collect();
            Dataset::new(c.name.clone(), names, rows, c.labels.clone(), None)
        }
        (FitState::Hashing { n_features, norm }, TaskData::Text(c)) => {
            let rows = vectorize::hashing_rows(c, *n_features, *norm);
            let names = (0..*n_features).map(|i| format!("h{i}")).collect();
            Dataset::new(c.name.clone(), names, rows, c.labels.clone(), None)
        }
        (FitState::Lda { model, transform_seed }, TaskData::Text(c)) => {
            let rows = model.transform(c, *transform_seed);
            let names = (0..model.n_topics()).map(|i| format!("topic{i}")).collect();
            Dataset::new(c.name.clone(), names, rows, c.labels.clone(), None)
        }
        (_, TaskData::Tabular(_)) => Err(Error::Incompatible(format!(
            "{} cannot apply to tabular data",
            ft.spec.kind.name()
        ))),
        (_, TaskData::Text(_)) => Err(Error::Incompatible(format!(
            "{} cannot apply to a text corpus",
            ft.spec.kind.name()
        ))),
    }
}

fn check_width(ft: &FittedTransform, d: &Dataset) -> Result<()> {
    if let Some(expected) = ft.fitted_width {
        if d.n_features() != expected {
            return Err(Error::DimensionMismatch { expected, got: d.n_features() });
        }
    }
    Ok(())
}

/// Fit LDA on a corpus and return its own doc-topic rows as a dataset.
pub fn lda_fit_transform(
    corpus: &TextCorpus,
    n_topics: usize,
    doc_topic_prior: f64,
    topic_word_prior: f64,
    iterations: usize,
    seed: u64,
) -> Result<Dataset> {
    let tokens = tokenize_and_stem(corpus);
    let options = LdaOptions {
        n_topics,
        doc_topic_prior,
        topic_word_prior,
        iterations,
        ..Default::default()
    };
    let model = LdaModel::fit(&tokens, options, seed)?;
    let rows = model.transform(&tokens, seed.wrapping_add(1));
    let names = (0..n_topics).map(|i| format!("topic{i}")).collect();
    Dataset::new(corpus.name.clone(), names, rows, corpus.labels.clone(), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TextCorpus;

    fn tabular() -> TaskData {
        TaskData::Tabular(
            Dataset::new(
                "t",
                vec!["x".into(), "y".into()],
                vec![vec![0.0, 3.0], vec![10.0, 4.0], vec![5.0, 0.0]],
                vec![true, false, true],
                Some(vec![5, 10, 15]),
            )
            .unwrap(),
        )
    }

    fn text() -> TaskData {
        let c = TextCorpus::new(
            "c",
            vec!["alpha beta alpha".into(), "beta gamma".into(), "alpha gamma delta".into()],
            vec![true, false, true],
        )
        .unwrap();
        TaskData::Text(tokenize_and_stem(&c))
    }

    #[test]
    fn minmax_pipeline_maps_training_data_into_unit_box() {
        let data = tabular();
        let ft = fit(&PreprocSpec::plain(PreprocKind::MinMaxScaler), &data, 0).unwrap();
        let out = apply(&ft, &data).unwrap();
        assert!(out.rows.iter().flatten().all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(out.labels, data.labels().to_vec());
        assert_eq!(out.loc, Some(vec![5, 10, 15]));
    }

    #[test]
    fn kind_data_mismatches_are_rejected() {
        assert!(matches!(
            fit(&PreprocSpec::plain(PreprocKind::CountVectorizer), &tabular(), 0),
            Err(Error::Incompatible(_))
        ));
        assert!(matches!(
            fit(&PreprocSpec::plain(PreprocKind::StandardScaler), &text(), 0),
            Err(Error::Incompatible(_))
        ));
    }

    #[test]
    fn apply_checks_tabular_width() {
        let data = tabular();
        let ft = fit(&PreprocSpec::plain(PreprocKind::StandardScaler), &data, 0).unwrap();
        let narrow = TaskData::Tabular(
            Dataset::new("n", vec!["only".into()], vec![vec![1.0]], vec![true], None).unwrap(),
        );
        assert!(matches!(apply(&ft, &narrow), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn hashing_vectorizer_output_dimension_is_exact() {
        let mut params = BTreeMap::new();
        params.insert("n_features".into(), ParamValue::Int(1000));
        params.insert("norm".into(), ParamValue::Cat("none".into()));
        let spec = PreprocSpec::new(PreprocKind::HashingVectorizer, params).unwrap();
        let data = text();
        let out = apply(&fit(&spec, &data, 0).unwrap(), &data).unwrap();
        assert_eq!(out.n_features(), 1000);
    }

    #[test]
    fn count_vectorizer_respects_min_df() {
        let mut params = BTreeMap::new();
        params.insert("min_df".into(), ParamValue::Int(2));
        params.insert("max_df".into(), ParamValue::Int(1000));
        let spec = PreprocSpec::new(PreprocKind::CountVectorizer, params).unwrap();
        let data = text();
        let out = apply(&fit(&spec, &data, 0).unwrap(), &data).unwrap();
        // alpha (df 2), beta (df 2), gamma (df 2); delta (df 1) filtered
        assert_eq!(out.feature_names, vec!["alpha", "beta", "gamma"]);
    }

    #[test]
    fn smote_fit_apply_augments_deterministically() {
        let data = TaskData::Tabular(
            Dataset::new(
                "s",
                vec!["x".into()],
                vec![vec![0.0], vec![1.0], vec![5.0], vec![6.0], vec![7.0]],
                vec![true, true, false, false, false],
                None,
            )
            .unwrap(),
        );
        let mut params = BTreeMap::new();
        params.insert("n_neighbors".into(), ParamValue::Int(1));
        params.insert("n_synthetics".into(), ParamValue::Int(50));
        params.insert("minkowski_exponent".into(), ParamValue::Real(2.0));
        let spec = PreprocSpec::new(PreprocKind::Smote, params).unwrap();
        let ft = fit(&spec, &data, 9).unwrap();
        let out = apply(&ft, &data).unwrap();
        assert_eq!(out.len(), 5 + 50);
        let again = apply(&ft, &data).unwrap();
        assert_eq!(out.rows, again.rows);
    }

    #[test]
    fn lda_fit_transform_returns_topic_distributions() {
        let c = TextCorpus::new(
            "lda",
            vec![
                "command uplink telemetry".into(),
                "memory fault crash".into(),
                "uplink antenna command".into(),
            ],
            vec![true, false, true],
        )
        .unwrap();
        let out = lda_fit_transform(&c, 10, 0.1, 0.01, 50, 3).unwrap();
        assert_eq!(out.n_features(), 10);
        for row in &out.rows {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
        assert_eq!(out.labels, c.labels);
    }
}
