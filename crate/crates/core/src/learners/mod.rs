//! The classifier zoo behind one train/predict contract.
//!
//! Every learner is implemented here from first principles and trains
//! deterministically given `(spec, data, seed)`. Single-class training data
//! always yields a constant predictor, so the optimizers never have to
//! special-case degenerate splits.

mod forest;
mod knn;
mod logistic;
mod naive_bayes;
mod svm;
mod tree;

pub use forest::ForestModel;
pub use knn::KnnModel;
pub use logistic::LogisticModel;
pub use naive_bayes::NaiveBayesModel;
pub use svm::SvmModel;
pub use tree::{Criterion, Splitter, TreeModel};

use std::collections::BTreeMap;

use rand::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::domain::{validate_params, Domain, ParamDomain, ParamValue};
use crate::error::{Error, Result};

/// The learners explored by the tuning experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LearnerKind {
    DecisionTree,
    RandomForest,
    LogisticRegression,
    MultinomialNb,
    Knn,
    /// Hinge-loss linear classifier kept for the text-mining comparison
    /// treatments; not part of the tuned option tree unless enabled.
    LinearSvm,
}

impl LearnerKind {
    /// The five learners of the tuned option space.
    pub fn tuned() -> [LearnerKind; 5] {
        [
            LearnerKind::DecisionTree,
            LearnerKind::RandomForest,
            LearnerKind::LogisticRegression,
            LearnerKind::MultinomialNb,
            LearnerKind::Knn,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::DecisionTree => "DecisionTree",
            LearnerKind::RandomForest => "RandomForest",
            LearnerKind::LogisticRegression => "LogisticRegression",
            LearnerKind::MultinomialNb => "MultinomialNB",
            LearnerKind::Knn => "KNeighbors",
            LearnerKind::LinearSvm => "LinearSVM",
        }
    }

    /// Tunable parameter ranges for this learner.
    pub fn param_domains(self) -> Vec<ParamDomain> {
        match self {
            LearnerKind::DecisionTree => vec![
                ParamDomain::new("criterion", Domain::cat(["gini", "entropy"])),
                ParamDomain::new("splitter", Domain::cat(["best", "random"])),
                ParamDomain::new("min_samples_split", Domain::Real { lo: 0.0, hi: 1.0 }),
            ],
            LearnerKind::RandomForest => vec![
                ParamDomain::new("n_estimators", Domain::Int { lo: 50, hi: 150 }),
                ParamDomain::new("criterion", Domain::cat(["gini", "entropy"])),
                ParamDomain::new("min_samples_split", Domain::Real { lo: 0.0, hi: 1.0 }),
            ],
            LearnerKind::LogisticRegression => vec![
                ParamDomain::new("penalty", Domain::cat(["l1", "l2"])),
                ParamDomain::new("tol", Domain::Real { lo: 0.0, hi: 0.1 }),
                ParamDomain::new("C", Domain::Int { lo: 1, hi: 500 }),
            ],
            LearnerKind::MultinomialNb => {
                vec![ParamDomain::new("alpha", Domain::Real { lo: 0.0, hi: 0.1 })]
            }
            LearnerKind::Knn => vec![
                ParamDomain::new("n_neighbors", Domain::Int { lo: 2, hi: 25 }),
                ParamDomain::new("weights", Domain::cat(["uniform", "distance"])),
                ParamDomain::new("metric", Domain::cat(["minkowski", "chebyshev"])),
                ParamDomain::new("p", Domain::Int { lo: 1, hi: 15 }),
            ],
            LearnerKind::LinearSvm => vec![],
        }
    }
}

impl std::str::FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "decisiontree" | "dt" | "cart" => Ok(LearnerKind::DecisionTree),
            "randomforest" | "rf" => Ok(LearnerKind::RandomForest),
            "logisticregression" | "lr" | "logistic" => Ok(LearnerKind::LogisticRegression),
            "multinomialnb" | "nb" => Ok(LearnerKind::MultinomialNb),
            "kneighbors" | "knn" => Ok(LearnerKind::Knn),
            "linearsvm" | "svm" => Ok(LearnerKind::LinearSvm),
            other => Err(Error::InvalidParam(format!("unknown learner '{other}'"))),
        }
    }
}

/// A learner plus its hyperparameter settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    pub params: BTreeMap<String, ParamValue>,
}

impl LearnerSpec {
    pub fn new(kind: LearnerKind, params: BTreeMap<String, ParamValue>) -> Result<Self> {
        let spec = LearnerSpec { kind, params };
        spec.validate()?;
        Ok(spec)
    }

    /// The default-parameters mode used by the untuned treatments.
    pub fn defaults(kind: LearnerKind) -> Self {
        let mut params = BTreeMap::new();
        let mut set = |k: &str, v: ParamValue| {
            params.insert(k.to_string(), v);
        };
        match kind {
            LearnerKind::DecisionTree => {
                set("criterion", ParamValue::Cat("gini".into()));
                set("splitter", ParamValue::Cat("best".into()));
                set("min_samples_split", ParamValue::Real(0.0));
            }
            LearnerKind::RandomForest => {
                set("n_estimators", ParamValue::Int(100));
                set("criterion", ParamValue::Cat("gini".into()));
                set("min_samples_split", ParamValue::Real(0.0));
            }
            LearnerKind::LogisticRegression => {
                set("penalty", ParamValue::Cat("l2".into()));
                set("tol", ParamValue::Real(1e-4));
                set("C", ParamValue::Int(1));
            }
            // the upper end of the tuning range; the classical 1.0 default
            // lies outside it
            LearnerKind::MultinomialNb => set("alpha", ParamValue::Real(0.1)),
            LearnerKind::Knn => {
                set("n_neighbors", ParamValue::Int(5));
                set("weights", ParamValue::Cat("uniform".into()));
                set("metric", ParamValue::Cat("minkowski".into()));
                set("p", ParamValue::Int(2));
            }
            LearnerKind::LinearSvm => {}
        }
        LearnerSpec { kind, params }
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
}

#[derive(Debug, Clone)]
enum Fitted {
    /// Single-class training data: always answer that class.
    Constant(bool),
    Tree(TreeModel),
    Forest(ForestModel),
    Logistic(LogisticModel),
    NaiveBayes(NaiveBayesModel),
    Knn(KnnModel),
    Svm(SvmModel),
}

/// A fitted classifier; immutable and shareable across threads.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub spec: LearnerSpec,
    pub training_feature_count: usize,
    fitted: Fitted,
}

impl TrainedModel {
    /// Classify one row. Errors only on a feature-count mismatch.
    pub fn predict(&self, row: &[f64]) -> Result<bool> {
        if row.len() != self.training_feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.training_feature_count,
                got: row.len(),
            });
        }
        Ok(match &self.fitted {
            Fitted::Constant(label) => *label,
            Fitted::Tree(m) => m.predict(row),
            Fitted::Forest(m) => m.predict(row),
            Fitted::Logistic(m) => m.predict(row),
            Fitted::NaiveBayes(m) => m.predict(row),
            Fitted::Knn(m) => m.predict(row),
            Fitted::Svm(m) => m.predict(row),
        })
    }

    /// Classify a batch of rows.
    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Result<Vec<bool>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    /// Number of ensemble members (1 for non-ensemble learners).
    pub fn n_members(&self) -> usize {
        match &self.fitted {
            Fitted::Forest(m) => m.n_trees(),
            _ => 1,
        }
    }

    /// Loss recorded per optimizer epoch, where the learner tracks one.
    pub fn loss_trace(&self) -> Option<&[f64]> {
        match &self.fitted {
            Fitted::Logistic(m) => Some(m.loss_trace()),
            _ => None,
        }
    }
}

fn tree_params(spec: &LearnerSpec, n_train: usize) -> Result<tree::TreeParams> {
    let criterion = match spec.cat("criterion", "gini") {
        "gini" => Criterion::Gini,
        "entropy" => Criterion::Entropy,
        other => return Err(Error::InvalidParam(format!("criterion '{other}'"))),
    };
    let splitter = match spec.cat("splitter", "best") {
        "best" => Splitter::Best,
        "random" => Splitter::Random,
        other => return Err(Error::InvalidParam(format!("splitter '{other}'"))),
    };
    // fraction of the training set, at least 2 rows
    let frac = spec.real("min_samples_split", 0.0);
    let min_split_rows = ((frac * n_train as f64).ceil() as usize).max(2);
    Ok(tree::TreeParams { criterion, splitter, min_split_rows, max_features: None })
}

/// Fit `spec` on `data`. Deterministic in `(spec, data, seed)`.
pub fn train(spec: &LearnerSpec, data: &Dataset, seed: u64) -> Result<TrainedModel> {
    spec.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidData(format!("cannot train {} on empty data", spec.kind.name())));
    }
    let positives = data.positives();
    if positives == 0 || positives == data.len() {
        return Ok(TrainedModel {
            spec: spec.clone(),
            training_feature_count: data.n_features(),
            fitted: Fitted::Constant(positives > 0),
        });
    }

    let mut rng = StdRng::seed_from_u64(seed);
    let fitted = match spec.kind {
        LearnerKind::DecisionTree => {
            let params = tree_params(spec, data.len())?;
            Fitted::Tree(TreeModel::fit(&data.rows, &data.labels, params, &mut rng))
        }
        LearnerKind::RandomForest => {
            let base = tree_params(spec, data.len())?;
            let n_trees = spec.int("n_estimators", 100) as usize;
            Fitted::Forest(ForestModel::fit(
                &data.rows,
                &data.labels,
                forest::ForestParams { n_trees, base, bootstrap: true, sqrt_features: true },
                &mut rng,
            ))
        }
        LearnerKind::LogisticRegression => {
            let penalty = match spec.cat("penalty", "l2") {
                "l1" => logistic::Penalty::L1,
                "l2" => logistic::Penalty::L2,
                other => return Err(Error::InvalidParam(format!("penalty '{other}'"))),
            };
            Fitted::Logistic(LogisticModel::fit(
                &data.rows,
                &data.labels,
                penalty,
                spec.real("tol", 1e-4),
                spec.int("C", 1) as f64,
            ))
        }
        LearnerKind::MultinomialNb => Fitted::NaiveBayes(NaiveBayesModel::fit(
            &data.rows,
            &data.labels,
            spec.real("alpha", 0.1),
        )),
        LearnerKind::Knn => {
            let metric = match spec.cat("metric", "minkowski") {
                "chebyshev" => knn::Metric::Chebyshev,
                // the p exponent only applies to the minkowski metric
                "minkowski" => knn::Metric::Minkowski(spec.int("p", 2).max(1) as f64),
                other => return Err(Error::InvalidParam(format!("metric '{other}'"))),
            };
            let weights = match spec.cat("weights", "uniform") {
                "uniform" => knn::Weights::Uniform,
                "distance" => knn::Weights::Distance,
                other => return Err(Error::InvalidParam(format!("weights '{other}'"))),
            };
            Fitted::Knn(KnnModel::fit(
                &data.rows,
                &data.labels,
                spec.int("n_neighbors", 5) as usize,
                metric,
                weights,
            ))
        }
        LearnerKind::LinearSvm => {
            Fitted::Svm(SvmModel::fit(&data.rows, &data.labels, 1.0, 200, &mut rng))
        }
    };
    Ok(TrainedModel { spec: spec.clone(), training_feature_count: data.n_features(), fitted })
}
