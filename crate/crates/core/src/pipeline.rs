//! The per-evaluation trainer shared by every optimizer.
//!
//! One evaluation is: fit the choice's preprocessor on the training side,
//! transform, fit the learner, then score the goal. Training scores are
//! computed on the training data itself (an optional internal holdout mode
//! scores on a held-back fifth instead). The same machinery serves the
//! tuning search and the final apply-to-test step, and it keeps an
//! evaluation ledger so budget claims can be audited.
//!
//! SMOTE is an augmentation rather than a statistic: it inflates the
//! training side only, and both scoring views (train and test) see the
//! original, un-augmented rows.

use std::cell::Cell;

use rand::prelude::*;

use crate::data::{Dataset, Split};
use crate::error::{Error, Result};
use crate::learners;
use crate::metrics::{d2h, popt20, ConfusionCounts, Goal, GoalScore};
use crate::options::{TaskKind, TuningChoice};
use crate::preprocess::{self, PreprocKind, TaskData, TokenizedCorpus};

/// Split data in the form the evaluator consumes (text already tokenized).
#[derive(Debug, Clone)]
pub enum TaskSplit {
    Tabular(Split<Dataset>),
    Text(Split<TokenizedCorpus>),
}

impl TaskSplit {
    pub fn task(&self) -> TaskKind {
        match self {
            TaskSplit::Tabular(_) => TaskKind::Defect,
            TaskSplit::Text(_) => TaskKind::Text,
        }
    }

    fn train(&self) -> TaskData {
        match self {
            TaskSplit::Tabular(s) => TaskData::Tabular(s.train.clone()),
            TaskSplit::Text(s) => TaskData::Text(s.train.clone()),
        }
    }

    fn test(&self) -> TaskData {
        match self {
            TaskSplit::Tabular(s) => TaskData::Tabular(s.test.clone()),
            TaskSplit::Text(s) => TaskData::Text(s.test.clone()),
        }
    }
}

/// Anything that can score a tuning choice on train and on test.
pub trait TrainerEval {
    fn train_score(&self, choice: &TuningChoice, seed: u64) -> Result<GoalScore>;
    fn test_score(&self, choice: &TuningChoice, seed: u64) -> Result<GoalScore>;
    fn goal(&self) -> Goal;
}

/// The standard fit-transform-train-score evaluator.
pub struct PipelineEvaluator {
    split: TaskSplit,
    goal: Goal,
    /// fraction of train held back for scoring instead of scoring on train
    internal_holdout: Option<(f64, u64)>,
    evaluations: Cell<usize>,
}

impl PipelineEvaluator {
    pub fn new(split: TaskSplit, goal: Goal) -> Result<Self> {
        if goal == Goal::Popt20 {
            match &split {
                TaskSplit::Text(_) => {
                    return Err(Error::Incompatible(
                        "Popt(20) is an inspection-effort goal; text corpora have no LOC".into(),
                    ))
                }
                TaskSplit::Tabular(s) => {
                    if s.train.loc.is_none() || s.test.loc.is_none() {
                        return Err(Error::InvalidData(
                            "Popt(20) needs a LOC column on both train and test".into(),
                        ));
                    }
                }
            }
        }
        Ok(PipelineEvaluator { split, goal, internal_holdout: None, evaluations: Cell::new(0) })
    }

    /// Score tuning evaluations on a held-back fraction of train rather
    /// than on the training rows themselves. Off by default.
    pub fn with_internal_holdout(mut self, fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0 < fraction && fraction < 1.0) {
            return Err(Error::InvalidParam(format!(
                "holdout fraction must be in (0,1), got {fraction}"
            )));
        }
        self.internal_holdout = Some((fraction, seed));
        Ok(self)
    }

    /// How many tuning evaluations this evaluator has run.
    pub fn evaluations(&self) -> usize {
        self.evaluations.get()
    }

    pub fn task(&self) -> TaskKind {
        self.split.task()
    }

    fn score_goal(
        &self,
        predicted: &[bool],
        actual: &[bool],
        loc: Option<&Vec<u64>>,
    ) -> Result<GoalScore> {
        match self.goal {
            Goal::D2h => {
                let cc = ConfusionCounts::from_predictions(predicted, actual)?;
                Ok(d2h(&cc))
            }
            Goal::Popt20 => {
                let loc = loc.ok_or_else(|| {
                    Error::InvalidData("Popt(20) scoring needs LOC values".into())
                })?;
                popt20(predicted, actual, loc)
            }
        }
    }

    /// Fit preprocessor and learner on `fit_on`, score on `score_on`.
    fn run_once(
        &self,
        choice: &TuningChoice,
        fit_on: &TaskData,
        score_on: &TaskData,
        seed: u64,
    ) -> Result<GoalScore> {
        let ft = preprocess::fit(&choice.preproc, fit_on, seed)?;
        let train_view = preprocess::apply(&ft, fit_on)?;
        let model = learners::train(&choice.learner, &train_view, seed ^ 0x5EED)?;

        // SMOTE never inflates the scoring side
        let eval_view = if choice.preproc.kind == PreprocKind::Smote {
            match score_on {
                TaskData::Tabular(d) => d.clone(),
                TaskData::Text(_) => {
                    return Err(Error::Incompatible("SMOTE applies to tabular data".into()))
                }
            }
        } else {
            preprocess::apply(&ft, score_on)?
        };
        let predicted = model.predict_all(&eval_view.rows)?;
        self.score_goal(&predicted, &eval_view.labels, eval_view.loc.as_ref())
    }

    fn holdout_split(&self, fraction: f64, seed: u64) -> (TaskData, TaskData) {
        let train = self.split.train();
        let n = train.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut StdRng::seed_from_u64(seed));
        let held = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
        let (val_idx, fit_idx) = idx.split_at(held);
        match &train {
            TaskData::Tabular(d) => (
                TaskData::Tabular(d.subset(fit_idx, format!("{}-fit", d.name))),
                TaskData::Tabular(d.subset(val_idx, format!("{}-val", d.name))),
            ),
            TaskData::Text(c) => {
                let pick = |ids: &[usize], suffix: &str| TokenizedCorpus {
                    name: format!("{}-{suffix}", c.name),
                    documents: ids.iter().map(|&i| c.documents[i].clone()).collect(),
                    labels: ids.iter().map(|&i| c.labels[i]).collect(),
                };
                (TaskData::Text(pick(fit_idx, "fit")), TaskData::Text(pick(val_idx, "val")))
            }
        }
    }
}

impl TrainerEval for PipelineEvaluator {
    fn train_score(&self, choice: &TuningChoice, seed: u64) -> Result<GoalScore> {
        self.evaluations.set(self.evaluations.get() + 1);
        match self.internal_holdout {
            None => {
                let train = self.split.train();
                self.run_once(choice, &train, &train, seed)
            }
            Some((fraction, holdout_seed)) => {
                let (fit_on, val) = self.holdout_split(fraction, holdout_seed);
                self.run_once(choice, &fit_on, &val, seed)
            }
        }
    }

    fn test_score(&self, choice: &TuningChoice, seed: u64) -> Result<GoalScore> {
        self.run_once(choice, &self.split.train(), &self.split.test(), seed)
    }

    fn goal(&self) -> Goal {
        self.goal
    }
}
