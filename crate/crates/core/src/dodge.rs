//! The tuning-redundancy optimizer.
//!
//! The run spends `n1` evaluations on random samples of the option tree
//! and `n2` on weighted descent. After each evaluation the goal score is
//! checked against the retained scores of earlier evaluations: landing
//! within `epsilon` of any of them makes the tuning redundant, and every
//! node on its branch is deprecated; otherwise the branch is endorsed and
//! the score joins the retained set. Numeric leaf ranges narrow around the
//! best/worst values seen. The best-on-train choice is retrained once and
//! scored on the test side.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{Goal, GoalScore};
use crate::options::{OptionTree, TuningChoice};
use crate::pipeline::TrainerEval;

use rand::prelude::*;

/// Run parameters. `n = n1 + n2` is the total evaluation budget.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DodgeConfig {
    /// output-space resolution: scores closer than this are the same cell
    pub epsilon: f64,
    /// random-exploration evaluations
    pub n1: usize,
    /// weighted-descent evaluations
    pub n2: usize,
    pub goal: Goal,
    pub maximize: bool,
    pub seed: u64,
}

impl DodgeConfig {
    /// Defaults: epsilon 0.2, 12 random + 18 descent evaluations.
    pub fn new(goal: Goal, seed: u64) -> Self {
        DodgeConfig { epsilon: 0.2, n1: 12, n2: 18, goal, maximize: goal.maximize(), seed }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Keep `n1` and stretch the descent phase so n1 + n2 = n.
    pub fn with_total_budget(mut self, n: usize) -> Self {
        self.n1 = self.n1.min(n.saturating_sub(1)).max(1);
        self.n2 = n - self.n1;
        self
    }

    pub fn budget(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 < 1 {
            return Err(Error::InvalidParam("dodge needs n1 >= 1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParam(format!(
                "dodge needs epsilon > 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Random,
    Descent,
}

/// One evaluation in a run's history.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRecord {
    /// 1-based position in the run
    pub index: usize,
    pub choice: TuningChoice,
    pub train_score: GoalScore,
    pub redundant: bool,
    /// trainer failure; the score is the worst-value penalty
    pub failed: bool,
    pub phase: Phase,
}

/// Outcome of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DodgeResult {
    pub best_choice: TuningChoice,
    pub best_train_score: GoalScore,
    pub test_score: GoalScore,
    pub history: Vec<EvalRecord>,
    pub evaluations_used: usize,
}

/// True when the score lands strictly within `epsilon` of any prior score.
pub fn is_redundant(score: f64, prior_scores: &[f64], epsilon: f64) -> bool {
    prior_scores.iter().any(|p| (score - p).abs() < epsilon)
}

/// Execute one run against a trainer. The tree is mutated in place
/// (weights and narrowed ranges) so callers can audit it afterwards.
pub fn run_dodge(
    config: &DodgeConfig,
    tree: &mut OptionTree,
    trainer: &dyn TrainerEval,
) -> Result<DodgeResult> {
    config.validate()?;
    let mut rng = StdRng::seed_from_u64(config.seed);
    let mut retained: Vec<f64> = Vec::new();
    let mut history: Vec<EvalRecord> = Vec::with_capacity(config.budget());
    let mut best: Option<(TuningChoice, GoalScore, u64)> = None;

    for i in 0..config.budget() {
        let phase = if i < config.n1 { Phase::Random } else { Phase::Descent };
        let choice = match phase {
            Phase::Random => tree.sample_random(&mut rng),
            Phase::Descent => tree.weighted_descent(&mut rng),
        };
        let eval_seed: u64 = rng.gen();
        let (train_score, failed) = match trainer.train_score(&choice, eval_seed) {
            Ok(s) => (s, false),
            Err(_) => (GoalScore::new(config.goal, config.goal.worst_value()), true),
        };

        let redundant = !failed && is_redundant(train_score.value, &retained, config.epsilon);
        let delta = if failed || redundant { -1 } else { 1 };
        tree.reweight(&choice, delta)?;
        if !failed && !redundant {
            retained.push(train_score.value);
        }
        // best/worst leaf statistics move on every evaluation
        tree.record_numeric_outcome(&choice, train_score.value, config.maximize)?;

        if !failed {
            let improves = match &best {
                Some((_, b, _)) => config.goal.better(train_score.value, b.value),
                None => true,
            };
            if improves {
                best = Some((choice.clone(), train_score, eval_seed));
            }
        }
        history.push(EvalRecord { index: i + 1, choice, train_score, redundant, failed, phase });
    }

    let (best_choice, best_train_score, best_seed) = best.ok_or_else(|| {
        Error::InvalidData("every evaluation failed; no tuning can be applied to test".into())
    })?;
    let test_score = trainer.test_score(&best_choice, best_seed)?;
    let evaluations_used = history.len();
    Ok(DodgeResult { best_choice, best_train_score, test_score, history, evaluations_used })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::options::{build_table1_tree, TaskKind};

    #[test]
    fn redundancy_is_a_strict_epsilon_ball_over_priors() {
        assert!(is_redundant(0.50, &[0.45], 0.2));
        assert!(!is_redundant(0.50, &[], 0.2));
        // exactly epsilon apart is NOT redundant
        assert!(!is_redundant(0.50, &[0.30], 0.2));
        assert!(is_redundant(0.50, &[0.9, 0.31], 0.2));
    }

    /// A trainer with a deterministic score schedule and no real models.
    struct ScriptedTrainer {
        scores: Vec<f64>,
        calls: std::cell::Cell<usize>,
        goal: Goal,
    }

    impl ScriptedTrainer {
        fn new(scores: Vec<f64>) -> Self {
            ScriptedTrainer { scores, calls: std::cell::Cell::new(0), goal: Goal::D2h }
        }
    }

    impl TrainerEval for ScriptedTrainer {
        fn train_score(&self, _choice: &TuningChoice, _seed: u64) -> crate::error::Result<GoalScore> {
            let i = self.calls.get();
            self.calls.set(i + 1);
            Ok(GoalScore::new(self.goal, self.scores[i % self.scores.len()]))
        }

        fn test_score(&self, _choice: &TuningChoice, _seed: u64) -> crate::error::Result<GoalScore> {
            Ok(GoalScore::new(self.goal, 0.25))
        }

        fn goal(&self) -> Goal {
            self.goal
        }
    }

    #[test]
    fn history_length_is_exactly_the_budget() {
        let mut tree = build_table1_tree(TaskKind::Defect);
        let config = DodgeConfig::new(Goal::D2h, 1);
        assert_eq!((config.n1, config.n2), (12, 18));
        let trainer = ScriptedTrainer::new(vec![0.9, 0.5, 0.3, 0.7, 0.1]);
        let result = run_dodge(&config, &mut tree, &trainer).unwrap();
        assert_eq!(result.history.len(), 30);
        assert_eq!(result.evaluations_used, 30);
        assert_eq!(result.history.iter().filter(|r| r.phase == Phase::Random).count(), 12);
        // indices are consecutive from 1
        for (i, r) in result.history.iter().enumerate() {
            assert_eq!(r.index, i + 1);
        }
    }

    #[test]
    fn oversized_epsilon_makes_everything_after_the_first_redundant() {
        let mut tree = build_table1_tree(TaskKind::Defect);
        // epsilon above the whole goal range
        let config = DodgeConfig::new(Goal::D2h, 3).with_epsilon(1.5);
        let trainer = ScriptedTrainer::new(vec![0.1, 0.9, 0.4, 0.6, 0.2, 0.8]);
        let result = run_dodge(&config, &mut tree, &trainer).unwrap();
        assert!(!result.history[0].redundant);
        for r in &result.history[1..] {
            assert!(r.redundant, "evaluation {} should be redundant", r.index);
        }
    }

    #[test]
    fn best_on_train_is_the_history_optimum() {
        let mut tree = build_table1_tree(TaskKind::Defect);
        let config = DodgeConfig::new(Goal::D2h, 5);
        let trainer = ScriptedTrainer::new(vec![0.8, 0.6, 0.05, 0.4, 0.9]);
        let result = run_dodge(&config, &mut tree, &trainer).unwrap();
        let min = result
            .history
            .iter()
            .map(|r| r.train_score.value)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(result.best_train_score.value, min);
        assert_eq!(result.test_score.value, 0.25);
    }

    #[test]
    fn redundancy_marking_replays_from_history() {
        let mut tree = build_table1_tree(TaskKind::Defect);
        let config = DodgeConfig::new(Goal::D2h, 11).with_epsilon(0.15);
        let trainer = ScriptedTrainer::new(vec![0.95, 0.2, 0.33, 0.81, 0.05, 0.52]);
        let result = run_dodge(&config, &mut tree, &trainer).unwrap();

        let mut retained: Vec<f64> = Vec::new();
        for r in &result.history {
            let expect = !r.failed && is_redundant(r.train_score.value, &retained, config.epsilon);
            assert_eq!(r.redundant, expect, "record {}", r.index);
            if !r.failed && !expect {
                retained.push(r.train_score.value);
            }
        }
    }

    #[test]
    fn final_weights_equal_the_history_replay() {
        let mut tree = build_table1_tree(TaskKind::Defect);
        let config = DodgeConfig::new(Goal::D2h, 21);
        let trainer = ScriptedTrainer::new(vec![0.9, 0.12, 0.35, 0.58, 0.81, 0.03, 0.44]);
        let result = run_dodge(&config, &mut tree, &trainer).unwrap();

        let mut replay = build_table1_tree(TaskKind::Defect);
        for r in &result.history {
            let delta = if r.failed || r.redundant { -1 } else { 1 };
            replay.reweight(&r.choice, delta).unwrap();
        }
        for r in &result.history {
            for addr in &r.choice.path {
                assert_eq!(tree.weight_of(addr), replay.weight_of(addr), "{addr}");
            }
        }
    }

    /// Trainer that always fails, to exercise the penalty path.
    struct FailingTrainer;

    impl TrainerEval for FailingTrainer {
        fn train_score(&self, _c: &TuningChoice, _s: u64) -> crate::error::Result<GoalScore> {
            Err(Error::EmptyVocabulary)
        }

        fn test_score(&self, _c: &TuningChoice, _s: u64) -> crate::error::Result<GoalScore> {
            Err(Error::EmptyVocabulary)
        }

        fn goal(&self) -> Goal {
            Goal::D2h
        }
    }

    #[test]
    fn trainer_failures_penalize_and_continue() {
        // mix: fail on every second call
        struct Flaky(std::cell::Cell<usize>);
        impl TrainerEval for Flaky {
            fn train_score(&self, _c: &TuningChoice, _s: u64) -> crate::error::Result<GoalScore> {
                let i = self.0.get();
                self.0.set(i + 1);
                if i % 2 == 0 {
                    Err(Error::EmptyVocabulary)
                } else {
                    Ok(GoalScore::new(Goal::D2h, (i % 7) as f64 / 10.0))
                }
            }
            fn test_score(&self, _c: &TuningChoice, _s: u64) -> crate::error::Result<GoalScore> {
                Ok(GoalScore::new(Goal::D2h, 0.3))
            }
            fn goal(&self) -> Goal {
                Goal::D2h
            }
        }
        let mut tree = build_table1_tree(TaskKind::Defect);
        let config = DodgeConfig::new(Goal::D2h, 2);
        let result = run_dodge(&config, &mut tree, &Flaky(std::cell::Cell::new(0))).unwrap();
        assert_eq!(result.history.len(), 30);
        for r in &result.history {
            if r.failed {
                assert_eq!(r.train_score.value, 1.0, "failures score the worst value");
            }
        }
        // a run where everything fails cannot pick a best
        let mut tree = build_table1_tree(TaskKind::Defect);
        assert!(run_dodge(&config, &mut tree, &FailingTrainer).is_err());
    }

    #[test]
    fn runs_are_deterministic_under_seed() {
        let run = || {
            let mut tree = build_table1_tree(TaskKind::Defect);
            let config = DodgeConfig::new(Goal::D2h, 77);
            let trainer = ScriptedTrainer::new(vec![0.9, 0.1, 0.5, 0.3, 0.7, 0.2]);
            run_dodge(&config, &mut tree, &trainer).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(serde_json::to_string(&a.history).unwrap(), serde_json::to_string(&b.history).unwrap());
        assert_eq!(a.test_score, b.test_score);
        assert_eq!(a.best_train_score, b.best_train_score);
    }
}
