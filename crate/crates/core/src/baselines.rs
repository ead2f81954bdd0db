//! Comparison optimizers: plain random search over the option tree, and
//! differential evolution tuning SMOTE parameters or random-forest
//! parameters.
//!
//! All of them score candidates through the same per-evaluation trainer as
//! the main optimizer, so evaluation counts are comparable across
//! treatments.

use std::cell::Cell;

use rand::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Split};
use crate::domain::{Domain, ParamValue};
use crate::error::{Error, Result};
use crate::learners::LearnerSpec;
use crate::metrics::{Goal, GoalScore};
use crate::options::OptionTree;
use crate::pipeline::{PipelineEvaluator, TaskSplit, TrainerEval};
use crate::preprocess::{PreprocKind, PreprocSpec};

/// Differential-evolution control parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DEConfig {
    /// population members per decision
    pub np: usize,
    /// extrapolation factor
    pub f: f64,
    /// per-decision crossover probability
    pub cr: f64,
    /// generations without improvement before giving up
    pub lives: usize,
    pub seed: u64,
}

impl Default for DEConfig {
    fn default() -> Self {
        DEConfig { np: 10, f: 0.75, cr: 0.3, lives: 5, seed: 1 }
    }
}

/// A named decision in a DE search space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decision {
    pub name: String,
    pub domain: Domain,
}

impl Decision {
    pub fn new(name: impl Into<String>, domain: Domain) -> Self {
        Decision { name: name.into(), domain }
    }
}

/// One population member.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate {
    pub values: Vec<ParamValue>,
    pub score: f64,
}

/// Result of a DE search plus its evaluation accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeOutcome {
    pub best: Candidate,
    /// objective calls: the initial population plus one per mutant
    pub evaluations: usize,
    pub generations: usize,
    /// mutant evaluations per generation, for ledger reconciliation
    pub mutants_per_generation: Vec<usize>,
}

/// One optimizer execution: every configuration tried, the best one, and
/// its score on the test side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub treatment: String,
    pub goal: Goal,
    pub seed: u64,
    /// one JSON entry per evaluation, in order
    pub history: Vec<serde_json::Value>,
    pub best_config: serde_json::Value,
    pub best_train_score: f64,
    pub test_score: GoalScore,
    pub evaluations: usize,
}

fn clip_real(v: f64, lo: f64, hi: f64) -> f64 {
    v.clamp(lo, hi)
}

/// Crossed-over decisions mutate; the rest keep the complement value.
/// Continuous/integer decisions extrapolate `a + f*(b - c)` (clipped,
/// integers rounded) over the target's remaining coordinates, per the
/// binomial-crossover scheme; discrete decisions take b's or c's value
/// uniformly and otherwise keep a's.
fn mutate_decision(
    domain: &Domain,
    a: &ParamValue,
    b: &ParamValue,
    c: &ParamValue,
    f: f64,
    rng: &mut StdRng,
) -> ParamValue {
    match domain {
        Domain::Real { lo, hi } => {
            let (av, bv, cv) =
                (a.as_f64().unwrap(), b.as_f64().unwrap(), c.as_f64().unwrap());
            ParamValue::Real(clip_real(av + f * (bv - cv), *lo, *hi))
        }
        Domain::Int { lo, hi } => {
            let (av, bv, cv) =
                (a.as_f64().unwrap(), b.as_f64().unwrap(), c.as_f64().unwrap());
            ParamValue::Int(clip_real((av + f * (bv - cv)).round(), *lo as f64, *hi as f64) as i64)
        }
        Domain::IntChoice(_) | Domain::Cat(_) => {
            if rng.gen_bool(0.5) {
                b.clone()
            } else {
                c.clone()
            }
        }
    }
}

/// Storn-style differential evolution over mixed decisions. The objective
/// is penalized with the worst possible score when it fails, so degenerate
/// candidates never abort a search.
pub fn de_optimize(
    bounds: &[Decision],
    mut objective: impl FnMut(&[ParamValue]) -> Result<f64>,
    maximize: bool,
    config: &DEConfig,
) -> Result<DeOutcome> {
    if bounds.is_empty() {
        return Err(Error::InvalidParam("DE needs at least one decision".into()));
    }
    let worst = if maximize { f64::NEG_INFINITY } else { f64::INFINITY };
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let mut rng = StdRng::seed_from_u64(config.seed);
    let mut evaluations = 0usize;
    let mut score = |values: &[ParamValue], evals: &mut usize| -> f64 {
        *evals += 1;
        objective(values).unwrap_or(worst)
    };

    // nothing to search when every domain is a single point
    let degenerate = bounds.iter().all(|d| match &d.domain {
        Domain::Real { lo, hi } => lo >= hi,
        Domain::Int { lo, hi } => lo >= hi,
        Domain::IntChoice(c) => c.len() <= 1,
        Domain::Cat(c) => c.len() <= 1,
    });
    if degenerate {
        let values: Vec<ParamValue> = bounds.iter().map(|d| d.domain.sample(&mut rng)).collect();
        let s = score(&values, &mut evaluations);
        return Ok(DeOutcome {
            best: Candidate { values, score: s },
            evaluations,
            generations: 0,
            mutants_per_generation: vec![],
        });
    }

    let pop_size = bounds.len() * config.np;
    if pop_size < 4 {
        return Err(Error::InvalidParam(format!(
            "DE population of {pop_size} is too small for 3-way mutation"
        )));
    }
    let mut population: Vec<Candidate> = (0..pop_size)
        .map(|_| {
            let values: Vec<ParamValue> =
                bounds.iter().map(|d| d.domain.sample(&mut rng)).collect();
            let s = score(&values, &mut evaluations);
            Candidate { values, score: s }
        })
        .collect();

    let mut lives = config.lives as i64;
    let mut generations = 0usize;
    let mut mutants_per_generation = Vec::new();
    while lives > 0 {
        let mut delta = -1i64; // lose a life unless something improves
        let mut mutants = 0usize;
        for i in 0..population.len() {
            // three distinct members other than i
            let mut picks: Vec<usize> = Vec::with_capacity(3);
            while picks.len() < 3 {
                let j = rng.gen_range(0..population.len());
                if j != i && !picks.contains(&j) {
                    picks.push(j);
                }
            }
            let (a, b, c) = (picks[0], picks[1], picks[2]);
            let mutant_values: Vec<ParamValue> = bounds
                .iter()
                .enumerate()
                .map(|(k, decision)| {
                    if rng.gen_bool(config.cr) {
                        mutate_decision(
                            &decision.domain,
                            &population[a].values[k],
                            &population[b].values[k],
                            &population[c].values[k],
                            config.f,
                            &mut rng,
                        )
                    } else {
                        match decision.domain {
                            // binomial complement: the target keeps its value
                            Domain::Real { .. } | Domain::Int { .. } => {
                                population[i].values[k].clone()
                            }
                            // the discrete rule is defined over {a, b, c} only
                            Domain::IntChoice(_) | Domain::Cat(_) => {
                                population[a].values[k].clone()
                            }
                        }
                    }
                })
                .collect();
            let mutant_score = score(&mutant_values, &mut evaluations);
            mutants += 1;
            if better(mutant_score, population[i].score) {
                population[i] = Candidate { values: mutant_values, score: mutant_score };
                delta = 0;
            }
        }
        lives += delta;
        generations += 1;
        mutants_per_generation.push(mutants);
    }

    let best = population
        .into_iter()
        .reduce(|best, c| if better(c.score, best.score) { c } else { best })
        .expect("population is non-empty");
    Ok(DeOutcome { best, evaluations, generations, mutants_per_generation })
}

/// Pick `n` random options from the tree, keep the best on train, apply it
/// to test. No reweighting, no narrowing.
pub fn random_search(
    tree: &OptionTree,
    n: usize,
    trainer: &dyn TrainerEval,
    seed: u64,
) -> Result<RunRecord> {
    if n < 1 {
        return Err(Error::InvalidParam("random search needs n >= 1".into()));
    }
    let goal = trainer.goal();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut history = Vec::with_capacity(n);
    let mut best: Option<(crate::options::TuningChoice, f64, u64)> = None;
    for i in 0..n {
        let choice = tree.sample_random(&mut rng);
        let eval_seed: u64 = rng.gen();
        let (value, failed) = match trainer.train_score(&choice, eval_seed) {
            Ok(s) => (s.value, false),
            Err(_) => (goal.worst_value(), true),
        };
        history.push(serde_json::json!({
            "index": i + 1,
            "choice": choice,
            "train_score": value,
            "failed": failed,
        }));
        if !failed {
            let improves = match &best {
                Some((_, b, _)) => goal.better(value, *b),
                None => true,
            };
            if improves {
                best = Some((choice, value, eval_seed));
            }
        }
    }
    let (best_choice, best_train_score, best_seed) = best.ok_or_else(|| {
        Error::InvalidData("every random evaluation failed; nothing to apply to test".into())
    })?;
    let test_score = trainer.test_score(&best_choice, best_seed)?;
    Ok(RunRecord {
        treatment: format!("random{n}"),
        goal,
        seed,
        best_config: serde_json::to_value(&best_choice).expect("choice serializes"),
        best_train_score,
        test_score,
        evaluations: history.len(),
        history,
    })
}

fn choice_for(preproc: PreprocSpec, learner: LearnerSpec) -> crate::options::TuningChoice {
    crate::options::TuningChoice { preproc, learner, path: vec![], numeric_samples: vec![] }
}

/// DE-tuned SMOTE: search (n_neighbors, n_synthetics, minkowski_exponent),
/// rebalance train with the winner and score the learner on test.
pub fn smotuned(
    split: &Split<Dataset>,
    learner: &LearnerSpec,
    goal: Goal,
    de: &DEConfig,
) -> Result<RunRecord> {
    let minority = split.train.positives().min(split.train.len() - split.train.positives());
    if minority < 2 {
        return Err(Error::InvalidData(format!(
            "SMOTE tuning needs a minority class of at least 2 rows, found {minority}"
        )));
    }
    let bounds = vec![
        Decision::new("n_neighbors", Domain::Int { lo: 1, hi: 20 }),
        Decision::new("n_synthetics", Domain::IntChoice(vec![50, 100, 200, 400])),
        Decision::new("minkowski_exponent", Domain::Real { lo: 0.1, hi: 5.0 }),
    ];
    let evaluator = PipelineEvaluator::new(TaskSplit::Tabular(split.clone()), goal)?;
    let eval_counter = Cell::new(0u64);
    let history = std::cell::RefCell::new(Vec::new());

    let smote_choice = |values: &[ParamValue]| {
        let mut params = std::collections::BTreeMap::new();
        params.insert("n_neighbors".to_string(), values[0].clone());
        params.insert("n_synthetics".to_string(), values[1].clone());
        params.insert("minkowski_exponent".to_string(), values[2].clone());
        choice_for(PreprocSpec { kind: PreprocKind::Smote, params }, learner.clone())
    };

    let outcome = de_optimize(
        &bounds,
        |values| {
            let idx = eval_counter.get();
            eval_counter.set(idx + 1);
            let choice = smote_choice(values);
            let score = evaluator.train_score(&choice, de.seed.wrapping_add(idx))?;
            history.borrow_mut().push(serde_json::json!({
                "index": idx + 1,
                "values": values,
                "train_score": score.value,
            }));
            Ok(score.value)
        },
        goal.maximize(),
        de,
    )?;

    let best_choice = smote_choice(&outcome.best.values);
    // the winner's seed is its evaluation index; replay it for the test fit
    let test_score = evaluator.test_score(&best_choice, de.seed)?;
    Ok(RunRecord {
        treatment: "smotuned".into(),
        goal,
        seed: de.seed,
        best_config: serde_json::to_value(&outcome.best).expect("candidate serializes"),
        best_train_score: outcome.best.score,
        test_score,
        evaluations: outcome.evaluations,
        history: history.into_inner(),
    })
}

/// DE-tuned random forest over its three tunable parameters.
pub fn de_rf(split: &Split<Dataset>, goal: Goal, de: &DEConfig) -> Result<RunRecord> {
    let bounds = vec![
        Decision::new("n_estimators", Domain::Int { lo: 50, hi: 150 }),
        Decision::new("criterion", Domain::cat(["gini", "entropy"])),
        Decision::new("min_samples_split", Domain::Real { lo: 0.0, hi: 1.0 }),
    ];
    let evaluator = PipelineEvaluator::new(TaskSplit::Tabular(split.clone()), goal)?;
    let eval_counter = Cell::new(0u64);
    let history = std::cell::RefCell::new(Vec::new());

    let rf_choice = |values: &[ParamValue]| {
        let mut params = std::collections::BTreeMap::new();
        params.insert("n_estimators".to_string(), values[0].clone());
        params.insert("criterion".to_string(), values[1].clone());
        params.insert("min_samples_split".to_string(), values[2].clone());
        choice_for(
            PreprocSpec::plain(PreprocKind::NoPreproc),
            LearnerSpec { kind: crate::learners::LearnerKind::RandomForest, params },
        )
    };

    let outcome = de_optimize(
        &bounds,
        |values| {
            let idx = eval_counter.get();
            eval_counter.set(idx + 1);
            let choice = rf_choice(values);
            let score = evaluator.train_score(&choice, de.seed.wrapping_add(idx))?;
            history.borrow_mut().push(serde_json::json!({
                "index": idx + 1,
                "values": values,
                "train_score": score.value,
            }));
            Ok(score.value)
        },
        goal.maximize(),
        de,
    )?;

    let best_choice = rf_choice(&outcome.best.values);
    let test_score = evaluator.test_score(&best_choice, de.seed)?;
    Ok(RunRecord {
        treatment: "de-rf".into(),
        goal,
        seed: de.seed,
        best_config: serde_json::to_value(&outcome.best).expect("candidate serializes"),
        best_train_score: outcome.best.score,
        test_score,
        evaluations: outcome.evaluations,
        history: history.into_inner(),
    })
}
