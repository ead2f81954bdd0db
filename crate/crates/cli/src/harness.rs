//! Experiment orchestration: dataset resolution, per-run execution,
//! append-only record persistence and resume.
//!
//! One run is a `(dataset, treatment, goal, seed)` cell with
//! `seed = base_seed + repeat`. Records go to `records.jsonl` in the
//! output directory, one JSON object per line; each run's full evaluation
//! history goes to `history/<run>.jsonl` (written to a temp file first,
//! then renamed). Completed cells found in an existing records file are
//! skipped, so an interrupted experiment resumes without duplicates.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use dodge_core::baselines::{self, DEConfig};
use dodge_core::data::{
    cross_val_splits, load_tabular_csv, load_text_csv, version_split, CrossValPlan, Dataset,
    Split, TextCorpus,
};
use dodge_core::dodge::{run_dodge, DodgeConfig};
use dodge_core::error::{Error, Result};
use dodge_core::fftree::{predict_fftree, train_fftree, train_fftree_candidates};
use dodge_core::learners::{self, LearnerSpec};
use dodge_core::metrics::{d2h, popt20, ConfusionCounts, Goal, GoalScore};
use dodge_core::options::{build_table1_tree, TaskKind};
use dodge_core::pipeline::{PipelineEvaluator, TaskSplit};
use dodge_core::preprocess::{self, PreprocKind, PreprocSpec, TaskData};

use crate::config::{ExperimentConfig, Treatment};

/// One persisted run outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub treatment: String,
    pub dataset: String,
    pub seed: u64,
    pub goal: Goal,
    pub test_score: GoalScore,
    pub evaluations: usize,
    /// excluded from determinism comparisons
    pub wall_time_ms: u64,
    pub history_ref: String,
}

/// In-memory outcome of one treatment execution.
#[derive(Debug, Clone)]
pub struct TreatmentOutcome {
    pub test_score: GoalScore,
    pub evaluations: usize,
    pub history: Vec<serde_json::Value>,
}

/// Load every CSV in a directory as one release each; lexicographic file
/// order is release order.
pub fn load_defect_versions(
    dir: &Path,
    label_column: &str,
    loc_column: Option<&str>,
) -> Result<Vec<Dataset>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|source| Error::Io { path: dir.to_path_buf(), source })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "csv").unwrap_or(false))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidData(format!("no CSV releases found in {}", dir.display())));
    }
    paths.iter().map(|p| load_tabular_csv(p, label_column, loc_column)).collect()
}

/// Resolve a defect dataset directory into its train/test split.
pub fn defect_split(dir: &Path, label_column: &str, loc_column: Option<&str>) -> Result<Split<Dataset>> {
    let versions = load_defect_versions(dir, label_column, loc_column)?;
    version_split(&versions)
}

fn score_predictions(
    goal: Goal,
    predicted: &[bool],
    actual: &[bool],
    loc: Option<&Vec<u64>>,
) -> Result<GoalScore> {
    match goal {
        Goal::D2h => Ok(d2h(&ConfusionCounts::from_predictions(predicted, actual)?)),
        Goal::Popt20 => {
            let loc = loc
                .ok_or_else(|| Error::InvalidData("Popt(20) needs LOC on the test side".into()))?;
            popt20(predicted, actual, loc)
        }
    }
}

/// Run one treatment on a tabular train/test split.
pub fn run_treatment_defect(
    treatment: &Treatment,
    split: &Split<Dataset>,
    goal: Goal,
    seed: u64,
) -> Result<TreatmentOutcome> {
    match treatment {
        Treatment::Dodge { epsilon, n, n1 } => {
            let evaluator = PipelineEvaluator::new(TaskSplit::Tabular(split.clone()), goal)?;
            let mut config =
                DodgeConfig::new(goal, seed).with_epsilon(*epsilon);
            config.n1 = *n1;
            config.n2 = n.saturating_sub(*n1);
            let mut tree = build_table1_tree(TaskKind::Defect);
            let result = run_dodge(&config, &mut tree, &evaluator)?;
            Ok(TreatmentOutcome {
                test_score: result.test_score,
                evaluations: result.evaluations_used,
                history: result
                    .history
                    .iter()
                    .map(|r| serde_json::to_value(r).expect("record serializes"))
                    .collect(),
            })
        }
        Treatment::Fft => {
            let candidates = train_fftree_candidates(&split.train, goal, 4)?;
            let tree = train_fftree(&split.train, goal, 4)?;
            let predicted: Result<Vec<bool>> =
                split.test.rows.iter().map(|r| predict_fftree(&tree, r)).collect();
            let test_score =
                score_predictions(goal, &predicted?, &split.test.labels, split.test.loc.as_ref())?;
            Ok(TreatmentOutcome {
                test_score,
                evaluations: candidates.len(),
                history: candidates
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        serde_json::json!({
                            "index": i + 1,
                            "depth": c.depth(),
                            "train_score": c.train_goal.value,
                        })
                    })
                    .collect(),
            })
        }
        Treatment::Random { n } => {
            let evaluator = PipelineEvaluator::new(TaskSplit::Tabular(split.clone()), goal)?;
            let tree = build_table1_tree(TaskKind::Defect);
            let record = baselines::random_search(&tree, *n, &evaluator, seed)?;
            Ok(TreatmentOutcome {
                test_score: record.test_score,
                evaluations: record.evaluations,
                history: record.history,
            })
        }
        Treatment::Smotuned { learner } => {
            let spec = LearnerSpec::defaults(learner.parse()?);
            let de = DEConfig { seed, ..Default::default() };
            let record = baselines::smotuned(split, &spec, goal, &de)?;
            Ok(TreatmentOutcome {
                test_score: record.test_score,
                evaluations: record.evaluations,
                history: record.history,
            })
        }
        Treatment::DeRf => {
            let de = DEConfig { seed, ..Default::default() };
            let record = baselines::de_rf(split, goal, &de)?;
            Ok(TreatmentOutcome {
                test_score: record.test_score,
                evaluations: record.evaluations,
                history: record.history,
            })
        }
        Treatment::Untuned { learner } => {
            let spec = LearnerSpec::defaults(learner.parse()?);
            let model = learners::train(&spec, &split.train, seed)?;
            let predicted = model.predict_all(&split.test.rows)?;
            let test_score =
                score_predictions(goal, &predicted, &split.test.labels, split.test.loc.as_ref())?;
            Ok(TreatmentOutcome {
                test_score,
                evaluations: 1,
                history: vec![serde_json::json!({"index": 1, "learner": learner})],
            })
        }
    }
}

/// Run one treatment over a text corpus: a full x-by-y cross-validation,
/// reporting the mean test score across all bins.
pub fn run_treatment_text(
    treatment: &Treatment,
    corpus: &TextCorpus,
    goal: Goal,
    seed: u64,
    cross_x: usize,
    cross_y: usize,
) -> Result<TreatmentOutcome> {
    let plan = CrossValPlan::new(cross_x, cross_y, seed)?;
    let splits = cross_val_splits(corpus, &plan)?;
    let mut scores = Vec::with_capacity(splits.len());
    let mut evaluations = 0usize;
    let mut history = Vec::new();
    for (bin, split) in splits.iter().enumerate() {
        let tokens = Split {
            train: preprocess::tokenize_and_stem(&split.train),
            test: preprocess::tokenize_and_stem(&split.test),
        };
        let outcome = run_text_split(treatment, &tokens, goal, seed.wrapping_add(bin as u64))?;
        scores.push(outcome.test_score.value);
        evaluations += outcome.evaluations;
        history.push(serde_json::json!({
            "bin": bin,
            "test_score": outcome.test_score.value,
            "evaluations": outcome.evaluations,
        }));
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(TreatmentOutcome { test_score: GoalScore::new(goal, mean), evaluations, history })
}

/// Vectorize with default topic modeling, mirroring the untuned text
/// treatment family.
fn lda_default_features(
    split: &Split<preprocess::TokenizedCorpus>,
    seed: u64,
) -> Result<Split<Dataset>> {
    let spec = PreprocSpec::plain(PreprocKind::Lda);
    let ft = preprocess::fit(&spec, &TaskData::Text(split.train.clone()), seed)?;
    Ok(Split {
        train: preprocess::apply(&ft, &TaskData::Text(split.train.clone()))?,
        test: preprocess::apply(&ft, &TaskData::Text(split.test.clone()))?,
    })
}

fn run_text_split(
    treatment: &Treatment,
    tokens: &Split<preprocess::TokenizedCorpus>,
    goal: Goal,
    seed: u64,
) -> Result<TreatmentOutcome> {
    match treatment {
        Treatment::Dodge { epsilon, n, n1 } => {
            let evaluator = PipelineEvaluator::new(TaskSplit::Text(tokens.clone()), goal)?;
            let mut config =
                DodgeConfig::new(goal, seed).with_epsilon(*epsilon);
            config.n1 = *n1;
            config.n2 = n.saturating_sub(*n1);
            let mut tree = build_table1_tree(TaskKind::Text);
            let result = run_dodge(&config, &mut tree, &evaluator)?;
            Ok(TreatmentOutcome {
                test_score: result.test_score,
                evaluations: result.evaluations_used,
                history: vec![],
            })
        }
        Treatment::Random { n } => {
            let evaluator = PipelineEvaluator::new(TaskSplit::Text(tokens.clone()), goal)?;
            let tree = build_table1_tree(TaskKind::Text);
            let record = baselines::random_search(&tree, *n, &evaluator, seed)?;
            Ok(TreatmentOutcome {
                test_score: record.test_score,
                evaluations: record.evaluations,
                history: vec![],
            })
        }
        Treatment::Fft => {
            // topic features first, then the frugal tree
            let features = lda_default_features(tokens, seed)?;
            let tree = train_fftree(&features.train, goal, 4)?;
            let predicted: Result<Vec<bool>> =
                features.test.rows.iter().map(|r| predict_fftree(&tree, r)).collect();
            let test_score = score_predictions(goal, &predicted?, &features.test.labels, None)?;
            Ok(TreatmentOutcome { test_score, evaluations: 16, history: vec![] })
        }
        Treatment::Untuned { learner } => {
            let features = lda_default_features(tokens, seed)?;
            let spec = LearnerSpec::defaults(learner.parse()?);
            let model = learners::train(&spec, &features.train, seed)?;
            let predicted = model.predict_all(&features.test.rows)?;
            let test_score = score_predictions(goal, &predicted, &features.test.labels, None)?;
            Ok(TreatmentOutcome { test_score, evaluations: 1, history: vec![] })
        }
        Treatment::Smotuned { .. } | Treatment::DeRf => Err(Error::Incompatible(format!(
            "treatment '{}' does not apply to text",
            treatment.name()
        ))),
    }
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '-' }).collect()
}

fn dataset_label(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn records_path(output_dir: &Path) -> PathBuf {
    output_dir.join("records.jsonl")
}

/// Read previously persisted records (an absent file is an empty history).
pub fn read_records(output_dir: &Path) -> Result<Vec<RunRecord>> {
    let path = records_path(output_dir);
    if !path.exists() {
        return Ok(Vec::new());
    }
    let raw =
        fs::read_to_string(&path).map_err(|source| Error::Io { path: path.clone(), source })?;
    raw.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            serde_json::from_str(line)
                .map_err(|e| Error::Parse { path: path.clone(), detail: e.to_string() })
        })
        .collect()
}

fn append_record(output_dir: &Path, record: &RunRecord) -> Result<()> {
    let path = records_path(output_dir);
    let io_err = |source| Error::Io { path: path.clone(), source };
    let mut file =
        fs::OpenOptions::new().create(true).append(true).open(&path).map_err(io_err)?;
    let line = serde_json::to_string(record).expect("record serializes");
    writeln!(file, "{line}").map_err(io_err)?;
    file.flush().map_err(io_err)?;
    Ok(())
}

fn write_history(output_dir: &Path, name: &str, history: &[serde_json::Value]) -> Result<String> {
    let dir = output_dir.join("history");
    fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
    let final_path = dir.join(format!("{name}.jsonl"));
    let tmp_path = dir.join(format!(".{name}.tmp"));
    {
        let mut file = fs::File::create(&tmp_path)
            .map_err(|source| Error::Io { path: tmp_path.clone(), source })?;
        for entry in history {
            writeln!(file, "{entry}")
                .map_err(|source| Error::Io { path: tmp_path.clone(), source })?;
        }
        file.flush().map_err(|source| Error::Io { path: tmp_path.clone(), source })?;
    }
    fs::rename(&tmp_path, &final_path)
        .map_err(|source| Error::Io { path: final_path.clone(), source })?;
    Ok(format!("history/{name}.jsonl"))
}

/// Execute every `(dataset, treatment, goal, repeat)` cell, skipping cells
/// already present in the output records. Returns all records, persisted
/// order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    fs::create_dir_all(&config.output_dir)
        .map_err(|source| Error::Io { path: config.output_dir.clone(), source })?;
    let mut records = read_records(&config.output_dir)?;
    let mut done: HashSet<(String, String, Goal, u64)> = records
        .iter()
        .map(|r| (r.dataset.clone(), r.treatment.clone(), r.goal, r.seed))
        .collect();

    for dataset_path in &config.datasets {
        let dataset_name = dataset_label(dataset_path);
        // resolve once per dataset
        let defect_data = match config.task {
            TaskKind::Defect => {
                let loc = if config.loc_column.is_empty() {
                    None
                } else {
                    Some(config.loc_column.as_str())
                };
                Some(defect_split(dataset_path, &config.label_column, loc)?)
            }
            TaskKind::Text => None,
        };
        let text_data = match config.task {
            TaskKind::Text => Some(load_text_csv(dataset_path, &config.text_label_column)?),
            TaskKind::Defect => None,
        };

        for treatment in &config.treatments {
            for &goal in &config.goals {
                for repeat in 0..config.repeats {
                    let seed = config.base_seed.wrapping_add(repeat as u64);
                    let key =
                        (dataset_name.clone(), treatment.name(), goal, seed);
                    if done.contains(&key) {
                        continue;
                    }
                    let started = Instant::now();
                    let outcome = match config.task {
                        TaskKind::Defect => run_treatment_defect(
                            treatment,
                            defect_data.as_ref().expect("resolved above"),
                            goal,
                            seed,
                        )?,
                        TaskKind::Text => run_treatment_text(
                            treatment,
                            text_data.as_ref().expect("resolved above"),
                            goal,
                            seed,
                            config.cross_x,
                            config.cross_y,
                        )?,
                    };
                    let run_name = sanitize(&format!(
                        "{dataset_name}_{}_{}_{seed}",
                        treatment.name(),
                        goal.name()
                    ));
                    let history_ref =
                        write_history(&config.output_dir, &run_name, &outcome.history)?;
                    let record = RunRecord {
                        treatment: treatment.name(),
                        dataset: dataset_name.clone(),
                        seed,
                        goal,
                        test_score: outcome.test_score,
                        evaluations: outcome.evaluations,
                        wall_time_ms: started.elapsed().as_millis() as u64,
                        history_ref,
                    };
                    append_record(&config.output_dir, &record)?;
                    done.insert(key);
                    records.push(record);
                }
            }
        }
    }
    Ok(records)
}
