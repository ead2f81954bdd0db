//! Fast-and-frugal tree classifier.
//!
//! A depth-`d` tree has one exit leaf per level: rows matching the level's
//! condition leave with that level's label, the rest fall through to the
//! next level and finally to `final_label`. Training enumerates all `2^d`
//! exit-polarity bitstrings, greedily builds one candidate tree per
//! bitstring (numerics split at the median of the rows still in play), and
//! keeps the candidate with the best goal score on the training data.
//!
//! Construction involves no randomness, so training is deterministic.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{d2h, popt20, ConfusionCounts, Goal, GoalScore};

/// Which side of the threshold exits at this level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// rows with value <= threshold exit
    Leq,
    /// rows with value > threshold exit
    Gt,
}

/// One level: a median-split condition and its exit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FFtreeLevel {
    pub attribute_index: usize,
    pub threshold: f64,
    pub direction: Direction,
    pub exit_label: bool,
    /// polarity bit: did this level chase the goal ("most") or flee it
    pub exit_side_is_most: bool,
}

impl FFtreeLevel {
    fn matches(&self, row: &[f64]) -> bool {
        match self.direction {
            Direction::Leq => row[self.attribute_index] <= self.threshold,
            Direction::Gt => row[self.attribute_index] > self.threshold,
        }
    }
}

/// A fitted fast-and-frugal tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FFtree {
    pub levels: Vec<FFtreeLevel>,
    pub final_label: bool,
    pub train_goal: GoalScore,
    feature_count: usize,
}

impl FFtree {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Render the if/else cascade; `names` supplies attribute labels.
    pub fn pretty_print(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (i, level) in self.levels.iter().enumerate() {
            let keyword = if i == 0 { "if     " } else { "else if" };
            let op = match level.direction {
                Direction::Leq => "<=",
                Direction::Gt => ">",
            };
            out.push_str(&format!(
                "{keyword} {} {op} {} then {}\n",
                names[level.attribute_index], level.threshold, level.exit_label
            ));
        }
        out.push_str(&format!("else {}\n", self.final_label));
        out
    }
}

/// Walk the levels in order; exit at the first match, else `final_label`.
pub fn predict_fftree(tree: &FFtree, row: &[f64]) -> Result<bool> {
    if row.len() != tree.feature_count {
        return Err(Error::DimensionMismatch { expected: tree.feature_count, got: row.len() });
    }
    for level in &tree.levels {
        if level.matches(row) {
            return Ok(level.exit_label);
        }
    }
    Ok(tree.final_label)
}

/// Train a tree of depth at most `d`, keeping the best of the `2^d`
/// candidates under `goal` (Popt(20) requires LOC on the dataset).
pub fn train_fftree(train: &Dataset, goal: Goal, d: usize) -> Result<FFtree> {
    let candidates = train_fftree_candidates(train, goal, d)?;
    Ok(candidates
        .into_iter()
        .reduce(|best, c| if goal.better(c.train_goal.value, best.train_goal.value) { c } else { best })
        .expect("2^d >= 1 candidates"))
}

/// All `2^d` candidate trees in bitstring order, each scored on the full
/// training data. Exposed so the selection can be audited externally.
pub fn train_fftree_candidates(train: &Dataset, goal: Goal, d: usize) -> Result<Vec<FFtree>> {
    if train.is_empty() || train.n_features() == 0 {
        return Err(Error::InvalidData("fftree needs non-empty data with features".into()));
    }
    if d < 1 || d > 16 {
        return Err(Error::InvalidParam(format!("fftree depth must be in 1..=16, got {d}")));
    }
    if goal == Goal::Popt20 && train.loc.is_none() {
        return Err(Error::InvalidData("Popt(20) training requires LOC values".into()));
    }

    let mut candidates = Vec::with_capacity(1 << d);
    for bits in 0..(1usize << d) {
        let polarity: Vec<bool> = (0..d).map(|level| bits >> level & 1 == 1).collect();
        let tree = build_candidate(train, goal, &polarity)?;
        candidates.push(tree);
    }
    Ok(candidates)
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Goal score of predicting `true` exactly on `exit_set`, over the `rows`
/// universe.
fn selection_score(train: &Dataset, rows: &[usize], exit_set: &[bool], goal: Goal) -> Result<f64> {
    let predicted: Vec<bool> = exit_set.to_vec();
    let actual: Vec<bool> = rows.iter().map(|&i| train.labels[i]).collect();
    match goal {
        Goal::D2h => {
            let cc = ConfusionCounts::from_predictions(&predicted, &actual)?;
            Ok(d2h(&cc).value)
        }
        Goal::Popt20 => {
            let loc = train.loc.as_ref().expect("checked at entry");
            let row_loc: Vec<u64> = rows.iter().map(|&i| loc[i]).collect();
            Ok(popt20(&predicted, &actual, &row_loc)?.value)
        }
    }
}

fn build_candidate(train: &Dataset, goal: Goal, polarity: &[bool]) -> Result<FFtree> {
    let mut rows: Vec<usize> = (0..train.len()).collect();
    let mut levels: Vec<FFtreeLevel> = Vec::new();

    for &is_most in polarity {
        if rows.is_empty() {
            break;
        }
        // best (attr, side) for a "most" level; worst for a "least" level.
        // Sides that exit nothing are vacuous and never eligible.
        let mut selected: Option<(usize, f64, Direction, f64)> = None;
        for attr in 0..train.n_features() {
            let mut vals: Vec<f64> = rows.iter().map(|&i| train.rows[i][attr]).collect();
            let threshold = median(&mut vals);
            for direction in [Direction::Leq, Direction::Gt] {
                let exit_set: Vec<bool> = rows
                    .iter()
                    .map(|&i| match direction {
                        Direction::Leq => train.rows[i][attr] <= threshold,
                        Direction::Gt => train.rows[i][attr] > threshold,
                    })
                    .collect();
                if !exit_set.iter().any(|&e| e) {
                    continue;
                }
                let score = selection_score(train, &rows, &exit_set, goal)?;
                let replace = match &selected {
                    None => true,
                    Some((_, _, _, current)) => {
                        if is_most {
                            goal.better(score, *current)
                        } else {
                            goal.better(*current, score)
                        }
                    }
                };
                if replace {
                    selected = Some((attr, threshold, direction, score));
                }
            }
        }
        let Some((attr, threshold, direction, _)) = selected else {
            break;
        };
        let level = FFtreeLevel {
            attribute_index: attr,
            threshold,
            direction,
            exit_label: is_most,
            exit_side_is_most: is_most,
        };
        rows.retain(|&i| !level.matches(&train.rows[i]));
        levels.push(level);
    }

    let final_label = !levels.last().map(|l| l.exit_label).unwrap_or(true);
    let mut tree =
        FFtree { levels, final_label, train_goal: GoalScore::new(goal, goal.worst_value()), feature_count: train.n_features() };

    let predicted: Result<Vec<bool>> =
        train.rows.iter().map(|row| predict_fftree(&tree, row)).collect();
    let predicted = predicted?;
    tree.train_goal = match goal {
        Goal::D2h => d2h(&ConfusionCounts::from_predictions(&predicted, &train.labels)?),
        Goal::Popt20 => {
            popt20(&predicted, &train.labels, tree_loc(train))?
        }
    };
    Ok(tree)
}

fn tree_loc(train: &Dataset) -> &[u64] {
    train.loc.as_ref().expect("checked at entry").as_slice()
}
