//! Goal predicates for classifier quality.
//!
//! Two goals are supported:
//!
//! - **d2h** ("distance to heaven"): Euclidean distance of the
//!   (recall, false-alarm) pair from the ideal point (1, 0), normalized by
//!   sqrt(2) so the score lies in `[0, 1]`. Smaller is better.
//! - **Popt(20)**: effort-aware lift score comparing the model's
//!   defects-recalled-per-LOC-inspected curve against the optimal and worst
//!   orderings, truncated at 20% inspection effort. Larger is better.
//!
//! Both are pure functions and safe for concurrent use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which goal a score was computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Goal {
    D2h,
    Popt20,
}

impl Goal {
    /// True when larger values of this goal are better.
    pub fn maximize(self) -> bool {
        match self {
            Goal::D2h => false,
            Goal::Popt20 => true,
        }
    }

    /// The worst possible value of this goal (used as the failure penalty).
    pub fn worst_value(self) -> f64 {
        match self {
            Goal::D2h => 1.0,
            Goal::Popt20 => 0.0,
        }
    }

    /// True when `a` is strictly better than `b` under this goal.
    pub fn better(self, a: f64, b: f64) -> bool {
        if self.maximize() {
            a > b
        } else {
            a < b
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Goal::D2h => "d2h",
            Goal::Popt20 => "popt20",
        }
    }
}

impl std::fmt::Display for Goal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Goal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d2h" => Ok(Goal::D2h),
            "popt20" | "popt" | "popt(20)" => Ok(Goal::Popt20),
            other => Err(Error::InvalidParam(format!("unknown goal '{other}'"))),
        }
    }
}

/// A goal value together with the goal it was measured under.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalScore {
    pub metric: Goal,
    pub value: f64,
}

impl GoalScore {
    pub fn new(metric: Goal, value: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&value), "goal value out of range: {value}");
        GoalScore { metric, value }
    }
}

/// Binary-classification outcome counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

impl ConfusionCounts {
    pub fn new(true_pos: u64, false_pos: u64, true_neg: u64, false_neg: u64) -> Self {
        ConfusionCounts { true_pos, false_pos, true_neg, false_neg }
    }

    /// Tally predictions against actual labels. Errors on length mismatch or
    /// empty input.
    pub fn from_predictions(predicted: &[bool], actual: &[bool]) -> Result<Self> {
        if predicted.len() != actual.len() {
            return Err(Error::InvalidData(format!(
                "predicted/actual length mismatch: {} vs {}",
                predicted.len(),
                actual.len()
            )));
        }
        if predicted.is_empty() {
            return Err(Error::InvalidData("cannot score an empty test set".into()));
        }
        let mut cc = ConfusionCounts::new(0, 0, 0, 0);
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p, a) {
                (true, true) => cc.true_pos += 1,
                (true, false) => cc.false_pos += 1,
                (false, false) => cc.true_neg += 1,
                (false, true) => cc.false_neg += 1,
            }
        }
        Ok(cc)
    }

    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Fraction of actual positives that were predicted positive.
/// Returns 0 when there are no actual positives.
pub fn recall(cc: &ConfusionCounts) -> f64 {
    let denom = cc.true_pos + cc.false_neg;
    if denom == 0 {
        0.0
    } else {
        cc.true_pos as f64 / denom as f64
    }
}

/// Fraction of actual negatives that were predicted positive.
/// Returns 0 when there are no actual negatives.
pub fn false_positive_rate(cc: &ConfusionCounts) -> f64 {
    let denom = cc.false_pos + cc.true_neg;
    if denom == 0 {
        0.0
    } else {
        cc.false_pos as f64 / denom as f64
    }
}

/// Distance of (recall, false alarm) from (1, 0), normalized to `[0, 1]`.
pub fn d2h(cc: &ConfusionCounts) -> GoalScore {
    let r = recall(cc);
    let fpr = false_positive_rate(cc);
    let value = ((1.0 - r).powi(2) + fpr.powi(2)).sqrt() / std::f64::consts::SQRT_2;
    GoalScore::new(Goal::D2h, value.clamp(0.0, 1.0))
}

/// Truncated lift-curve areas backing a Popt score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftCurve {
    pub area_model: f64,
    pub area_optimal: f64,
    pub area_worst: f64,
    pub effort_cutoff: f64,
    /// Set when every module has the same defect density, which makes the
    /// optimal and worst curves coincide; the score defaults to 1.
    pub degenerate: bool,
}

/// Popt at the default 20% inspection effort.
pub fn popt20(predicted: &[bool], actual: &[bool], loc: &[u64]) -> Result<GoalScore> {
    popt_with_curve(predicted, actual, loc, 0.2).map(|(score, _)| score)
}

/// Popt at an arbitrary effort cutoff, returning the underlying curve areas.
///
/// Three orderings of the modules are compared:
///
/// - *model*: predicted-defective modules by ascending LOC, then
///   predicted-clean modules by ascending LOC;
/// - *optimal*: actual defect density (`label/loc`) descending;
/// - *worst*: actual defect density ascending.
///
/// All ties keep the original module order. The recall curve is integrated
/// as a step function that credits a module's defect once its LOC is fully
/// inspected; the module straddling the cutoff is credited linearly for the
/// fraction inspected.
pub fn popt_with_curve(
    predicted: &[bool],
    actual: &[bool],
    loc: &[u64],
    cutoff: f64,
) -> Result<(GoalScore, LiftCurve)> {
    let n = predicted.len();
    if n == 0 || actual.len() != n || loc.len() != n {
        return Err(Error::InvalidData(format!(
            "popt inputs must be equal non-zero lengths (got {}, {}, {})",
            n,
            actual.len(),
            loc.len()
        )));
    }
    if loc.iter().any(|&l| l == 0) {
        return Err(Error::InvalidData("popt requires positive LOC for every module".into()));
    }
    if !(cutoff > 0.0 && cutoff <= 1.0) {
        return Err(Error::InvalidParam(format!("popt cutoff must be in (0,1], got {cutoff}")));
    }

    let density = |i: usize| {
        if actual[i] {
            1.0 / loc[i] as f64
        } else {
            0.0
        }
    };

    // Stable sorts preserve the original order on ties.
    let mut model: Vec<usize> = (0..n).collect();
    model.sort_by(|&a, &b| {
        // predicted-defective block first, each block ascending LOC
        predicted[b].cmp(&predicted[a]).then(loc[a].cmp(&loc[b]))
    });
    let mut optimal: Vec<usize> = (0..n).collect();
    optimal.sort_by(|&a, &b| density(b).partial_cmp(&density(a)).unwrap());
    let mut worst: Vec<usize> = (0..n).collect();
    worst.sort_by(|&a, &b| density(a).partial_cmp(&density(b)).unwrap());

    let area_model = truncated_recall_area(&model, actual, loc, cutoff);
    let area_optimal = truncated_recall_area(&optimal, actual, loc, cutoff);
    let area_worst = truncated_recall_area(&worst, actual, loc, cutoff);

    let spread = area_optimal - area_worst;
    let degenerate = spread.abs() <= 1e-12;
    let value = if degenerate {
        1.0
    } else {
        (1.0 - (area_optimal - area_model) / spread).clamp(0.0, 1.0)
    };
    let curve = LiftCurve {
        area_model,
        area_optimal,
        area_worst,
        effort_cutoff: cutoff,
        degenerate,
    };
    Ok((GoalScore::new(Goal::Popt20, value), curve))
}

/// Area under the %defects-recalled vs %LOC-inspected curve for the given
/// module ordering, truncated at `cutoff`.
fn truncated_recall_area(order: &[usize], actual: &[bool], loc: &[u64], cutoff: f64) -> f64 {
    let total_loc: u64 = loc.iter().sum();
    let total_defects = actual.iter().filter(|&&a| a).count() as f64;
    if total_defects == 0.0 {
        // no defects anywhere: recall curve is identically zero
        return 0.0;
    }
    let total_loc = total_loc as f64;

    let mut area = 0.0;
    let mut x = 0.0;
    let mut y = 0.0;
    for &i in order {
        let dx = loc[i] as f64 / total_loc;
        let dy = if actual[i] { 1.0 / total_defects } else { 0.0 };
        if x + dx <= cutoff {
            area += y * dx;
            x += dx;
            y += dy;
        } else {
            let span = cutoff - x;
            if span > 0.0 {
                // partial module: interpolate its defect credit linearly
                area += y * span + dy * span * span / (2.0 * dx);
            }
            return area;
        }
    }
    area
}
